#include "akns/riccati.hpp"

#include <algorithm>

#include "akns/errors.hpp"

namespace akns {

GammaSeries gamma_terms(int kmax, RiccatiVariant variant) {
  if (kmax < 1) throw UnsupportedOrder("kmax must be >= 1");
  GammaSeries s;
  s.variant = variant;
  const bool hat = variant == RiccatiVariant::GammaHat;
  // Γ̂ couples through u, Γ through û.
  const NcPoly mid = hat ? NcPoly::symbol(sym_u()) : NcPoly::symbol(sym_uh());
  s.terms.push_back(hat ? NcPoly::symbol(sym_uh(), -1) : NcPoly::symbol(sym_u()));
  for (int k = 1; k < kmax; ++k) {
    NcPoly quad(s.terms[0].shape());
    for (int l = 1; l <= k - 1; ++l) quad += s[l] * mid * s[k - l];
    NcPoly next = hat ? nc_derive(s[k]) + quad : -nc_derive(s[k]) - quad;
    s.terms.push_back(std::move(next));
  }
  return s;
}

NcPoly charge_density(int k) { return NcPoly::symbol(sym_uh()) * gamma_terms(k)[k]; }

ChargeValue evaluate_charge(int k, const GridField& field, const FdScheme& fd) {
  const NcPoly dens = charge_density(k);
  FieldJet jet(field, fd);
  const auto [lo, hi] = jet.valid_range(std::max(dens.max_order(), 0));
  ChargeValue out;
  const double dx = field.grid.dx;
  for (int i = lo; i <= hi; ++i) {
    const double w = (i == lo || i == hi) ? 0.5 * dx : dx;
    out.value += w * nc_eval(dens, jet, i).trace();
  }
  for (int i : {0, field.grid.n - 1}) {
    const auto s = static_cast<std::size_t>(i);
    if (sup_norm(field.u[s]) >= 1e-10 || sup_norm(field.uh[s]) >= 1e-10) out.boundary_leak = true;
  }
  return out;
}

double riccati_residual(const GammaSeries& s, cplx lambda, const GridField& field, const FdScheme& fd) {
  const bool hat = s.variant == RiccatiVariant::GammaHat;
  std::vector<NcPoly> dterms;
  int maxo = 0;
  for (const auto& g : s.terms) {
    dterms.push_back(nc_derive(g));
    maxo = std::max(maxo, dterms.back().max_order());
  }
  FieldJet jet(field, fd);
  const auto [lo, hi] = jet.valid_range(maxo);
  double worst = 0.0;
  for (int i = lo; i <= hi; ++i) {
    MatC g = nc_eval(s.terms[0], jet, i) * 0.0;
    MatC dg = g;
    cplx lp = 1.0;
    for (int k = 1; k <= s.kmax(); ++k) {
      lp /= lambda;
      g += lp * nc_eval(s[k], jet, i);
      dg += lp * nc_eval(dterms[static_cast<std::size_t>(k - 1)], jet, i);
    }
    const auto idx = static_cast<std::size_t>(i);
    MatC r = hat ? MatC(dg - field.uh[idx] - lambda * g + g * field.u[idx] * g)
                 : MatC(dg - field.u[idx] + lambda * g + g * field.uh[idx] * g);
    worst = std::max(worst, sup_norm(r));
  }
  return worst;
}

NcPoly cyclic_variation(const NcPoly& density) {
  if (!(density.shape() == kShapeNN)) throw ShapeMismatch("trace density must be N x N");
  NcPoly out(kShapeMN);
  for (const auto& [w, c] : density.terms()) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i].base != Base::UHat) continue;
      // tr(L ∂ᵈû R) = tr(∂ᵈû R L); strip the û factor, integrate by parts d times.
      Word rest(w.begin() + static_cast<std::ptrdiff_t>(i) + 1, w.end());
      rest.insert(rest.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
      const int d = w[i].order;
      NcPoly term = NcPoly::word(rest, d % 2 == 0 ? c : -c);
      out += nc_derive(term, d);
    }
  }
  return out;
}

NcPoly variational_flow(int k) {
  if (k < 1) throw UnsupportedOrder("k must be >= 1");
  if (k > 3) throw UnsupportedOrder("variational flow validated only for k <= 3");
  return cyclic_variation(charge_density(k));
}

}  // namespace akns
