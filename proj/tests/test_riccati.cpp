#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "akns/errors.hpp"
#include "akns/hierarchy.hpp"
#include "akns/riccati.hpp"
#include "akns/soliton.hpp"
#include "oracles.hpp"

using namespace akns;

namespace {

NcPoly U(int k = 0, Rational c = 1) { return NcPoly::symbol(sym_u(k), c); }
NcPoly UH(int k = 0, Rational c = 1) { return NcPoly::symbol(sym_uh(k), c); }
NcPoly W(std::initializer_list<Symbol> s, Rational c = 1) { return NcPoly::word(Word(s), c); }

SolitonConfig matrix_soliton() {
  const DispersionParams d = close_dispersion(1.5, -0.5, {0.5}, {0.7}, 2);
  MatC b(2, 2), bh(2, 2);
  b << 0.4, 0.2, 0.2, 0.1;
  bh << -1, -1, -1, -1;
  return make_soliton_config(d, {b}, {bh}, cplx(-0.9));
}

GridField slice(const SolitonConfig& cfg, const Grid1& g, double t) {
  return sample_trajectory(soliton_field(cfg, Provenance::ClosedFormTL), g, Grid1{t, 1.0, 1}).slices.front();
}

// Scalar commuting recursion: coefficients of Γ as polynomials in the jets
// (u, u', u'', ...) and û, evaluated numerically from analytic derivatives.
// γ1 = u, γ_{k+1} = −γ_k' − û Σ γ_l γ_{k−l}, carried as values of γ_k and its derivatives.
std::vector<std::vector<double>> scalar_gammas(int kmax, const std::vector<double>& u, const std::vector<double>& uh) {
  // u[j] = ∂ʲu, uh[j] = ∂ʲû; returns g[k][j] = ∂ʲγ_k for j while available.
  const int J = static_cast<int>(u.size());
  std::vector<std::vector<double>> g(kmax + 1, std::vector<double>(J, 0.0));
  g[1] = u;
  auto binom = [](int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  for (int k = 1; k < kmax; ++k) {
    const int avail = J - k;  // derivatives of γ_{k+1} known up to this order
    for (int j = 0; j < avail; ++j) {
      double v = -g[k][j + 1];
      // ∂ʲ(û Σ γ_l γ_{k−l}) by Leibniz
      for (int l = 1; l < k; ++l)
        for (int a = 0; a <= j; ++a)
          for (int b = 0; a + b <= j; ++b)
            v -= binom(j, a) * binom(j - a, b) * uh[j - a - b] * g[l][a] * g[k - l][b];
      g[k + 1][j] = v;
    }
  }
  return g;
}

}  // namespace

TEST_CASE("gamma terms and charge densities") {
  const GammaSeries s = gamma_terms(4);
  CHECK(s[1] == U());
  CHECK(s[2] == -U(1));
  CHECK(s[3] == U(2) - W({sym_u(), sym_uh(), sym_u()}));
  CHECK(charge_density(1) == W({sym_uh(), sym_u()}));
  CHECK(charge_density(2) == -W({sym_uh(), sym_u(1)}));
  CHECK(charge_density(3) == W({sym_uh(), sym_u(2)}) - W({sym_uh(), sym_u(), sym_uh(), sym_u()}));
}

TEST_CASE("gamma recursion and grading hold exactly") {
  const GammaSeries s = gamma_terms(6);
  for (int k = 1; k < 6; ++k) {
    NcPoly r = nc_derive(s[k]) + s[k + 1];
    for (int l = 1; l < k; ++l) r += s[l] * UH() * s[k - l];
    CHECK(r.is_zero());
    CHECK(s[k].homogeneous(k));
  }
  const GammaSeries h = gamma_terms(3, RiccatiVariant::GammaHat);
  CHECK(h[1] == -UH());
  CHECK(h[1].shape() == kShapeNM);
}

TEST_CASE("scalar reduction matches a direct commutative recursion") {
  // Sample values for the jets of u and û at one point.
  const std::vector<double> u = {0.7, -0.3, 0.45, 0.2, -0.6, 0.1}, uh = {-0.4, 0.25, 0.6, -0.15, 0.3, 0.05};
  const auto ref = scalar_gammas(4, u, uh);
  const GammaSeries s = gamma_terms(4);
  SymbolValue val = [&](const Symbol& sy) -> MatC {
    return MatC::Constant(1, 1, sy.base == Base::U ? u.at(sy.order) : uh.at(sy.order));
  };
  for (int k = 1; k <= 4; ++k) {
    const double num = nc_eval(s[k], val, 1, 1)(0, 0).real();
    CHECK(num == doctest::Approx(ref[k][0]).epsilon(1e-12));
    const double dens = nc_eval(charge_density(k), val, 1, 1)(0, 0).real();
    CHECK(dens == doctest::Approx(uh[0] * ref[k][0]).epsilon(1e-12));
  }
}

TEST_CASE("charges on grids") {
  const Grid1 g = Grid1::span(-15, 15, 0.01);
  const GridField z = GridField::zeros(g, 2, 3);
  for (int k = 1; k <= 4; ++k) CHECK(std::abs(evaluate_charge(k, z).value) == 0.0);

  const SolitonConfig cfg = matrix_soliton();
  const GridField f = slice(cfg, g, 0.0);
  GridField scaled = f;
  const cplx c(1.3, 0.2), ch(-0.7, 0.0);
  for (auto& m : scaled.u) m *= c;
  for (auto& m : scaled.uh) m *= ch;
  const cplx i1 = evaluate_charge(1, f).value, i1s = evaluate_charge(1, scaled).value;
  CHECK(std::abs(i1s - c * ch * i1) < 1e-12 * std::abs(i1s));
  CHECK_FALSE(evaluate_charge(1, f).boundary_leak);

  // exact trajectory: charge 2 at two times along the flow-matched field
  const SolitonField m = flow_matched(soliton_field(cfg, Provenance::ClosedFormTL), flow_matching(cfg.disp));
  const auto tr = sample_trajectory(m, g, Grid1{0.0, 0.7, 2});
  const cplx a = evaluate_charge(2, tr.slices[0]).value, b = evaluate_charge(2, tr.slices[1]).value;
  CHECK(std::abs(a - b) / std::abs(a) < 1e-6);

  const GridField narrow = slice(cfg, Grid1::span(-3, 3, 0.01), 0.0);
  CHECK(evaluate_charge(1, narrow).boundary_leak);
}

TEST_CASE("truncated Riccati residual") {
  const Grid1 g = Grid1::span(-10, 10, 0.01);
  const GridField z = GridField::zeros(g, 2, 2);
  CHECK(riccati_residual(gamma_terms(3), 5.0, z) == 0.0);

  const GridField f = slice(matrix_soliton(), g, 0.0);
  const GammaSeries s4 = gamma_terms(4);
  const double r10 = riccati_residual(s4, 10.0, f), r20 = riccati_residual(s4, 20.0, f);
  INFO(r10 << " " << r20);
  CHECK(r10 / r20 >= 8.0);

  // kmax = 1: λ times the residual tends to sup|∂u|
  double du = 0;
  FieldJet jet(f, FdScheme{});
  const auto [lo, hi] = jet.valid_range(1);
  for (int i = lo; i <= hi; ++i) du = std::max(du, sup_norm(jet.derivative(false, 1, i)));
  const double r1 = riccati_residual(gamma_terms(1), 1e4, f);
  CHECK(std::abs(1e4 * r1 - du) < 1e-2 * du);

  const GammaSeries h4 = gamma_terms(4, RiccatiVariant::GammaHat);
  CHECK(riccati_residual(h4, 10.0, f) / riccati_residual(h4, 20.0, f) >= 8.0);
}

TEST_CASE("variational derivatives") {
  CHECK(variational_flow(2) == -U(1));
  CHECK(cyclic_variation(W({sym_uh(), sym_u()})) == U());
  CHECK(cyclic_variation(W({sym_uh(), sym_u(), sym_uh(), sym_u()})) == W({sym_u(), sym_uh(), sym_u()}, 2));
  // H2 = −I2 generates the transport flow; H3 = −I3 the NLS flow up to the overall sign
  CHECK(-variational_flow(2) == derive_eom(1).dt_u);
  const NcPoly v3 = variational_flow(3);
  CHECK((v3 == derive_eom(2).dt_u || -v3 == derive_eom(2).dt_u));
  CHECK_THROWS_AS(variational_flow(4), UnsupportedOrder);
}

TEST_CASE("variational derivative against a numeric perturbation") {
  // d/dε ∫ tr((û + εη) u (û + εη) u) = ∫ tr(η · 2uûu) for constant fields on a unit interval
  std::mt19937_64 rng(5);
  const int N = 2, M = 3;
  const MatC u = oracle::random_matrix(M, N, rng), uh = oracle::random_matrix(N, M, rng), eta = oracle::random_matrix(N, M, rng);
  auto F = [&](const MatC& h) { return (h * u * h * u).trace(); };
  const double e = 1e-5;
  const cplx num = (F(uh + e * eta) - F(uh - e * eta)) / (2 * e);
  SymbolValue val = [&](const Symbol& s) -> MatC {
    if (s.order > 0) return MatC::Zero(s.base == Base::U ? M : N, s.base == Base::U ? N : M);
    return s.base == Base::U ? u : uh;
  };
  const MatC grad = nc_eval(cyclic_variation(W({sym_uh(), sym_u(), sym_uh(), sym_u()})), val, N, M);
  CHECK(std::abs((eta * grad).trace() - num) < 1e-8);
}
