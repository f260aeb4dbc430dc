#include "akns/hierarchy.hpp"

#include <algorithm>

#include "akns/errors.hpp"

namespace akns {

Block Block::diag(const Rational& s1, const Rational& s2) {
  Block x;
  x.a = NcPoly::identity(Space::N, s1);
  x.d = NcPoly::identity(Space::M, s2);
  return x;
}

Block Block::q() {
  Block x;
  x.b = NcPoly::symbol(sym_uh());
  x.c = NcPoly::symbol(sym_u());
  return x;
}

Block& Block::operator+=(const Block& o) {
  a += o.a;
  b += o.b;
  c += o.c;
  d += o.d;
  return *this;
}

Block& Block::operator-=(const Block& o) {
  a -= o.a;
  b -= o.b;
  c -= o.c;
  d -= o.d;
  return *this;
}

Block& Block::operator*=(const Rational& s) {
  a *= s;
  b *= s;
  c *= s;
  d *= s;
  return *this;
}

Block operator*(const Block& x, const Block& y) {
  Block r;
  r.a = x.a * y.a + x.b * y.c;
  r.b = x.a * y.b + x.b * y.d;
  r.c = x.c * y.a + x.d * y.c;
  r.d = x.c * y.b + x.d * y.d;
  return r;
}

Block derive(const Block& x) { return {nc_derive(x.a), nc_derive(x.b), nc_derive(x.c), nc_derive(x.d)}; }

Block eliminate_aux(const Block& x, const AuxRules& rules) {
  return {eliminate_aux(x.a, rules), eliminate_aux(x.b, rules), eliminate_aux(x.c, rules),
          eliminate_aux(x.d, rules)};
}

std::string to_string(const Block& x) {
  return "[[" + to_string(x.a) + ", " + to_string(x.b) + "], [" + to_string(x.c) + ", " + to_string(x.d) + "]]";
}

const Block& LaxComponent::at(int k) const {
  static const Block zero;
  auto it = terms.find(k);
  return it == terms.end() ? zero : it->second;
}

void LaxComponent::add(int k, const Block& x) {
  Block& slot = terms[k];
  slot += x;
  if (slot.is_zero()) terms.erase(k);
}

LaxComponent operator*(const LaxComponent& x, const LaxComponent& y) {
  LaxComponent r;
  for (const auto& [i, bx] : x.terms)
    for (const auto& [j, by] : y.terms) r.add(i + j, bx * by);
  return r;
}

LaxComponent operator-(const LaxComponent& x, const LaxComponent& y) {
  LaxComponent r = x;
  for (const auto& [k, b] : y.terms) r.add(k, Rational(-1) * b);
  return r;
}

LaxComponent derive(const LaxComponent& x) {
  LaxComponent r;
  for (const auto& [k, b] : x.terms) r.add(k, derive(b));
  return r;
}

Block sigma() { return Block::diag(1, -1); }

LaxComponent build_u_matrix() {
  LaxComponent u;
  u.add(1, Block::diag(Rational(1, 2), Rational(-1, 2)));
  u.add(0, Block::q());
  return u;
}

Block darboux_k() {
  Block k;
  k.a = NcPoly::symbol(sym_A());
  k.b = NcPoly::symbol(sym_uh(), -1);
  k.c = NcPoly::symbol(sym_u());
  k.d = NcPoly::symbol(sym_D());
  return k;
}

std::vector<Block> recursion_terms(int n) {
  if (n < 1) return {};
  const AuxRules rules = AuxRules::matrix_darboux();
  const Block k = darboux_k();
  std::vector<Block> w(static_cast<std::size_t>(n));
  Block top = k * sigma() - sigma() * k;
  w[static_cast<std::size_t>(n - 1)] = eliminate_aux(Rational(1, 2) * top, rules);
  for (int j = n - 1; j >= 1; --j) {
    const Block next = Rational(-1) * (w[static_cast<std::size_t>(j)] * k);
    w[static_cast<std::size_t>(j - 1)] = eliminate_aux(next, rules);
  }
  return w;
}

LaxComponent time_component(int n, int max_n) {
  if (n < 0) throw UnsupportedOrder("flow index must be non-negative");
  if (n > max_n) throw UnsupportedOrder("flow " + std::to_string(n) + " exceeds cap " + std::to_string(max_n));
  LaxComponent v;
  v.add(n, Block::diag(Rational(1, 2), Rational(-1, 2)));
  const auto w = recursion_terms(n);
  for (int k = 0; k < n; ++k) v.add(k, w[static_cast<std::size_t>(k)]);
  return v;
}

LaxComponent curvature_rhs(int n) {
  const LaxComponent u = build_u_matrix();
  const LaxComponent v = time_component(n);
  return derive(v) - (u * v - v * u);
}

EquationsOfMotion derive_eom(int n) {
  if (n < 1) throw UnsupportedOrder("equations of motion need n >= 1");
  const LaxComponent r = curvature_rhs(n);
  for (const auto& [k, b] : r.terms) {
    if (k >= 1) throw LambdaOrderResidual("lambda^" + std::to_string(k) + " survives: " + to_string(b));
  }
  const Block& r0 = r.at(0);
  if (!r0.a.is_zero() || !r0.d.is_zero()) {
    throw LambdaOrderResidual("diagonal lambda^0 blocks survive: " + to_string(r0));
  }
  EquationsOfMotion e;
  e.n = n;
  e.dt_u = r0.c;
  e.dt_uh = r0.b;
  if (n == 1) e.label = "matrix transport equation";
  if (n == 2) e.label = "matrix NLS equation";
  return e;
}

std::pair<cplx, cplx> fundamental_darboux_ode_solution(const DarbouxOneSoliton& p, double x) {
  if (std::abs(p.w1 - p.w2) == 0.0) throw InvalidConstraint("w1 == w2");
  if (std::abs(p.xi1) == 0.0) throw InvalidConstraint("xi1 == 0");
  if (std::abs(p.w1 / (p.w2 * p.xi1) - 1.0) > 1e-12) {
    throw InvalidConstraint("closed form for C needs w1/(w2*xi1) = 1");
  }
  const cplx e = std::exp(p.h() * p.k1 / p.w1 * (x - p.x0));
  const cplx den = 1.0 - e;
  if (std::abs(den) < 1e-14) throw PoleAtX("1 - E vanishes at x = " + std::to_string(x));
  return {-(p.k1 / p.xi1) * e / den, p.C0 / den};
}

AuxRules differential_darboux_rules(const Rational& w1, const Rational& w2) {
  const Rational h = w1 - w2;
  if (h.is_zero() || w1.is_zero() || w2.is_zero()) throw InvalidConstraint("need w1 != w2 and both nonzero");
  AuxRules r;
  r.dA = NcPoly::word({sym_uh(), sym_u()}, Rational(-1) / (w1 * h));
  r.dD = NcPoly::word({sym_u(), sym_uh()}, Rational(1) / (w2 * h));
  r.uA = NcPoly::symbol(sym_u(1), -w2 / h);
  r.uhD = NcPoly::symbol(sym_uh(1), w1 / h);
  return r;
}

Block differential_darboux_k(const Rational& w1, const Rational& w2) {
  const Rational h = w1 - w2;
  Block k;
  k.a = NcPoly::symbol(sym_A());
  k.b = NcPoly::symbol(sym_uh(), Rational(-1) / h);
  k.c = NcPoly::symbol(sym_u(), Rational(1) / h);
  k.d = NcPoly::symbol(sym_D());
  return k;
}

std::vector<Block> check_general_darboux(int m, const std::vector<Block>& b, const Block& u,
                                         const Rational& w1, const Rational& w2, const AuxRules& rules) {
  if (m < 1 || static_cast<int>(b.size()) != m) throw ShapeMismatch("need exactly m coefficient blocks");
  const Block w = Block::diag(w1, w2);
  auto comm = [&](const Block& x) { return w * x - x * w; };
  std::vector<Block> out;
  for (int k = 1; k <= m - 1; ++k) {
    const Block& bk = b[static_cast<std::size_t>(k)];
    out.push_back(eliminate_aux(comm(b[static_cast<std::size_t>(k - 1)]) + w * derive(bk) + u * bk, rules));
  }
  out.push_back(eliminate_aux(u * b[0] + w * derive(b[0]), rules));
  out.push_back(eliminate_aux(comm(b[static_cast<std::size_t>(m - 1)]) + u, rules));
  return out;
}

double BacklundResidual::max() const { return std::max({b, c, dA, dD, dB, dC}); }

BacklundResidual backlund_residual(const GridField& f, const GridField& f0, const DarbouxSamples& k,
                                   const FdScheme& fd) {
  const auto n = static_cast<std::size_t>(f.grid.n);
  if (!f.grid.matches(f0.grid) || f.N != f0.N || f.M != f0.M) throw GridMismatch("seed grid differs from fields");
  if (k.A.size() != n || k.B.size() != n || k.C.size() != n || k.D.size() != n || f.u.size() != n ||
      f0.u.size() != n) {
    throw GridMismatch("darboux samples not on the field grid");
  }
  FdOperator d1(f.grid.n, f.grid.dx, 1, fd);
  auto deriv = [&](const std::vector<MatC>& s, int i) {
    return d1.apply(i, [&](int j) -> const MatC& { return s[static_cast<std::size_t>(j)]; });
  };
  BacklundResidual r;
  for (std::size_t i = 0; i < n; ++i) {
    r.b = std::max(r.b, sup_norm(k.B[i] + (f.uh[i] - f0.uh[i])));
    r.c = std::max(r.c, sup_norm(k.C[i] - (f.u[i] - f0.u[i])));
  }
  for (int i = d1.first_valid(); i <= d1.last_valid(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    r.dA = std::max(r.dA, sup_norm(deriv(k.A, i) - (f.uh[s] * k.C[s] - k.B[s] * f0.u[s])));
    r.dD = std::max(r.dD, sup_norm(deriv(k.D, i) - (f.u[s] * k.B[s] - k.C[s] * f0.uh[s])));
    r.dB = std::max(r.dB, sup_norm(deriv(k.B, i) - (f.uh[s] * k.D[s] - k.A[s] * f0.uh[s])));
    r.dC = std::max(r.dC, sup_norm(deriv(k.C, i) - (f.u[s] * k.A[s] - k.D[s] * f0.u[s])));
  }
  return r;
}

}  // namespace akns
