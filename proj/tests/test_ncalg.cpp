#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "akns/errors.hpp"
#include "akns/ncalg.hpp"
#include "akns/rational.hpp"
#include "akns/soliton.hpp"
#include "oracles.hpp"

using namespace akns;

namespace {

NcPoly U(int k = 0, Rational c = 1) { return NcPoly::symbol(sym_u(k), c); }
NcPoly UH(int k = 0, Rational c = 1) { return NcPoly::symbol(sym_uh(k), c); }

// Random polynomial of shape M×N with words of length 1 or 3.
NcPoly random_mn(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ord(0, 2), coef(-4, 4), len(0, 1);
  NcPoly p(kShapeMN);
  for (int t = 0; t < 3; ++t) {
    Rational c(coef(rng), 1 + (t % 3));
    if (c.is_zero()) continue;
    Word w = len(rng) ? Word{sym_u(ord(rng)), sym_uh(ord(rng)), sym_u(ord(rng))} : Word{sym_u(ord(rng))};
    p += NcPoly::word(w, c);
  }
  return p;
}

NcPoly random_nm(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ord(0, 2), coef(-3, 3);
  NcPoly p(kShapeNM);
  p += NcPoly::word({sym_uh(ord(rng))}, Rational(coef(rng)));
  p += NcPoly::word({sym_uh(ord(rng)), sym_u(ord(rng)), sym_uh(0)}, Rational(coef(rng), 2));
  return p;
}

GridField soliton_slice(const Grid1& g) {
  const DispersionParams d = close_dispersion(1.5, -0.5, {0.5}, {0.7}, 2);
  MatC b(2, 2), bh(2, 2);
  b << 0.4, 0.2, 0.2, 0.1;
  bh << -1, -1, -1, -1;
  const SolitonConfig cfg = make_soliton_config(d, {b}, {bh}, cplx(-0.9));
  GridField f = GridField::zeros(g, 2, 2);
  for (int i = 0; i < g.n; ++i) {
    const auto [u, uh] = closed_form_one_soliton(cfg, g.at(i), g.at(i), 0.0);
    f.uh[static_cast<std::size_t>(i)] = d.h() * u;
    f.u[static_cast<std::size_t>(i)] = -d.h() * uh;
  }
  return f;
}

}  // namespace

TEST_CASE("rational arithmetic is exact and normalized") {
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(-2, -4) == Rational(1, 2));
  CHECK(Rational(3, -6) == Rational(-1, 2));
  CHECK((Rational(2, 3) * Rational(3, 2)) == Rational(1));
  CHECK(Rational(1, 3).str() == "1/3");
  CHECK_THROWS_AS(Rational(INT64_MAX) * Rational(INT64_MAX), CoefficientOverflow);
}

TEST_CASE("nc_mul: concatenation, alternation, coefficients") {
  const NcPoly p = UH() * U();
  CHECK(p.shape() == kShapeNN);
  CHECK(p == NcPoly::word({sym_uh(), sym_u()}));
  CHECK_THROWS_AS(U() * U(), ShapeMismatch);
  CHECK_THROWS_AS(UH() * UH(), ShapeMismatch);
  CHECK((UH(0, 2) * U(1, 3)) == NcPoly::word({sym_uh(), sym_u(1)}, 6));
  CHECK_THROWS_AS(NcPoly::word({sym_u(), sym_u()}), ShapeMismatch);
}

TEST_CASE("nc_derive: Leibniz examples") {
  CHECK(nc_derive(U()) == U(1));
  CHECK(nc_derive(UH() * U()) == NcPoly::word({sym_uh(1), sym_u()}) + NcPoly::word({sym_uh(), sym_u(1)}));
  CHECK(nc_derive(U(1, -1)) == U(2, -1));
  CHECK(nc_derive(U(), 3) == U(3));
  CHECK(nc_derive(NcPoly::identity(Space::N)).is_zero());
}

TEST_CASE("canonical form: equality, zero, idempotence, printing") {
  NcPoly a = U(2) - U() * UH() * U(0, 2);
  NcPoly b = U() * UH() * U(0, -2) + U(2);
  CHECK(a == b);
  CHECK((a - b).is_zero());
  CHECK(normalize(normalize(a)) == normalize(a));
  CHECK(to_string(a) == "d2(u) - 2 * u * u.hat * u");
  CHECK(to_string(UH() * U(1)) == "u.hat * d1(u)");
  CHECK(to_string(NcPoly(kShapeMN)) == "0");
  CHECK(a.homogeneous(3));
  CHECK_FALSE((a + U()).homogeneous(3));
}

TEST_CASE("algebra properties on random polynomials") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const NcPoly a = random_mn(rng), b = random_nm(rng), c = random_mn(rng), c2 = random_mn(rng);
    CHECK(((a * b) * c) == (a * (b * c)));
    CHECK((a * (b * (c + c2))) == (a * b * c + a * b * c2));
    CHECK(nc_derive(a * b) == nc_derive(a) * b + a * nc_derive(b));
    CHECK(normalize(normalize(a * b)) == normalize(a * b));
  }
}

TEST_CASE("nc_eval is linear and multiplicative on random symbol values") {
  std::mt19937_64 rng(11);
  const int N = 2, M = 3;
  std::map<std::pair<int, int>, MatC> vals;
  SymbolValue v = [&](const Symbol& s) -> MatC {
    const auto key = std::make_pair(static_cast<int>(s.base), s.order);
    auto it = vals.find(key);
    if (it == vals.end()) {
      const bool isu = s.base == Base::U;
      it = vals.emplace(key, oracle::random_matrix(isu ? M : N, isu ? N : M, rng)).first;
    }
    return it->second;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const NcPoly a = random_mn(rng), b = random_nm(rng), c = random_mn(rng);
    const MatC ab = nc_eval(a * b, v, N, M);
    const MatC ref = nc_eval(a, v, N, M) * nc_eval(b, v, N, M);
    CHECK(oracle::sup(ab - ref) <= 1e-12 * std::max(1.0, oracle::sup(ref)));
    const MatC sum = nc_eval(a + c, v, N, M), sref = nc_eval(a, v, N, M) + nc_eval(c, v, N, M);
    CHECK(oracle::sup(sum - sref) <= 1e-12 * std::max(1.0, oracle::sup(sref)));
  }
  CHECK(oracle::sup(nc_eval(NcPoly::identity(Space::M), v, N, M) - MatC::Identity(M, M)) == 0.0);
}

TEST_CASE("nc_eval on grid fields against fd_derivative composition") {
  const Grid1 g = Grid1::span(-6, 6, 0.01);
  const GridField f = soliton_slice(g);
  const FdScheme fd{};
  const int i = g.n / 2 + 17;
  CHECK(oracle::sup(nc_eval(U(), f, i, fd) - f.u[static_cast<std::size_t>(i)]) == 0.0);
  CHECK(oracle::sup(nc_eval(UH() * U(), f, i, fd) - f.uh[static_cast<std::size_t>(i)] * f.u[static_cast<std::size_t>(i)]) ==
        doctest::Approx(0.0));

  // ∂²u − uûu, brute force
  const auto d2 = fd_derivative(f.u, g.dx, 2, fd);
  const NcPoly p = U(2) - U() * UH() * U();
  double worst = 0, scale = 0;
  for (int k = d2.first; k < d2.first + static_cast<int>(d2.values.size()); k += 7) {
    const auto s = static_cast<std::size_t>(k);
    const MatC ref = d2.at(k) - f.u[s] * f.uh[s] * f.u[s];
    worst = std::max(worst, oracle::sup(nc_eval(p, f, k, fd) - ref));
    scale = std::max(scale, oracle::sup(ref));
  }
  CHECK(worst <= 1e-12 * scale);
  CHECK_THROWS_AS(nc_eval(U(2), f, 0, fd), StencilOutOfRange);
}

TEST_CASE("aux elimination for the matrix Darboux rules") {
  const AuxRules r = AuxRules::matrix_darboux();
  // ∂K = QK with K = [[𝒜, −û], [u, 𝒟]]
  CHECK(r.dA == UH() * U());
  CHECK(r.dD == -(U() * UH()));
  CHECK(r.uA == U(1));
  CHECK(r.uhD == -UH(1));
  CHECK(eliminate_aux(NcPoly::word({sym_u(), sym_A()}), r) == U(1));
  CHECK(eliminate_aux(NcPoly::word({sym_uh(), sym_u(), sym_A()}), r) == UH() * U(1));
  CHECK_THROWS_AS(eliminate_aux(NcPoly::word({sym_A()}), r), ResidualAuxiliarySymbols);
}
