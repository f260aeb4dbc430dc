#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "akns/errors.hpp"
#include "akns/glm.hpp"
#include "akns/soliton.hpp"
#include "oracles.hpp"

using namespace akns;

namespace {

oracle::ScalarExp kExp;

SolitonConfig scalar_config(double b = 1.0, double bh = -1.0) {
  const DispersionParams d = close_dispersion(kExp.w1, kExp.w2, {kExp.kappa}, {kExp.kappah}, 2);
  return make_soliton_config(d, {MatC::Constant(1, 1, b)}, {MatC::Constant(1, 1, bh)}, cplx(b * bh));
}

KernelPair<double> pair_for(const SolitonConfig& c, const Grid1& g) {
  return sample_kernel_pair<double>(discrete_kernel(c.disp, c.b, c.bh), g, 0.0);
}

GlmOptions opts(double gate = 1e-8) {
  GlmOptions o;
  o.w1 = kExp.w1;
  o.w2 = kExp.w2;
  o.decay_gate = gate;
  return o;
}

double closed_form_error(const GlmSolution<double>& s, const SolitonConfig& c) {
  double e = 0;
  const Grid1& g = s.B.grid();
  for (int i = 0; i < g.n; ++i) {
    const auto [B, C] = closed_form_one_soliton(c, g.at(i), g.at(i), 0.0);
    e = std::max(e, std::abs(s.B.block(i, i)(0, 0) - B(0, 0).real()));
    e = std::max(e, std::abs(s.C.block(i, i)(0, 0) - C(0, 0).real()));
  }
  return e;
}

}  // namespace

TEST_CASE("Kernel2D support discipline") {
  Kernel2D<double> k(Grid1::span(0, 1, 0.25), 2, 3, Support::Upper);
  CHECK(k.data().rows() == 10);
  CHECK(k.data().cols() == 15);
  CHECK_NOTHROW(k.set(1, 3, Mat<double>::Ones(2, 3)));
  CHECK_THROWS_AS(k.set(3, 1, Mat<double>::Ones(2, 3)), ShapeMismatch);
  CHECK(k.support_violation() == 0.0);
  k.mutable_data()(9, 0) = 1.5;
  CHECK(k.support_violation() == 1.5);
  Kernel2D<double> l(Grid1::span(0, 1, 0.25), 1, 1, Support::Lower);
  CHECK(l.in_support(3, 1));
  CHECK_FALSE(l.in_support(1, 3));
}

TEST_CASE("kernel sampling") {
  const Grid1 g = Grid1::span(0, 1, 0.5);
  const KernelPair<double> F = pair_for(scalar_config(), g);
  CHECK(F.f.block(1, 2)(0, 0) == doctest::Approx(kExp.f(0.5, 1.0)));
  CHECK(F.fh.block(2, 0)(0, 0) == doctest::Approx(kExp.fh(1.0, 0.0)));
  LinearKernel ck;
  ck.f = [](double, double, double) { return MatC::Constant(1, 1, cplx(0, 1)); };
  ck.fh = ck.f;
  CHECK_THROWS_AS(sample_kernel_pair<double>(ck, g, 0.0), ShapeMismatch);
  CHECK_NOTHROW(sample_kernel_pair<cplx>(ck, g, 0.0));
}

TEST_CASE("zero data gives zero kernels") {
  const Grid1 g = Grid1::span(0, 2, 0.1);
  KernelPair<double> F{Kernel2D<double>(g, 2, 1, Support::Full), Kernel2D<double>(g, 1, 2, Support::Full)};
  const GlmSolution<double> s = solve_glm(F, GlmOptions{});
  CHECK(s.A.data().cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.B.data().cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.C.data().cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.D.data().cwiseAbs().maxCoeff() == 0.0);
  const ResolventFields<double> r = resolvent_fields(F, GlmOptions{});
  CHECK(r.B.data().cwiseAbs().maxCoeff() == 0.0);
  CHECK(factorization_check(s, F, {0.5, 1.0}, 0.3).residual == 0.0);
  CHECK(constr1_residual(s, 1.0, -1.0).max() == 0.0);
  CHECK(integral_riccati_residual(s, 1.0, -1.0).max() == 0.0);
}

TEST_CASE("routes agree with a Neumann-series oracle") {
  const Grid1 g = Grid1::span(0, 3, 0.05);
  oracle::ScalarExp e = kExp;
  e.b = 0.3;
  e.bh = -0.3;
  const SolitonConfig c = scalar_config(0.3, -0.3);
  const KernelPair<double> F = pair_for(c, g);
  const GlmSolution<double> s = solve_glm(F, opts(1.0));
  const ResolventFields<double> r = resolvent_fields(F, opts(1.0));
  std::vector<double> x(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) x[static_cast<std::size_t>(i)] = g.at(i);
  double worst_a = 0, worst_b = 0;
  for (int i = 0; i < g.n; i += 6) {
    const auto ref = oracle::neumann_row([&](double a, double b) { return e.f(a, b); },
                                         [&](double a, double b) { return e.fh(a, b); }, x, i, 40);
    for (int j = i; j < g.n; ++j) {
      worst_a = std::max(worst_a, std::abs(s.B.block(i, j)(0, 0) - ref[static_cast<std::size_t>(j)]));
      worst_b = std::max(worst_b, std::abs(r.B.block(i, j)(0, 0) - ref[static_cast<std::size_t>(j)]));
    }
  }
  CHECK(worst_a < 1e-8);
  CHECK(worst_b < 1e-8);
  CHECK((s.C.data() - r.C.data()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("A and D follow from B and C by trapezoid composition") {
  const Grid1 g = Grid1::span(0, 3, 0.05);
  const SolitonConfig c = scalar_config(0.5, -0.5);
  const KernelPair<double> F = pair_for(c, g);
  const GlmSolution<double> s = solve_glm(F, opts(1.0));
  double worst = 0;
  for (int i = 0; i + 1 < g.n; i += 5)
    for (int j = i; j < g.n; j += 3) {
      // 𝔸(x,z) = −∫_x 𝔹(x,y) f̂(y,z) dy, 𝔻(x,z) = −∫_x ℂ(x,y) f(y,z) dy
      double a = 0, d = 0;
      for (int y = i; y < g.n; ++y) {
        const double w = (y == i || y == g.n - 1) ? 0.5 * g.dx : g.dx;
        a -= w * s.B.block(i, y)(0, 0) * F.fh.block(y, j)(0, 0);
        d -= w * s.C.block(i, y)(0, 0) * F.f.block(y, j)(0, 0);
      }
      worst = std::max({worst, std::abs(s.A.block(i, j)(0, 0) - a), std::abs(s.D.block(i, j)(0, 0) - d)});
    }
  CHECK(worst < 1e-12);
  CHECK(s.A.support_violation() == 0.0);
  CHECK(s.B.support_violation() == 0.0);
  // fields from the diagonal
  const double h = kExp.w1 - kExp.w2;
  CHECK(std::abs(s.uh[3](0, 0) - h * s.B.block(3, 3)(0, 0)) < 1e-15);
  CHECK(std::abs(s.u[3](0, 0) + h * s.C.block(3, 3)(0, 0)) < 1e-15);
}

TEST_CASE("closed-form agreement with second-order convergence") {
  const SolitonConfig c = scalar_config();
  const GlmSolution<double> s1 = solve_glm(pair_for(c, Grid1::span(-2, 7, 0.04)), opts());
  const GlmSolution<double> s2 = solve_glm(pair_for(c, Grid1::span(-2, 7, 0.02)), opts());
  const double e1 = closed_form_error(s1, c), e2 = closed_form_error(s2, c);
  INFO(e1 << " " << e2);
  CHECK(e2 < 1e-3);
  CHECK(e1 / e2 >= 3.5);
  CHECK(s2.min_abs_det > 1e-12);

  // complex instantiation matches the real one on real data
  const Grid1 g = Grid1::span(-2, 7, 0.04);
  const GlmSolution<cplx> sc = solve_glm(sample_kernel_pair<cplx>(discrete_kernel(c.disp, c.b, c.bh), g, 0.0), opts());
  // the two instantiations pivot differently; agreement to solver roundoff times the condition number
  CHECK((sc.B.data().real() - s1.B.data()).cwiseAbs().maxCoeff() < 1e-9 * s1.B.data().cwiseAbs().maxCoeff());
}

TEST_CASE("factorization, constraints and integral Riccati on soliton data") {
  const SolitonConfig c = scalar_config();
  auto run = [&](double dx) {
    const Grid1 g = Grid1::span(-2, 7, dx);
    const KernelPair<double> F = pair_for(c, g);
    const GlmSolution<double> s = solve_glm(F, opts());
    const double xa = g.x0, L = g.back() - g.x0;
    const auto fr = factorization_check(s, F, {xa + 0.25 * L, xa + 0.4 * L, xa + 0.6 * L}, 0.3);
    CHECK(fr.k_minus.support_violation() == 0.0);
    CHECK(fr.k_minus.support() == Support::Lower);
    return std::array<double, 3>{fr.residual, constr1_residual(s, kExp.w1, kExp.w2).max(),
                                 integral_riccati_residual(s, kExp.w1, kExp.w2).max()};
  };
  const auto a = run(0.04), b = run(0.02);
  INFO(a[0] << " " << b[0] << " | " << a[1] << " " << b[1] << " | " << a[2] << " " << b[2]);
  CHECK(b[0] < 2e-3);
  CHECK(a[0] / b[0] > 3.0);
  CHECK(b[1] < 3e-3);
  CHECK(a[1] / b[1] > 3.0);
  CHECK(b[2] < 5e-3);
}

TEST_CASE("riccati gamma satisfies its defining Volterra relation") {
  const Grid1 g = Grid1::span(0, 3, 0.05);
  const SolitonConfig c = scalar_config(0.5, -0.5);
  const GlmSolution<double> s = solve_glm(pair_for(c, g), opts(1.0));
  const Kernel2D<double> gam = riccati_gamma(s);
  CHECK(gam.support_violation() == 0.0);
  // γ(x,z) + ∫_x^z γ(x,y) 𝔸(y,z) dy = ℂ(x,z), trapezoid on [x, z]
  double worst = 0;
  for (int i = 0; i < g.n; i += 4)
    for (int j = i; j < g.n; j += 5) {
      double acc = gam.block(i, j)(0, 0);
      for (int y = i; y <= j; ++y) {
        const double w = (j == i) ? 0.0 : ((y == i || y == j) ? 0.5 * g.dx : g.dx);
        acc += w * gam.block(i, y)(0, 0) * s.A.block(y, j)(0, 0);
      }
      worst = std::max(worst, std::abs(acc - s.C.block(i, j)(0, 0)));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("error conditions") {
  const SolitonConfig c = scalar_config();
  const KernelPair<double> wide = pair_for(c, Grid1::span(-2, 3, 0.05));
  CHECK_THROWS_AS(solve_glm(wide, opts()), TruncationInadmissible);
  GlmOptions strict = opts(1.0);
  strict.det_floor = 1e300;
  CHECK_THROWS_AS(solve_glm(wide, strict), SingularResolvent);
  CHECK_THROWS_AS(resolvent_fields(wide, strict), SingularResolvent);
}

TEST_CASE("quadrature weights integrate polynomials") {
  for (int m : {5, 6, 7, 10}) {
    const auto w = quad_weights(m, 0.1, Quadrature::Simpson);
    double i3 = 0, i0 = 0;
    for (int k = 0; k < m; ++k) {
      const double x = 0.1 * k;
      i3 += w[static_cast<std::size_t>(k)] * x * x * x;
      i0 += w[static_cast<std::size_t>(k)];
    }
    const double L = 0.1 * (m - 1);
    CHECK(i0 == doctest::Approx(L));
    CHECK(i3 == doctest::Approx(L * L * L * L / 4));
  }
  const auto t = quad_weights(4, 0.5, Quadrature::Trapezoid);
  CHECK(t[0] == 0.25);
  CHECK(t[1] == 0.5);
}
