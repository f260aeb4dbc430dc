#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "akns/errors.hpp"
#include "akns/verify.hpp"
#include "oracles.hpp"

using namespace akns;

namespace {

MatC m22(double a, double b, double c, double d) {
  MatC m(2, 2);
  m << a, b, c, d;
  return m;
}

SolitonConfig tl_config(int n) {
  const DispersionParams d = close_dispersion(1.5, -0.5, {0.5}, {0.7}, n, 0.4, -0.3);
  return make_soliton_config(d, {m22(0.4, 0.2, 0.2, 0.1)}, {m22(-1, -1, -1, -1)}, cplx(-0.9));
}

Trajectory raw(const SolitonConfig& c, const Grid1& x, const Grid1& t) {
  return sample_trajectory(soliton_field(c, Provenance::ClosedFormTL), x, t);
}

Trajectory matched(const SolitonConfig& c, const Grid1& x, const Grid1& t) {
  return sample_trajectory(flow_matched(soliton_field(c, Provenance::ClosedFormTL), flow_matching(c.disp)), x, t);
}

EquationId with_w(const std::string& name) {
  EquationId e = EquationId::parse(name);
  e.w1 = 1.5;
  e.w2 = -0.5;
  e.wh1 = 0.4;
  e.wh2 = -0.3;
  return e;
}

const Grid1 kX = Grid1::span(-15, 15, 0.005);
const Grid1 kT{-0.02, 0.005, 9};

}  // namespace

TEST_CASE("equation ids") {
  CHECK(EquationId::parse("linear_time(3)").n == 3);
  CHECK(EquationId::parse("linear_time(3)").name() == "linear_time(3)");
  CHECK(EquationId::parse("mkdv_s4_derived").kind == EqKind::MkdvS4Derived);
  CHECK_THROWS_AS(EquationId::parse("kdv"), ConfigError);
  EquationId e = EquationId::parse("nls_s3");
  e.w1 = 1.0;
  CHECK_THROWS_AS(e.validate(), ConfigError);
  e.w2 = -1.0;
  CHECK_NOTHROW(e.validate());
  CHECK_THROWS_AS(EquationId::parse("burgers_viscous").validate(), ConfigError);
}

TEST_CASE("zero fields give zero residuals") {
  const Grid1 x = Grid1::span(-1, 1, 0.05), t{0, 0.05, 9};
  Trajectory z;
  z.t = t;
  for (int j = 0; j < t.n; ++j) z.slices.push_back(GridField::zeros(x, 2, 2));
  for (const char* n : {"transport_s3", "nls_s3", "mkdv_s3", "transport_s4", "nls_s4", "mkdv_s4_derived"})
    CHECK(pde_residual(with_w(n), z).residual == 0.0);
  CHECK(zero_curvature_residual(2, z, {0.0, 1.0, cplx(0, 1)}) == 0.0);
  for (const auto& r : conservation_drift(3, z)) {
    CHECK(r.drift == 0.0);
    CHECK(std::abs(r.values.front()) == 0.0);
  }
}

TEST_CASE("NLS flow: explicit and derived forms, zero curvature, negative controls") {
  const SolitonConfig c = tl_config(2);
  const Trajectory r = raw(c, kX, kT), m = matched(c, kX, kT);
  const Verdict v3 = pde_residual(with_w("nls_s3"), r);
  CHECK(v3.residual < 1e-6);
  REQUIRE(v3.fd_floor.has_value());
  CHECK(*v3.fd_floor > 0);
  CHECK(pde_residual(EquationId::parse("nls_s4"), m).residual < 1e-6);
  CHECK(zero_curvature_residual(2, m, {0.0, 1.0, -1.0, cplx(0, 1), cplx(0, -1), 2.0}) < 1e-6);

  Trajectory scaled = r;
  for (auto& s : scaled.slices)
    for (auto& u : s.u) u *= 1.1;
  CHECK(pde_residual(with_w("nls_s3"), scaled).residual > 1e-2);
  CHECK(pde_residual(with_w("nls_s3"), perturbed(r, 0.1)).residual > 1e-2);
  CHECK(zero_curvature_residual(2, perturbed(m, 0.1), {0.0, 1.0, 2.0}) > 1e-2);
  // the wrong flow's equation rejects the NLS trajectory
  CHECK(pde_residual(EquationId::parse("transport_s4"), m).residual > 1e-2);
}

TEST_CASE("explicit NLS form equals the derived form after flow matching, pointwise") {
  // w1 w2 = −1 and w1 + w2 = −1: v̂ = −û, τ = s t with s = −(w1+w2)/h > 0, and R_s3 = |a| R_s4 for any fields.
  const double w1 = (std::sqrt(5.0) - 1) / 2, w2 = -1 / w1, h = w1 - w2, a = (w1 + w2) / h, s = -a;
  const Grid1 x = Grid1::span(-3, 3, 0.01), t{0.0, 0.01, 9};
  Trajectory r, m;
  r.t = t;
  m.t = Grid1{s * t.x0, s * t.dx, t.n};
  for (int j = 0; j < t.n; ++j) {
    GridField fr = GridField::zeros(x, 1, 2), fm = GridField::zeros(x, 1, 2);
    for (int i = 0; i < x.n; ++i) {
      const double xx = x.at(i), tt = t.at(j);
      MatC u(2, 1), uh(1, 2);
      u << std::exp(-xx * xx) * (1 + tt), cplx(std::sin(xx + tt), 0.2 * xx);
      uh << 0.5 / std::cosh(xx - tt), cplx(0.1 * xx * tt, std::cos(2 * xx));
      fr.u[static_cast<std::size_t>(i)] = u;
      fr.uh[static_cast<std::size_t>(i)] = uh;
      fm.u[static_cast<std::size_t>(i)] = u;
      fm.uh[static_cast<std::size_t>(i)] = uh / (w1 * w2);
    }
    r.slices.push_back(fr);
    m.slices.push_back(fm);
  }
  EquationId e3 = EquationId::parse("nls_s3");
  e3.w1 = w1;
  e3.w2 = w2;
  VerifyOptions o;
  o.keep_map = true;
  o.estimate_floor = false;
  const Verdict v3 = pde_residual(e3, r, o), v4 = pde_residual(EquationId::parse("nls_s4"), m, o);
  REQUIRE(v3.map.values.size() == v4.map.values.size());
  REQUIRE(!v3.map.values.empty());
  double worst = 0;
  for (std::size_t k = 0; k < v3.map.values.size(); ++k)
    worst = std::max(worst, std::abs(v3.map.values[k] - std::abs(a) * v4.map.values[k]));
  CHECK(v3.residual > 1e-2);
  CHECK(worst < 1e-10 * v3.residual);
}

TEST_CASE("transport and mKdV flows") {
  const Grid1 x = Grid1::span(-15, 15, 0.005);
  const SolitonConfig c1 = tl_config(1);
  CHECK(pde_residual(with_w("transport_s3"), raw(c1, x, kT)).residual < 1e-6);
  CHECK(pde_residual(EquationId::parse("transport_s4"), matched(c1, x, kT)).residual < 1e-6);
  CHECK(zero_curvature_residual(1, matched(c1, x, kT), {0.0, 1.0, 2.0}) < 1e-6);

  // flow 3 moves fast: check fourth-order convergence of the residuals instead of one grid
  const SolitonConfig c3 = tl_config(3);
  const Grid1 xc = Grid1::span(-15, 15, 0.005), xf = Grid1::span(-15, 15, 0.0025);
  const Grid1 tc{-0.01, 0.0025, 9}, tf{-0.005, 0.00125, 9};
  const Trajectory m3 = matched(c3, xc, tc), m3f = matched(c3, xf, tf);
  const std::vector<cplx> lams = {0.0, 1.0, cplx(0, 1)};
  const double zc = zero_curvature_residual(3, m3, lams), zcf = zero_curvature_residual(3, m3f, lams);
  const double eom = pde_residual(EquationId::parse("mkdv_s4_derived"), m3).residual;
  const double eomf = pde_residual(EquationId::parse("mkdv_s4_derived"), m3f).residual;
  const double s3 = pde_residual(with_w("mkdv_s3"), raw(c3, xc, tc)).residual;
  const double s3f = pde_residual(with_w("mkdv_s3"), raw(c3, xf, tf)).residual;
  INFO(zc << " " << zcf << " " << eom << " " << eomf << " " << s3 << " " << s3f);
  CHECK(zcf < 1e-5);
  CHECK(eomf < 1e-5);
  CHECK(s3f < 1e-5);
  CHECK(zc / zcf > 8.0);
  CHECK(eom / eomf > 8.0);
  CHECK(s3 / s3f > 8.0);
  const Trajectory bad = perturbed(m3, 0.1);
  CHECK(zero_curvature_residual(3, bad, {0.0, 1.0}) > 1e-2);
  CHECK(pde_residual(EquationId::parse("mkdv_s4_derived"), bad).residual > 1e-2);
}

TEST_CASE("conservation drift and the wrong-flow control") {
  const SolitonConfig c = tl_config(2);
  const SolitonField f = flow_matched(soliton_field(c, Provenance::ClosedFormTL), flow_matching(c.disp));
  const Grid1 x = Grid1::span(-25, 25, 0.01), t{0.0, 0.05, 21};
  const auto ok = conservation_drift(3, sample_trajectory(f, x, t));
  REQUIRE(ok.size() == 3);
  for (const auto& r : ok) {
    CHECK(r.drift >= 0);
    CHECK(r.drift < 1e-6);
    CHECK_FALSE(r.boundary_leak);
  }
  const auto bad = conservation_drift(3, sample_trajectory(rigid_wrong_flow(f, 1.0), x, t));
  CHECK(bad[2].drift > 1e-3);
}

TEST_CASE("kernel, Burgers and Airy residual plumbing") {
  const DispersionParams p = close_dispersion(1.0, -2.0, {1.0}, {1.0}, 2);
  const LinearKernel k = discrete_kernel(p, {MatC::Ones(1, 1)}, {MatC::Ones(1, 1)});
  KernelSampling s{Grid1::span(0, 1, 0.5), Grid1::span(0, 1, 0.5), 0.0, 1e-2};
  CHECK(pde_residual(EquationId::parse("linear_time(2)"), k, s).residual < 1e-8);
  // a flow-3 equation rejects a flow-2 kernel
  CHECK(pde_residual(EquationId::parse("linear_time(3)"), k, s).residual > 1e-2);

  const Grid1 zeta = Grid1::span(-2, 2, 0.01);
  std::vector<double> y(static_cast<std::size_t>(zeta.n));
  for (int i = 0; i < zeta.n; ++i) y[static_cast<std::size_t>(i)] = std::exp(zeta.at(i));
  CHECK(pde_residual(EquationId::parse("airy_ode"), zeta, y).residual > 1e-2);

  // inviscid Burgers: K = x/(1 + t) b with b² = b solves K_t + K_x K = 0
  SampledSeries ser{Grid1::span(-1, 1, 0.01), Grid1{0, 0.001, 9}, {}};  // fine dt: 1/(1+t) is not polynomial
  const MatC b = MatC::Constant(2, 2, 0.5);
  for (int j = 0; j < ser.t.n; ++j) {
    std::vector<MatC> row;
    for (int i = 0; i < ser.x.n; ++i) row.push_back(ser.x.at(i) / (1 + ser.t.at(j)) * b);
    ser.values.push_back(row);
  }
  CHECK(pde_residual(EquationId::parse("burgers_inviscid"), ser).residual < 1e-10);
  EquationId visc = EquationId::parse("burgers_viscous");
  visc.nu = 0.3;
  CHECK(pde_residual(visc, ser).residual < 1e-10);  // linear in x: no curvature term
}

TEST_CASE("grid mismatch and subsampling") {
  const SolitonConfig c = tl_config(2);
  Trajectory r = raw(c, Grid1::span(-5, 5, 0.01), Grid1{0, 0.01, 9});
  const Trajectory s = subsample(r, 2);
  CHECK(s.slices.size() == 5);
  CHECK(s.x().n == 501);
  r.slices[3].grid.dx *= 2;
  CHECK_THROWS_AS(pde_residual(with_w("nls_s3"), r), GridMismatch);
}
