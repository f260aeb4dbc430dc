#include "akns/linearsol.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/airy.hpp>

#include "akns/errors.hpp"

namespace akns {

DispersionParams close_dispersion(cplx w1, cplx w2, const std::vector<cplx>& kappa, const std::vector<cplx>& kappah,
                                  int n, cplx wh1, cplx wh2) {
  if (std::abs(w1 - w2) == 0.0 || std::abs(w2) == 0.0) throw InvalidConstraint("need w1 != w2 and w2 != 0");
  if (kappa.size() != kappah.size() || kappa.empty()) throw ShapeMismatch("kappa and kappa.hat need equal, nonzero length");
  if (n < 1) throw UnsupportedOrder("flow index must be >= 1");
  DispersionParams p;
  p.w1 = w1;
  p.w2 = w2;
  p.wh1 = wh1;
  p.wh2 = wh2;
  p.n = n;
  p.kappa = kappa;
  p.kappah = kappah;
  const double sign = n % 2 == 0 ? 1.0 : -1.0;
  bool any = false;
  for (std::size_t a = 0; a < kappa.size(); ++a) {
    const cplx mu = -w1 * kappa[a] / w2, muh = -w1 * kappah[a] / w2;
    p.mu.push_back(mu);
    p.muh.push_back(muh);
    if (n == 1) {
      p.Lambda.push_back(-wh1 * kappa[a] - wh2 * mu);
      p.Lambdah.push_back(-wh2 * muh - wh1 * kappah[a]);
    } else {
      p.Lambda.push_back(sign * std::pow(kappa[a], n) - std::pow(mu, n));
      p.Lambdah.push_back(sign * std::pow(muh, n) - std::pow(kappah[a], n));
    }
    any = any || std::abs(p.Lambda.back()) > 1e-14;
  }
  if (!any) throw DegenerateDispersion("Lambda^(" + std::to_string(n) + ") vanishes for every mode");
  for (std::size_t b = 0; b < kappa.size(); ++b) {
    for (std::size_t g = 0; g < kappa.size(); ++g) {
      if (!((p.mu[b] + p.muh[g]).real() > 0) || !((p.kappah[g] + p.kappa[b]).real() > 0)) {
        throw ConvergenceViolation("need Re(mu+mu.hat) > 0 and Re(kappa.hat+kappa) > 0 for all mode pairs");
      }
    }
  }
  return p;
}

LinearKernel discrete_kernel(const DispersionParams& p, const std::vector<MatC>& b, const std::vector<MatC>& bh) {
  if (static_cast<int>(b.size()) != p.modes() || static_cast<int>(bh.size()) != p.modes()) {
    throw ShapeMismatch("one amplitude pair per mode required");
  }
  const auto N = static_cast<int>(b[0].rows()), M = static_cast<int>(b[0].cols());
  for (std::size_t a = 0; a < b.size(); ++a) {
    if (b[a].rows() != N || b[a].cols() != M || bh[a].rows() != M || bh[a].cols() != N) {
      throw ShapeMismatch("amplitudes must be N x M (b) and M x N (b.hat)");
    }
  }
  LinearKernel k;
  k.kind = KernelKind::DiscreteExponential;
  k.N = N;
  k.M = M;
  k.n = p.n;
  k.w1 = p.w1;
  k.w2 = p.w2;
  k.wh1 = p.wh1;
  k.wh2 = p.wh2;
  k.f = [p, b](double x, double z, double t) {
    MatC out = MatC::Zero(b[0].rows(), b[0].cols());
    for (std::size_t a = 0; a < b.size(); ++a) out += std::exp(p.Lambda[a] * t - p.kappa[a] * x - p.mu[a] * z) * b[a];
    return out;
  };
  k.fh = [p, bh](double x, double z, double t) {
    MatC out = MatC::Zero(bh[0].rows(), bh[0].cols());
    for (std::size_t a = 0; a < bh.size(); ++a) {
      out += std::exp(p.Lambdah[a] * t - p.muh[a] * x - p.kappah[a] * z) * bh[a];
    }
    return out;
  };
  return k;
}

double airy_function(double zeta) {
  if (!(zeta >= -15.0 && zeta <= 15.0)) throw OutOfValidatedRange("Ai evaluated outside [-15, 15]");
  return boost::math::airy_ai(zeta);
}

double airy_scale(double w1, double w2, double t) {
  const double s = -w1 / w2;
  const double c = 1.0 + s * s * s;
  if (std::abs(c) < 1e-14) throw SingularScaling("1 + s^3 = 0: Airy scaling degenerates");
  return std::cbrt(-3.0 * c * t);
}

LinearKernel airy_kernel(double w1, double w2, double t, const MatC& m, const MatC& mh) {
  if (!(t > 0)) throw InvalidConstraint("Airy kernel needs t > 0");
  if (w1 == w2 || w2 == 0.0) throw InvalidConstraint("need w1 != w2 and w2 != 0");
  (void)airy_scale(w1, w2, t);
  if (m.rows() != mh.cols() || m.cols() != mh.rows()) throw ShapeMismatch("m must be N x M and m.hat M x N");
  const double s = -w1 / w2;
  LinearKernel k;
  k.kind = KernelKind::Airy;
  k.N = static_cast<int>(m.rows());
  k.M = static_cast<int>(m.cols());
  k.n = 3;
  k.w1 = w1;
  k.w2 = w2;
  k.f = [=](double x, double z, double tt) -> MatC {
    const double nu = airy_scale(w1, w2, tt);
    return (airy_function((x + s * z) / nu) / nu) * m;
  };
  k.fh = [=](double x, double z, double tt) -> MatC {
    const double nu = airy_scale(w1, w2, tt);
    return (airy_function((s * x + z) / nu) / nu) * mh;
  };
  return k;
}

namespace {

double heat_gauss(double zeta, double diff, double time) {
  const double v = diff * time;
  if (!(v > 0)) throw InvalidConstraint("heat kernel needs positive diffusivity * time");
  return std::exp(-zeta * zeta / (4.0 * v)) / std::sqrt(4.0 * std::numbers::pi * v);
}

}  // namespace

LinearKernel heat_kernel(double w1, double w2, double t0, double th0, const MatC& m, const MatC& mh) {
  if (w1 == w2 || w2 == 0.0) throw InvalidConstraint("need w1 != w2 and w2 != 0");
  const double s = -w1 / w2;
  const double d = 1.0 - s * s;
  if (std::abs(d) < 1e-14) throw DegenerateDispersion("s^2 = 1: n = 2 kernel has no diffusion");
  LinearKernel k;
  k.kind = KernelKind::Heat;
  k.N = static_cast<int>(m.rows());
  k.M = static_cast<int>(m.cols());
  k.n = 2;
  k.w1 = w1;
  k.w2 = w2;
  k.f = [=](double x, double z, double t) -> MatC { return heat_gauss(x + s * z, d, t + t0) * m; };
  k.fh = [=](double x, double z, double t) -> MatC { return heat_gauss(s * x + z, -d, t + th0) * mh; };
  return k;
}

double HeatSolution::phi(double chi, double tau) const {
  double v = c0;
  for (const auto& b : bumps) v += b.amplitude * heat_gauss(chi - b.center, nu_hat, tau + b.shift);
  return v;
}

double HeatSolution::dphi(double chi, double tau) const {
  double v = 0.0;
  for (const auto& b : bumps) {
    const double tt = tau + b.shift;
    v += b.amplitude * heat_gauss(chi - b.center, nu_hat, tt) * (-(chi - b.center) / (2.0 * nu_hat * tt));
  }
  return v;
}

HeatSolution HeatSolution::gaussian(double nu_hat) { return {nu_hat, 1.0, {{1.0, 0.0, 1.0}}}; }

HeatSolution HeatSolution::twohump(double nu_hat) {
  return {nu_hat, 1.0, {{1.5, -2.0, 0.5}, {0.8, 2.0, 0.75}}};
}

BurgersSolution::BurgersSolution(HeatSolution phi, MatC b, double kappa_b)
    : phi_(std::move(phi)), b_(std::move(b)), kappa_b_(kappa_b) {}

double BurgersSolution::f(double chi, double tau_hat) const {
  const double p = phi_.phi(chi, tau_hat);
  if (!(p > 0)) throw NonPositivePhi("phi <= 0 at chi = " + std::to_string(chi));
  return -2.0 * phi_.nu_hat * phi_.dphi(chi, tau_hat) / p;
}

MatC BurgersSolution::K(double chi, double tau) const { return f(chi, kappa_b_ * tau) * b_; }

BurgersSolution cole_hopf_burgers(const HeatSolution& phi, double nu_hat, const MatC& b, double kappa_b) {
  if (!(nu_hat > 0)) throw InvalidConstraint("nu.hat must be positive");
  if (std::abs(phi.nu_hat - nu_hat) > 1e-15 * nu_hat) throw InvalidConstraint("phi solves a heat equation with another nu.hat");
  if (kappa_b == 0.0) throw InvalidConstraint("kappa_b must be nonzero");
  if (b.rows() != b.cols()) throw ShapeMismatch("b must be square");
  if ((b * b - kappa_b * b).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
    throw InvalidConstraint("b^2 != kappa_b * b");
  }
  if (!(phi.c0 > 0)) throw NonPositivePhi("phi constant part must be positive");
  return BurgersSolution(phi, b, kappa_b);
}

}  // namespace akns
