#pragma once

#include <functional>
#include <vector>

#include "akns/field.hpp"

namespace akns {

/// Mode data of discrete exponential solutions of the bare linear problem.
struct DispersionParams {
  cplx w1, w2;
  cplx wh1{0.0, 0.0}, wh2{0.0, 0.0};  // ŵ1, ŵ2: only the n = 1 flow uses them
  int n = 2;
  std::vector<cplx> kappa, mu, kappah, muh, Lambda, Lambdah;

  int modes() const { return static_cast<int>(kappa.size()); }
  cplx h() const { return w1 - w2; }
  cplx s() const { return -w1 / w2; }
};

/// μ = −w1κ/w2, μ̂ = −w1κ̂/w2 and Λ⁽ⁿ⁾, Λ̂⁽ⁿ⁾ from the dispersion relations;
/// validates Re(μ_β+μ̂_γ) > 0 and Re(κ̂_γ+κ_α) > 0 for all mode pairs.
DispersionParams close_dispersion(cplx w1, cplx w2, const std::vector<cplx>& kappa,
                                  const std::vector<cplx>& kappah, int n, cplx wh1 = 0.0, cplx wh2 = 0.0);

enum class KernelKind { DiscreteExponential, Airy, Heat };

/// f(x,z,t) (N×M) and f̂(x,z,t) (M×N) solving the bare linear problem for flow n.
struct LinearKernel {
  KernelKind kind = KernelKind::DiscreteExponential;
  int N = 1, M = 1;
  int n = 2;
  cplx w1{1.0, 0.0}, w2{-1.0, 0.0}, wh1{0.0, 0.0}, wh2{0.0, 0.0};
  std::function<MatC(double x, double z, double t)> f;
  std::function<MatC(double x, double z, double t)> fh;
};

/// f = Σ b_α e^{Λ_α t − κ_α x − μ_α z},  f̂ = Σ b̂_α e^{Λ̂_α t − μ̂_α x − κ̂_α z}.
LinearKernel discrete_kernel(const DispersionParams& p, const std::vector<MatC>& b, const std::vector<MatC>& bh);

/// Ai on the validated range [-15, 15].
double airy_function(double zeta);

/// Self-similar scale ν(t) of the n = 3 kernels: ν³ = −3(1+s³)t.
double airy_scale(double w1, double w2, double t);

/// Delta-initial-data Airy kernels: f = ν⁻¹Ai((x+sz)/ν)·m, f̂ = ν⁻¹Ai((sx+z)/ν)·m̂.
LinearKernel airy_kernel(double w1, double w2, double t, const MatC& m, const MatC& mh);

/// n = 2 heat kernels: Gaussians in x+sz (diffusivity 1−s²) and sx+z
/// (diffusivity s²−1), each with its own time offset keeping it positive.
LinearKernel heat_kernel(double w1, double w2, double t0, double th0, const MatC& m, const MatC& mh);

/// φ(χ,τ̂) = c0 + Σ a_i·G(χ − c_i, τ̂ + s_i) with G the heat kernel of diffusivity ν̂.
struct HeatSolution {
  struct Bump {
    double amplitude, center, shift;
  };
  double nu_hat = 0.5;
  double c0 = 1.0;
  std::vector<Bump> bumps;

  double phi(double chi, double tau_hat) const;
  double dphi(double chi, double tau_hat) const;

  static HeatSolution gaussian(double nu_hat);
  static HeatSolution twohump(double nu_hat);
};

/// K(χ,τ) = f(χ, κ_b τ)·b with f = −2ν̂ ∂_χ log φ; solves
/// ∂_τK + (∂_χK)K = ν ∂²_χK with ν = ν̂κ_b.
class BurgersSolution {
 public:
  BurgersSolution(HeatSolution phi, MatC b, double kappa_b);

  double nu() const { return phi_.nu_hat * kappa_b_; }
  double kappa_b() const { return kappa_b_; }
  const MatC& b() const { return b_; }
  /// Scalar Cole-Hopf profile in rescaled time τ̂.
  double f(double chi, double tau_hat) const;
  MatC K(double chi, double tau) const;

 private:
  HeatSolution phi_;
  MatC b_;
  double kappa_b_;
};

BurgersSolution cole_hopf_burgers(const HeatSolution& phi, double nu_hat, const MatC& b, double kappa_b);

}  // namespace akns
