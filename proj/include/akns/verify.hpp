#pragma once

#include <optional>
#include <string>
#include <vector>

#include "akns/field.hpp"
#include "akns/linearsol.hpp"
#include "akns/soliton.hpp"

namespace akns {

enum class EqKind {
  LinearSpace,
  LinearTime,
  TransportS3,
  NlsS3,
  MkdvS3,
  TransportS4,
  NlsS4,
  MkdvS4Derived,
  BurgersViscous,
  BurgersInviscid,
  AiryOde,
};

/// Equation plus the parameters it needs; validate() enforces completeness.
struct EquationId {
  EqKind kind = EqKind::NlsS4;
  int n = 0;  // flow index for linear_time
  std::optional<double> w1, w2, wh1, wh2, nu;

  void validate() const;
  std::string name() const;
  /// "nls_s3", "linear_time(3)", ... (ConfigError on unknown names).
  static EquationId parse(const std::string& name);
};

struct ResidualMap {
  int t_first = 0, x_first = 0, nt = 0, nx = 0;
  std::vector<double> values;  // row-major [t][x]
};

struct Verdict {
  std::string equation;
  double residual = 0;
  std::optional<double> fd_floor;  // Richardson estimate R(2Δ)/2^order
  double tolerance = 0;
  bool pass = false;
  ResidualMap map;
};

struct VerifyOptions {
  FdScheme fd{};
  double tolerance = 1e-6;
  bool keep_map = false;
  bool estimate_floor = true;
};

/// Field equations (transport/nls/mkdv, explicit or derived forms) on a
/// space-time trajectory; sup over interior points.
Verdict pde_residual(const EquationId& eq, const Trajectory& traj, const VerifyOptions& opt = {});

/// Sampling box for kernel equations: x × z points, derivatives by local
/// stencils of step h around each point at time t.
struct KernelSampling {
  Grid1 x, z;
  double t = 0.0;
  double h = 1e-2;
};

/// linear_space / linear_time(n) residual of f and f̂.
Verdict pde_residual(const EquationId& eq, const LinearKernel& k, const KernelSampling& s,
                     const VerifyOptions& opt = {});

/// Matrix series on a χ × τ grid, values[t][x].
struct SampledSeries {
  Grid1 x, t;
  std::vector<std::vector<MatC>> values;
};

SampledSeries sample_burgers(const BurgersSolution& b, const Grid1& chi, const Grid1& tau);

/// burgers_viscous (ν from the EquationId) / burgers_inviscid.
Verdict pde_residual(const EquationId& eq, const SampledSeries& k, const VerifyOptions& opt = {});

/// airy_ode: y'' − ζy on samples over a ζ grid.
Verdict pde_residual(const EquationId& eq, const Grid1& zeta, const std::vector<double>& y,
                     const VerifyOptions& opt = {});

/// max over λ of sup ‖∂ₜU − ∂ₓV⁽ⁿ⁾ + [U, V⁽ⁿ⁾]‖ on the interior.
double zero_curvature_residual(int n, const Trajectory& traj, const std::vector<cplx>& lambdas,
                               const FdScheme& fd = {});

struct ChargeReport {
  int k = 0;
  std::vector<cplx> values;
  double drift = 0;  // max_t |𝓘(t) − 𝓘(t₀)| / |𝓘(t₀)| (absolute when 𝓘(t₀) = 0)
  bool relative = true;
  bool boundary_leak = false;
};

std::vector<ChargeReport> conservation_drift(int kmax, const Trajectory& traj, const FdScheme& fd = {});

/// Every k-th point in x and t.
Trajectory subsample(const Trajectory& traj, int k);

/// u, û multiplied by (1 + eps·sin x): a smooth non-solution.
Trajectory perturbed(const Trajectory& traj, double eps);

/// Initial data moved rigidly, u(x − vt), û(x + vt): not a flow of the hierarchy.
SolitonField rigid_wrong_flow(const SolitonField& f, double velocity);

}  // namespace akns
