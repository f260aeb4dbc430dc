#include "akns/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <regex>

#include "akns/hierarchy.hpp"
#include "akns/ncalg.hpp"
#include "akns/parallel.hpp"
#include "akns/riccati.hpp"

namespace akns {

namespace {

struct EqName {
  EqKind kind;
  const char* name;
};

constexpr EqName kNames[] = {
    {EqKind::LinearSpace, "linear_space"},     {EqKind::LinearTime, "linear_time"},
    {EqKind::TransportS3, "transport_s3"},     {EqKind::NlsS3, "nls_s3"},
    {EqKind::MkdvS3, "mkdv_s3"},               {EqKind::TransportS4, "transport_s4"},
    {EqKind::NlsS4, "nls_s4"},                 {EqKind::MkdvS4Derived, "mkdv_s4_derived"},
    {EqKind::BurgersViscous, "burgers_viscous"}, {EqKind::BurgersInviscid, "burgers_inviscid"},
    {EqKind::AiryOde, "airy_ode"},
};

void require(const std::optional<double>& v, const char* what, const EquationId& eq) {
  if (!v) throw ConfigError(eq.name() + ": missing parameter " + what);
}

using Pair = std::pair<MatC, MatC>;
using FieldFn = std::function<Pair(const MatC& ut, const MatC& uht, const FieldJet& jet, int i)>;

struct FieldEquation {
  int x_order;
  FieldFn fn;
};

FieldEquation field_equation(const EquationId& eq) {
  auto D = [](const FieldJet& j, bool hat, int k, int i) { return j.derivative(hat, k, i); };
  switch (eq.kind) {
    case EqKind::TransportS3: {
      const double w1 = *eq.w1, w2 = *eq.w2, h = w1 - w2;
      const double c = (w1 * *eq.wh2 - w2 * *eq.wh1) / h;
      return {1, [=](const MatC& ut, const MatC& uht, const FieldJet& j, int i) {
                return Pair{ut - c * D(j, false, 1, i), uht - c * D(j, true, 1, i)};
              }};
    }
    case EqKind::NlsS3: {
      const double w1 = *eq.w1, w2 = *eq.w2, h = w1 - w2;
      const double a = (w1 + w2) / h, b = 2 * (w1 + w2) / (h * w1 * w2);
      return {2, [=](const MatC& ut, const MatC& uht, const FieldJet& j, int i) {
                const MatC u = D(j, false, 0, i), uh = D(j, true, 0, i);
                return Pair{ut - a * D(j, false, 2, i) + b * u * uh * u, -uht - a * D(j, true, 2, i) + b * uh * u * uh};
              }};
    }
    case EqKind::MkdvS3: {
      const double w1 = *eq.w1, w2 = *eq.w2, h = w1 - w2;
      const double E = w1 * w1 + w2 * w2 + w1 * w2;
      const double a = E / (h * h), b = 3 * E / (h * h * w1 * w2);
      return {3, [=](const MatC& ut, const MatC& uht, const FieldJet& j, int i) {
                const MatC u = D(j, false, 0, i), uh = D(j, true, 0, i);
                const MatC ux = D(j, false, 1, i), uhx = D(j, true, 1, i);
                return Pair{ut - a * D(j, false, 3, i) + b * (u * uh * ux + ux * uh * u),
                            uht - a * D(j, true, 3, i) + b * (uh * u * uhx + uhx * u * uh)};
              }};
    }
    case EqKind::TransportS4:
    case EqKind::NlsS4:
    case EqKind::MkdvS4Derived: {
      const int n = eq.kind == EqKind::TransportS4 ? 1 : eq.kind == EqKind::NlsS4 ? 2 : 3;
      auto eom = std::make_shared<EquationsOfMotion>(derive_eom(n));
      return {n, [eom](const MatC& ut, const MatC& uht, const FieldJet& j, int i) {
                return Pair{ut - nc_eval(eom->dt_u, j, i), uht - nc_eval(eom->dt_uh, j, i)};
              }};
    }
    default:
      throw ConfigError(eq.name() + " is not a field equation on (u, û) trajectories");
  }
}

struct Sup {
  double value;
  ResidualMap map;
};

Sup field_sup(const FieldEquation& e, const Trajectory& traj, const FdScheme& fd, bool keep_map) {
  traj.validate();
  const FdOperator Dt(traj.t.n, traj.t.dx, 1, fd);
  std::vector<FieldJet> jets;
  jets.reserve(traj.slices.size());
  for (const auto& s : traj.slices) jets.emplace_back(s, fd);
  const auto [x0, x1] = jets.front().valid_range(e.x_order);
  if (x1 < x0) throw StencilOutOfRange("x grid too small for the equation's derivatives");
  ResidualMap map{Dt.first_valid(), x0, Dt.last_valid() - Dt.first_valid() + 1, x1 - x0 + 1, {}};
  map.values.assign(static_cast<std::size_t>(map.nt) * map.nx, 0.0);
  parallel_for(map.values.size(), [&](std::size_t p) {
    const int j = map.t_first + static_cast<int>(p) / map.nx, i = map.x_first + static_cast<int>(p) % map.nx;
    const MatC ut = Dt.apply(j, [&](int k) -> const MatC& { return traj.slices[k].u[i]; });
    const MatC uht = Dt.apply(j, [&](int k) -> const MatC& { return traj.slices[k].uh[i]; });
    const auto [ru, ruh] = e.fn(ut, uht, jets[j], i);
    map.values[p] = std::max(sup_norm(ru), sup_norm(ruh));
  });
  const double sup = map.values.empty() ? 0.0 : *std::max_element(map.values.begin(), map.values.end());
  if (!keep_map) map.values.clear();
  return {sup, std::move(map)};
}

Verdict make_verdict(const EquationId& eq, const VerifyOptions& opt, Sup s, std::optional<double> floor) {
  Verdict v;
  v.equation = eq.name();
  v.residual = s.value;
  v.fd_floor = floor;
  v.tolerance = opt.tolerance;
  v.pass = s.value <= opt.tolerance;
  v.map = std::move(s.map);
  return v;
}

// Centered weights for d-th derivative of step h.
std::vector<double> centered(int d, int order, double h, int& r) {
  r = FdScheme{order, Boundary::ShrinkDomain}.half_width(d);
  std::vector<double> nodes;
  for (int k = -r; k <= r; ++k) nodes.push_back(k * h);
  return fornberg_weights(0.0, nodes, d);
}

using KFn = std::function<MatC(double, double, double)>;

MatC kderiv(const KFn& f, int axis, int d, int order, double h, double x, double z, double t) {
  if (d == 0) return f(x, z, t);
  int r = 0;
  const std::vector<double> w = centered(d, order, h, r);
  MatC acc;
  for (int k = -r; k <= r; ++k) {
    const double s = k * h;
    MatC v = axis == 0 ? f(x + s, z, t) : axis == 1 ? f(x, z + s, t) : f(x, z, t + s);
    if (k == -r)
      acc = w[0] * v;
    else
      acc += w[static_cast<std::size_t>(k + r)] * v;
  }
  return acc;
}

Sup kernel_sup(const EquationId& eq, const LinearKernel& k, const KernelSampling& s, int order, double h, bool keep_map) {
  ResidualMap map{0, 0, s.x.n, s.z.n, {}};
  map.values.assign(static_cast<std::size_t>(s.x.n) * s.z.n, 0.0);
  parallel_for(map.values.size(), [&](std::size_t p) {
    const double x = s.x.at(static_cast<int>(p) / s.z.n), z = s.z.at(static_cast<int>(p) % s.z.n);
    double worst = 0;
    for (int side = 0; side < 2; ++side) {
      const KFn& f = side == 0 ? k.f : k.fh;
      auto D = [&](int axis, int d) { return kderiv(f, axis, d, order, h, x, z, s.t); };
      MatC r;
      if (eq.kind == EqKind::LinearSpace) {
        const double a = side == 0 ? *eq.w1 : *eq.w2, b = side == 0 ? *eq.w2 : *eq.w1;
        r = a * D(0, 1) + b * D(1, 1);
      } else if (eq.n == 1) {
        const double a = side == 0 ? *eq.wh1 : *eq.wh2, b = side == 0 ? *eq.wh2 : *eq.wh1;
        r = D(2, 1) - a * D(0, 1) - b * D(1, 1);
      } else {
        const double sign = eq.n % 2 == 0 ? 1.0 : -1.0;
        r = D(2, 1) - D(0, eq.n) + sign * D(1, eq.n);
      }
      worst = std::max(worst, sup_norm(r));
    }
    map.values[p] = worst;
  });
  const double sup = *std::max_element(map.values.begin(), map.values.end());
  if (!keep_map) map.values.clear();
  return {sup, std::move(map)};
}

Sup burgers_sup(const SampledSeries& k, double nu, const FdScheme& fd, bool keep_map) {
  if (static_cast<int>(k.values.size()) != k.t.n) throw GridMismatch("series length differs from its t grid");
  for (const auto& row : k.values)
    if (static_cast<int>(row.size()) != k.x.n) throw GridMismatch("series row length differs from its x grid");
  const FdOperator Dt(k.t.n, k.t.dx, 1, fd), D1(k.x.n, k.x.dx, 1, fd), D2(k.x.n, k.x.dx, 2, fd);
  const int x0 = std::max(D1.first_valid(), D2.first_valid()), x1 = std::min(D1.last_valid(), D2.last_valid());
  ResidualMap map{Dt.first_valid(), x0, Dt.last_valid() - Dt.first_valid() + 1, x1 - x0 + 1, {}};
  map.values.assign(static_cast<std::size_t>(map.nt) * map.nx, 0.0);
  parallel_for(map.values.size(), [&](std::size_t p) {
    const int j = map.t_first + static_cast<int>(p) / map.nx, i = map.x_first + static_cast<int>(p) % map.nx;
    const auto& row = k.values[j];
    const MatC kt = Dt.apply(j, [&](int q) -> const MatC& { return k.values[q][i]; });
    const MatC kx = D1.apply(i, [&](int q) -> const MatC& { return row[q]; });
    const MatC kxx = D2.apply(i, [&](int q) -> const MatC& { return row[q]; });
    map.values[p] = sup_norm(kt + kx * row[i] - nu * kxx);
  });
  const double sup = *std::max_element(map.values.begin(), map.values.end());
  if (!keep_map) map.values.clear();
  return {sup, std::move(map)};
}

Sup airy_sup(const Grid1& zeta, const std::vector<double>& y, const FdScheme& fd, bool keep_map) {
  if (static_cast<int>(y.size()) != zeta.n) throw GridMismatch("sample count differs from the ζ grid");
  const FdOperator D2(zeta.n, zeta.dx, 2, fd);
  ResidualMap map{0, D2.first_valid(), 1, D2.last_valid() - D2.first_valid() + 1, {}};
  double sup = 0;
  for (int i = D2.first_valid(); i <= D2.last_valid(); ++i) {
    const double r = std::abs(D2.apply(i, [&](int q) { return y[q]; }) - zeta.at(i) * y[i]);
    sup = std::max(sup, r);
    if (keep_map) map.values.push_back(r);
  }
  return {sup, std::move(map)};
}

template <class F>
std::optional<double> richardson(int order, F&& coarse) {
  try {
    return coarse() / std::pow(2.0, order);
  } catch (const StencilOutOfRange&) {
    return std::nullopt;
  }
}

}  // namespace

void EquationId::validate() const {
  auto nonzero_h = [&] {
    require(w1, "w1", *this);
    require(w2, "w2", *this);
    if (std::abs(*w1 - *w2) < 1e-300) throw ConfigError(name() + ": h = w1 − w2 vanishes");
  };
  switch (kind) {
    case EqKind::LinearSpace:
      require(w1, "w1", *this);
      require(w2, "w2", *this);
      break;
    case EqKind::LinearTime:
      if (n < 1) throw ConfigError("linear_time needs a flow index n ≥ 1");
      if (n == 1) {
        require(wh1, "wh1", *this);
        require(wh2, "wh2", *this);
      }
      break;
    case EqKind::TransportS3:
      nonzero_h();
      require(wh1, "wh1", *this);
      require(wh2, "wh2", *this);
      break;
    case EqKind::NlsS3:
    case EqKind::MkdvS3:
      nonzero_h();
      if (*w1 == 0 || *w2 == 0) throw ConfigError(name() + ": w1 and w2 must be nonzero");
      break;
    case EqKind::BurgersViscous:
      require(nu, "nu", *this);
      break;
    default:
      break;
  }
}

std::string EquationId::name() const {
  for (const auto& e : kNames)
    if (e.kind == kind) return kind == EqKind::LinearTime ? "linear_time(" + std::to_string(n) + ")" : e.name;
  return "unknown";
}

EquationId EquationId::parse(const std::string& s) {
  static const std::regex lt(R"(linear_time\((\d+)\))");
  std::smatch m;
  if (std::regex_match(s, m, lt)) return EquationId{EqKind::LinearTime, std::stoi(m[1]), {}, {}, {}, {}, {}};
  for (const auto& e : kNames)
    if (s == e.name) return EquationId{e.kind, 0, {}, {}, {}, {}, {}};
  throw ConfigError("unknown equation id '" + s + "'");
}

Verdict pde_residual(const EquationId& eq, const Trajectory& traj, const VerifyOptions& opt) {
  eq.validate();
  const FieldEquation e = field_equation(eq);
  Sup s = field_sup(e, traj, opt.fd, opt.keep_map);
  std::optional<double> floor;
  if (opt.estimate_floor)
    floor = richardson(opt.fd.order, [&] { return field_sup(e, subsample(traj, 2), opt.fd, false).value; });
  return make_verdict(eq, opt, std::move(s), floor);
}

Verdict pde_residual(const EquationId& eq_in, const LinearKernel& k, const KernelSampling& s, const VerifyOptions& opt) {
  EquationId eq = eq_in;
  if (eq.kind != EqKind::LinearSpace && eq.kind != EqKind::LinearTime)
    throw ConfigError(eq.name() + " is not a kernel equation");
  auto fill = [](std::optional<double>& v, cplx c) {
    if (!v && std::abs(c.imag()) == 0.0) v = c.real();
  };
  fill(eq.w1, k.w1);
  fill(eq.w2, k.w2);
  fill(eq.wh1, k.wh1);
  fill(eq.wh2, k.wh2);
  eq.validate();
  Sup sup = kernel_sup(eq, k, s, opt.fd.order, s.h, opt.keep_map);
  std::optional<double> floor;
  if (opt.estimate_floor) floor = kernel_sup(eq, k, s, opt.fd.order, 2 * s.h, false).value / std::pow(2.0, opt.fd.order);
  return make_verdict(eq, opt, std::move(sup), floor);
}

SampledSeries sample_burgers(const BurgersSolution& b, const Grid1& chi, const Grid1& tau) {
  SampledSeries out{chi, tau, std::vector<std::vector<MatC>>(tau.n, std::vector<MatC>(chi.n))};
  parallel_for(static_cast<std::size_t>(tau.n), [&](std::size_t j) {
    for (int i = 0; i < chi.n; ++i) out.values[j][i] = b.K(chi.at(i), tau.at(static_cast<int>(j)));
  });
  return out;
}

Verdict pde_residual(const EquationId& eq, const SampledSeries& k, const VerifyOptions& opt) {
  eq.validate();
  if (eq.kind != EqKind::BurgersViscous && eq.kind != EqKind::BurgersInviscid)
    throw ConfigError(eq.name() + " is not a Burgers equation");
  const double nu = eq.kind == EqKind::BurgersViscous ? *eq.nu : 0.0;
  Sup s = burgers_sup(k, nu, opt.fd, opt.keep_map);
  std::optional<double> floor;
  if (opt.estimate_floor)
    floor = richardson(opt.fd.order, [&] {
      SampledSeries c{k.x.subsample(2), k.t.subsample(2), {}};
      for (int j = 0; j < k.t.n; j += 2) {
        std::vector<MatC> row;
        for (int i = 0; i < k.x.n; i += 2) row.push_back(k.values[j][i]);
        c.values.push_back(std::move(row));
      }
      return burgers_sup(c, nu, opt.fd, false).value;
    });
  return make_verdict(eq, opt, std::move(s), floor);
}

Verdict pde_residual(const EquationId& eq, const Grid1& zeta, const std::vector<double>& y, const VerifyOptions& opt) {
  if (eq.kind != EqKind::AiryOde) throw ConfigError(eq.name() + " is not the Airy equation");
  Sup s = airy_sup(zeta, y, opt.fd, opt.keep_map);
  std::optional<double> floor;
  if (opt.estimate_floor)
    floor = richardson(opt.fd.order, [&] {
      std::vector<double> c;
      for (int i = 0; i < zeta.n; i += 2) c.push_back(y[i]);
      return airy_sup(zeta.subsample(2), c, opt.fd, false).value;
    });
  return make_verdict(eq, opt, std::move(s), floor);
}

double zero_curvature_residual(int n, const Trajectory& traj, const std::vector<cplx>& lambdas, const FdScheme& fd) {
  traj.validate();
  const LaxComponent V = time_component(n);
  const LaxComponent dV = derive(V);
  const int N = traj.N(), M = traj.M(), L = N + M;
  const FdOperator Dt(traj.t.n, traj.t.dx, 1, fd);
  std::vector<FieldJet> jets;
  for (const auto& s : traj.slices) jets.emplace_back(s, fd);
  const auto [x0, x1] = jets.front().valid_range(std::max(n, 1));
  const int nx = x1 - x0 + 1, nt = Dt.last_valid() - Dt.first_valid() + 1;
  if (nx <= 0 || nt <= 0) throw StencilOutOfRange("trajectory too small for the zero-curvature stencils");

  auto eval_block = [&](const Block& b, const FieldJet& j, int i) {
    MatC m(L, L);
    m.topLeftCorner(N, N) = nc_eval(b.a, j, i);
    m.topRightCorner(N, M) = nc_eval(b.b, j, i);
    m.bottomLeftCorner(M, N) = nc_eval(b.c, j, i);
    m.bottomRightCorner(M, M) = nc_eval(b.d, j, i);
    return m;
  };
  std::vector<double> part(static_cast<std::size_t>(nt) * nx, 0.0);
  parallel_for(part.size(), [&](std::size_t p) {
    const int j = Dt.first_valid() + static_cast<int>(p) / nx, i = x0 + static_cast<int>(p) % nx;
    const FieldJet& jet = jets[j];
    std::map<int, MatC> v, dv;
    for (const auto& [k, b] : V.terms) v[k] = eval_block(b, jet, i);
    for (const auto& [k, b] : dV.terms) dv[k] = eval_block(b, jet, i);
    MatC Q = MatC::Zero(L, L), dtU = MatC::Zero(L, L), Sig = MatC::Identity(L, L);
    Sig.bottomRightCorner(M, M) *= -1.0;
    Q.topRightCorner(N, M) = traj.slices[j].uh[i];
    Q.bottomLeftCorner(M, N) = traj.slices[j].u[i];
    dtU.topRightCorner(N, M) = Dt.apply(j, [&](int q) -> const MatC& { return traj.slices[q].uh[i]; });
    dtU.bottomLeftCorner(M, N) = Dt.apply(j, [&](int q) -> const MatC& { return traj.slices[q].u[i]; });
    double worst = 0;
    for (const cplx lam : lambdas) {
      const MatC U = 0.5 * lam * Sig + Q;
      MatC Vl = MatC::Zero(L, L), dVl = MatC::Zero(L, L);
      for (const auto& [k, m] : v) Vl += std::pow(lam, k) * m;
      for (const auto& [k, m] : dv) dVl += std::pow(lam, k) * m;
      worst = std::max(worst, sup_norm(dtU - dVl + U * Vl - Vl * U));
    }
    part[p] = worst;
  });
  return *std::max_element(part.begin(), part.end());
}

std::vector<ChargeReport> conservation_drift(int kmax, const Trajectory& traj, const FdScheme& fd) {
  traj.validate();
  std::vector<ChargeReport> out;
  for (int k = 1; k <= kmax; ++k) {
    ChargeReport r;
    r.k = k;
    r.values.resize(traj.slices.size());
    std::vector<char> leak(traj.slices.size(), 0);
    parallel_for(traj.slices.size(), [&](std::size_t j) {
      const ChargeValue c = evaluate_charge(k, traj.slices[j], fd);
      r.values[j] = c.value;
      leak[j] = c.boundary_leak;
    });
    r.boundary_leak = std::any_of(leak.begin(), leak.end(), [](char c) { return c != 0; });
    const cplx ref = r.values.front();
    double dev = 0;
    for (const cplx v : r.values) dev = std::max(dev, std::abs(v - ref));
    r.relative = std::abs(ref) > 1e-300;
    r.drift = r.relative ? dev / std::abs(ref) : dev;
    out.push_back(std::move(r));
  }
  return out;
}

Trajectory subsample(const Trajectory& traj, int k) {
  Trajectory out;
  out.t = traj.t.subsample(k);
  for (int j = 0; j < traj.t.n; j += k) {
    const GridField& s = traj.slices[j];
    GridField f{s.grid.subsample(k), s.N, s.M, {}, {}};
    for (int i = 0; i < s.grid.n; i += k) {
      f.u.push_back(s.u[i]);
      f.uh.push_back(s.uh[i]);
    }
    out.slices.push_back(std::move(f));
  }
  return out;
}

Trajectory perturbed(const Trajectory& traj, double eps) {
  Trajectory out = traj;
  for (auto& s : out.slices)
    for (int i = 0; i < s.grid.n; ++i) {
      const double m = 1.0 + eps * std::sin(s.grid.at(i));
      s.u[i] *= m;
      s.uh[i] *= m;
    }
  return out;
}

SolitonField rigid_wrong_flow(const SolitonField& f, double velocity) {
  SolitonField out = f;
  auto inner = f.eval;
  out.eval = [inner, velocity](double x, double t) {
    return std::pair<MatC, MatC>{inner(x - velocity * t, 0.0).first, inner(x + velocity * t, 0.0).second};
  };
  return out;
}

}  // namespace akns
