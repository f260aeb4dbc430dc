#include "akns/soliton.hpp"

#include <Eigen/LU>

#include "akns/errors.hpp"
#include "akns/parallel.hpp"

namespace akns {

SolitonConfig make_soliton_config(DispersionParams disp, std::vector<MatC> b, std::vector<MatC> bh,
                                  std::optional<cplx> xi) {
  if (static_cast<int>(b.size()) != disp.modes() || static_cast<int>(bh.size()) != disp.modes()) {
    throw ShapeMismatch("one (b, b.hat) pair per mode required");
  }
  const auto N = b[0].rows(), M = b[0].cols();
  for (std::size_t a = 0; a < b.size(); ++a) {
    if (b[a].rows() != N || b[a].cols() != M || bh[a].rows() != M || bh[a].cols() != N) {
      throw ShapeMismatch("amplitudes must be N x M (b) and M x N (b.hat)");
    }
  }
  if (xi) {
    if (disp.modes() != 1) throw InvalidConstraint("Temperley-Lieb closed form only for L = 1");
    const MatC& p = b[0];
    const MatC& q = bh[0];
    if (sup_norm(p * q * p - *xi * p) > 1e-12 || sup_norm(q * p * q - *xi * q) > 1e-12) {
      throw InvalidConstraint("b b.hat b = xi b and b.hat b b.hat = xi b.hat must hold to 1e-12");
    }
  }
  return SolitonConfig{std::move(disp), std::move(b), std::move(bh), xi};
}

cplx f_coefficient(const DispersionParams& p, int be, int ga, int al, double x, double t, bool hat) {
  const auto B = static_cast<std::size_t>(be), G = static_cast<std::size_t>(ga), A = static_cast<std::size_t>(al);
  if (!hat) {
    const cplx r1 = p.mu[B] + p.muh[G], r2 = p.kappah[G] + p.kappa[A];
    return std::exp((p.Lambdah[G] + p.Lambda[A]) * t - r1 * x - r2 * x) / (r1 * r2);
  }
  const cplx r1 = p.kappah[B] + p.kappa[G], r2 = p.mu[G] + p.muh[A];
  return std::exp((p.Lambda[G] + p.Lambdah[A]) * t - r1 * x - r2 * x) / (r1 * r2);
}

MSystem build_m_matrices(const SolitonConfig& cfg, double x, double t) {
  const DispersionParams& p = cfg.disp;
  const int L = cfg.L(), N = cfg.N(), M = cfg.M();
  MSystem s;
  s.M = MatC::Identity(L * M, L * M);
  s.Mh = MatC::Identity(L * N, L * N);
  s.B.resize(N, L * M);
  s.Bh.resize(M, L * N);
  for (int al = 0; al < L; ++al) {
    const auto a = static_cast<std::size_t>(al);
    s.B.block(0, al * M, N, M) = std::exp(p.Lambda[a] * t - p.kappa[a] * x) * cfg.b[a];
    s.Bh.block(0, al * N, M, N) = std::exp(p.Lambdah[a] * t - p.muh[a] * x) * cfg.bh[a];
    for (int be = 0; be < L; ++be) {
      for (int ga = 0; ga < L; ++ga) {
        const auto g = static_cast<std::size_t>(ga);
        s.M.block(be * M, al * M, M, M) -= f_coefficient(p, be, ga, al, x, t, false) * (cfg.bh[g] * cfg.b[a]);
        s.Mh.block(be * N, al * N, N, N) -= f_coefficient(p, be, ga, al, x, t, true) * (cfg.b[g] * cfg.bh[a]);
      }
    }
  }
  return s;
}

FieldSample solve_fields(const SolitonConfig& cfg, double x, double t) {
  const DispersionParams& p = cfg.disp;
  const MSystem s = build_m_matrices(cfg, x, t);
  Eigen::PartialPivLU<MatC> lu(s.M.transpose()), luh(s.Mh.transpose());
  FieldSample out;
  out.det_m = lu.determinant();
  out.det_mh = luh.determinant();
  if (std::abs(out.det_m) < 1e-12 || std::abs(out.det_mh) < 1e-12) {
    throw SingularM("det M = " + std::to_string(std::abs(out.det_m)) +
                    ", det M.hat = " + std::to_string(std::abs(out.det_mh)));
  }
  out.cond = 1.0 / std::min(lu.rcond(), luh.rcond());
  const MatC Lrow = lu.solve(-s.B.transpose()).transpose();     // N × LM
  const MatC Lhrow = luh.solve(-s.Bh.transpose()).transpose();  // M × LN
  const int N = cfg.N(), M = cfg.M();
  MatC Bxx = MatC::Zero(N, M), Cxx = MatC::Zero(M, N);
  for (int a = 0; a < cfg.L(); ++a) {
    const auto k = static_cast<std::size_t>(a);
    Bxx += std::exp(-p.mu[k] * x) * Lrow.block(0, a * M, N, M);
    Cxx += std::exp(-p.kappah[k] * x) * Lhrow.block(0, a * N, M, N);
  }
  out.uh = p.h() * Bxx;
  out.u = -p.h() * Cxx;
  return out;
}

namespace {

cplx tl_denominator(const SolitonConfig& cfg, double x, double t) {
  if (!cfg.xi || cfg.L() != 1) throw InvalidConstraint("closed form requires L = 1 with Temperley-Lieb xi");
  const cplx d = 1.0 - *cfg.xi * f_coefficient(cfg.disp, 0, 0, 0, x, t, false);
  if (std::abs(d) < 1e-12) {
    throw PoleAt("1 - xi f vanishes at (x, t) = (" + std::to_string(x) + ", " + std::to_string(t) + ")");
  }
  return d;
}

}  // namespace

std::pair<MatC, MatC> closed_form_one_soliton(const SolitonConfig& cfg, double x, double z, double t) {
  const cplx d = tl_denominator(cfg, x, t);
  const DispersionParams& p = cfg.disp;
  const MatC B = -(std::exp(p.Lambda[0] * t - p.kappa[0] * x - p.mu[0] * z) / d) * cfg.b[0];
  const MatC C = -(std::exp(p.Lambdah[0] * t - p.muh[0] * x - p.kappah[0] * z) / d) * cfg.bh[0];
  return {B, C};
}

KernelBlocks closed_form_kernels(const SolitonConfig& cfg, double x, double z, double t) {
  const cplx d = tl_denominator(cfg, x, t);
  const DispersionParams& p = cfg.disp;
  auto [B, C] = closed_form_one_soliton(cfg, x, z, t);
  const cplx lt = (p.Lambda[0] + p.Lambdah[0]) * t;
  const cplx ea = std::exp(lt - p.kappa[0] * x - p.kappah[0] * z - (p.mu[0] + p.muh[0]) * x) /
                  ((p.mu[0] + p.muh[0]) * d);
  const cplx ed = std::exp(lt - p.muh[0] * x - p.mu[0] * z - (p.kappah[0] + p.kappa[0]) * x) /
                  ((p.kappah[0] + p.kappa[0]) * d);
  return {ea * (cfg.b[0] * cfg.bh[0]), std::move(B), std::move(C), ed * (cfg.bh[0] * cfg.b[0])};
}

SolitonConfig translate(const SolitonConfig& cfg, double delta) {
  SolitonConfig out = cfg;
  const DispersionParams& p = cfg.disp;
  for (std::size_t a = 0; a < cfg.b.size(); ++a) {
    out.b[a] *= std::exp((p.kappa[a] + p.mu[a]) * delta);
    out.bh[a] *= std::exp((p.muh[a] + p.kappah[a]) * delta);
  }
  // ξ scales with the amplitudes when Temperley-Lieb data are translated.
  if (out.xi) {
    const cplx s = std::exp((p.kappa[0] + p.mu[0] + p.muh[0] + p.kappah[0]) * delta);
    out.xi = *out.xi * s;
  }
  return out;
}

SolitonField soliton_field(const SolitonConfig& cfg, Provenance prov) {
  SolitonField f;
  f.provenance = prov;
  f.N = cfg.N();
  f.M = cfg.M();
  if (prov == Provenance::ClosedFormTL) {
    (void)tl_denominator(cfg, 0.0, 0.0);
    f.eval = [cfg](double x, double t) {
      auto [B, C] = closed_form_one_soliton(cfg, x, x, t);
      const cplx h = cfg.disp.h();
      return std::pair<MatC, MatC>{-h * C, h * B};
    };
  } else {
    f.eval = [cfg](double x, double t) {
      FieldSample s = solve_fields(cfg, x, t);
      return std::pair<MatC, MatC>{std::move(s.u), std::move(s.uh)};
    };
  }
  return f;
}

FlowMatch flow_matching(const DispersionParams& p) {
  const cplx w1 = p.w1, w2 = p.w2, h = p.h();
  cplx scale;
  switch (p.n) {
    case 1: scale = (w1 * p.wh2 - w2 * p.wh1) / h; break;
    case 2: scale = -(w1 + w2) / h; break;
    case 3: scale = (w1 * w1 + w2 * w2 + w1 * w2) / (h * h); break;
    default: throw UnsupportedOrder("flow matching defined for n = 1, 2, 3");
  }
  const cplx uh = 1.0 / (w1 * w2);
  if (std::abs(scale.imag()) > 1e-14 || std::abs(uh.imag()) > 1e-14 || std::abs(scale) < 1e-14) {
    throw InvalidConstraint("flow matching needs real parameters and a nonzero time scale");
  }
  return {scale.real(), uh.real()};
}

SolitonField flow_matched(const SolitonField& f, const FlowMatch& m) {
  SolitonField g = f;
  g.eval = [inner = f.eval, m](double x, double tau) {
    auto [u, uh] = inner(x, tau / m.time_scale);
    return std::pair<MatC, MatC>{std::move(u), m.uh_scale * uh};
  };
  return g;
}

Trajectory sample_trajectory(const SolitonField& f, const Grid1& x, const Grid1& t) {
  Trajectory tr;
  tr.t = t;
  tr.slices.assign(static_cast<std::size_t>(t.n), GridField::zeros(x, f.N, f.M));
  parallel_for(static_cast<std::size_t>(x.n) * static_cast<std::size_t>(t.n), [&](std::size_t k) {
    const std::size_t j = k / static_cast<std::size_t>(x.n), i = k % static_cast<std::size_t>(x.n);
    auto [u, uh] = f.eval(x.at(static_cast<int>(i)), t.at(static_cast<int>(j)));
    tr.slices[j].u[i] = std::move(u);
    tr.slices[j].uh[i] = std::move(uh);
  });
  return tr;
}

}  // namespace akns
