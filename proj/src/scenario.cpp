#include "akns/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "akns/glm.hpp"
#include "akns/hierarchy.hpp"
#include "akns/linearsol.hpp"
#include "akns/riccati.hpp"
#include "akns/soliton.hpp"
#include "akns/verify.hpp"

namespace akns {

namespace {

struct Bundled {
  const char* name;
  const char* text;
};

constexpr Bundled kBundled[] = {
#include "akns_bundled_scenarios.inc"
};

// ---------------------------------------------------------------- config access

class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *j_; }
  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node at(const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    if (!j_->contains(key)) throw ConfigError(path_ + "." + key + ": missing required field");
    return Node((*j_)[key], path_ + "." + key);
  }
  Node at(std::size_t i) const { return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]"); }

  double num() const {
    if (!j_->is_number()) fail("expected a number");
    return j_->get<double>();
  }
  double num(const std::string& key, double dflt) const { return has(key) ? at(key).num() : dflt; }
  double positive(const std::string& key) const {
    const double v = at(key).num();
    if (!(v > 0)) at(key).fail("must be positive");
    return v;
  }
  int integer() const {
    if (!j_->is_number_integer()) fail("expected an integer");
    return j_->get<int>();
  }
  int integer(const std::string& key, int dflt) const { return has(key) ? at(key).integer() : dflt; }
  std::string str() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }
  std::string str(const std::string& key, const std::string& dflt) const { return has(key) ? at(key).str() : dflt; }
  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  cplx complex() const {
    if (j_->is_number()) return {j_->get<double>(), 0.0};
    if (j_->is_array() && j_->size() == 2 && (*j_)[0].is_number() && (*j_)[1].is_number())
      return {(*j_)[0].get<double>(), (*j_)[1].get<double>()};
    fail("expected a number or a [re, im] pair");
  }
  std::vector<cplx> cvec() const {
    std::vector<cplx> v;
    for (std::size_t i = 0; i < size(); ++i) v.push_back(at(i).complex());
    return v;
  }
  MatC matrix() const {
    const std::size_t r = size();
    if (r == 0) fail("empty matrix");
    const std::size_t c = at(0).size();
    MatC m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      if (at(i).size() != c) at(i).fail("ragged matrix row");
      for (std::size_t k = 0; k < c; ++k) m(i, k) = at(i).at(k).complex();
    }
    return m;
  }
  // One matrix per mode.
  std::vector<MatC> matrices() const {
    std::vector<MatC> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).matrix());
    if (out.empty()) fail("expected at least one matrix");
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + ": " + what); }

 private:
  const json* j_;
  std::string path_;
};

// Runs a parameter-to-object conversion, turning library precondition errors into config errors.
template <class F>
auto guarded(const Node& n, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(n.path() + ": " + e.kind() + ": " + e.what());
  }
}

Grid1 parse_span(const Node& n) {
  const double lo = n.at("min").num(), hi = n.at("max").num(), dx = n.positive("dx");
  if (!(hi > lo)) n.fail("max must exceed min");
  return Grid1::span(lo, hi, dx);
}

Grid1 parse_times(const Node& n) {
  const int count = n.at("count").integer();
  if (count < 1) n.at("count").fail("must be at least 1");
  return Grid1{n.num("start", 0.0), n.positive("dt"), count};
}

FdScheme parse_fd(const Node& p) {
  const int order = p.integer("fd_order", 4);
  if (order != 2 && order != 4) p.at("fd_order").fail("supported orders are 2 and 4");
  return FdScheme{order, Boundary::ShrinkDomain};
}

struct SolitonParams {
  SolitonConfig cfg;
  Provenance provenance;
};

SolitonParams parse_soliton(const Node& n) {
  const double w1 = n.at("w1").num(), w2 = n.at("w2").num();
  const int flow = n.integer("n", 2);
  const std::vector<cplx> kappa = n.at("kappa").cvec(), kappah = n.at("kappah").cvec();
  const cplx wh1 = n.has("wh1") ? n.at("wh1").complex() : cplx{0.0, 0.0};
  const cplx wh2 = n.has("wh2") ? n.at("wh2").complex() : cplx{0.0, 0.0};
  if (flow == 1 && !(n.has("wh1") && n.has("wh2"))) n.fail("flow n = 1 needs wh1 and wh2");
  const std::vector<MatC> b = n.at("b").matrices(), bh = n.at("bh").matrices();
  std::optional<cplx> xi;
  if (n.has("xi")) xi = n.at("xi").complex();
  SolitonParams s{guarded(n, [&] {
                  return make_soliton_config(close_dispersion(w1, w2, kappa, kappah, flow, wh1, wh2), b, bh, xi);
                }),
                Provenance::MatrixSolve};
  const std::string prov = n.str("provenance", xi ? "closed_form" : "matrix_solve");
  if (prov == "closed_form") {
    if (!xi || s.cfg.L() != 1) n.at("provenance").fail("closed_form needs one mode and xi");
    s.provenance = Provenance::ClosedFormTL;
  } else if (prov != "matrix_solve") {
    n.at("provenance").fail("expected closed_form or matrix_solve");
  }
  return s;
}

// ------------------------------------------------------------------ reporting

struct Checks {
  json list = json::array();
  bool pass = true;

  void add(const std::string& name, double value, double tol, bool below = true, std::optional<double> floor = {}) {
    const bool ok = std::isfinite(value) && (below ? value <= tol : value >= tol);
    json c = {{"name", name}, {"value", value}, {"tolerance", tol}, {"comparison", below ? "<=" : ">="}, {"pass", ok}};
    if (floor) c["fd_floor"] = *floor;
    list.push_back(std::move(c));
    pass = pass && ok;
  }
};

void add_cplx_columns(std::vector<std::string>& cols, const std::string& name, int r, int c) {
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      cols.push_back("Re_" + name + "_" + std::to_string(i) + std::to_string(j));
      cols.push_back("Im_" + name + "_" + std::to_string(i) + std::to_string(j));
    }
}

void push_cplx(std::vector<double>& row, const MatC& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j).real());
      row.push_back(m(i, j).imag());
    }
}

json cplx_json(cplx v) { return json::array({v.real(), v.imag()}); }

CsvTable fields_table(const Trajectory& tr, int stride) {
  CsvTable t{"fields", {"x", "t"}, {}};
  add_cplx_columns(t.columns, "u", tr.M(), tr.N());
  add_cplx_columns(t.columns, "uh", tr.N(), tr.M());
  for (int j = 0; j < tr.t.n; ++j)
    for (int i = 0; i < tr.x().n; i += stride) {
      std::vector<double> row{tr.x().at(i), tr.t.at(j)};
      push_cplx(row, tr.slices[j].u[i]);
      push_cplx(row, tr.slices[j].uh[i]);
      t.rows.push_back(std::move(row));
    }
  return t;
}

// Optional perturbation of a trajectory: deterministic sine, or random smooth modes from the seed.
Trajectory apply_perturbation(const Trajectory& tr, const Node& p, unsigned long long seed) {
  const double eps = p.at("eps").num();
  const std::string mode = p.str("mode", "sine");
  if (mode == "sine") return perturbed(tr, eps);
  if (mode != "random") p.at("mode").fail("expected sine or random");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2 * M_PI);
  std::vector<std::array<double, 3>> modes;
  for (int k = 1; k <= 4; ++k) modes.push_back({amp(rng) / k, 0.5 * k, phase(rng)});
  Trajectory out = tr;
  for (auto& s : out.slices)
    for (int i = 0; i < s.grid.n; ++i) {
      double m = 0;
      for (const auto& md : modes) m += md[0] * std::sin(md[1] * s.grid.at(i) + md[2]);
      s.u[i] *= 1.0 + eps * m;
      s.uh[i] *= 1.0 - eps * m;
    }
  return out;
}

EqKind s3_kind_for(int n) { return n == 1 ? EqKind::TransportS3 : n == 2 ? EqKind::NlsS3 : EqKind::MkdvS3; }
EqKind s4_kind_for(int n) { return n == 1 ? EqKind::TransportS4 : n == 2 ? EqKind::NlsS4 : EqKind::MkdvS4Derived; }

// ------------------------------------------------------------------ targets

RunResult run_soliton(const Node& p, unsigned long long seed) {
  const SolitonParams sp = parse_soliton(p.at("soliton"));
  const DispersionParams& disp = sp.cfg.disp;
  const Grid1 x = parse_span(p.at("grid").at("x"));
  const Grid1 t = parse_times(p.at("grid").at("t"));
  const FdScheme fd = parse_fd(p);
  const double tol = p.num("tolerance", 1e-6);
  std::vector<EquationId> eqs;
  if (p.has("equations")) {
    const Node list = p.at("equations");
    for (std::size_t i = 0; i < list.size(); ++i) {
      EquationId eq = guarded(list.at(i), [&] { return EquationId::parse(list.at(i).str()); });
      const bool s3 = eq.kind == s3_kind_for(disp.n), s4 = eq.kind == s4_kind_for(disp.n);
      if (!s3 && !s4) list.at(i).fail(eq.name() + " is not the equation of flow n = " + std::to_string(disp.n));
      if (s3) {
        eq.w1 = disp.w1.real();
        eq.w2 = disp.w2.real();
        eq.wh1 = disp.wh1.real();
        eq.wh2 = disp.wh2.real();
        if (disp.w1.imag() != 0 || disp.w2.imag() != 0) list.at(i).fail("explicit forms need real w1, w2");
      }
      eqs.push_back(eq);
    }
  }
  std::optional<std::vector<cplx>> lambdas;
  int zc_n = disp.n;
  if (p.has("zero_curvature")) {
    const Node z = p.at("zero_curvature");
    lambdas = z.at("lambdas").cvec();
    zc_n = z.integer("n", disp.n);
    if (zc_n != disp.n) z.at("n").fail("trajectory belongs to flow " + std::to_string(disp.n));
  }

  const SolitonField field = soliton_field(sp.cfg, sp.provenance);
  const FlowMatch match = guarded(p.at("soliton"), [&] { return flow_matching(disp); });
  Trajectory raw = sample_trajectory(field, x, t);
  Trajectory matched = sample_trajectory(flow_matched(field, match), x, t);
  if (p.has("perturb")) {
    raw = apply_perturbation(raw, p.at("perturb"), seed);
    matched = apply_perturbation(matched, p.at("perturb"), seed);
  }
  const std::string tag = p.has("perturb") ? " [perturbed]" : "";

  RunResult r;
  Checks checks;
  VerifyOptions opt{fd, tol, false, true};
  for (const EquationId& eq : eqs) {
    const bool s4 = eq.kind == s4_kind_for(disp.n);
    const Verdict v = pde_residual(eq, s4 ? matched : raw, opt);
    checks.add("pde_residual(" + eq.name() + ")" + tag, v.residual, tol, true, v.fd_floor);
  }
  if (lambdas) {
    const double zc = zero_curvature_residual(zc_n, matched, *lambdas, fd);
    checks.add("zero_curvature_residual(" + std::to_string(zc_n) + ")" + tag, zc, tol);
  }
  double umax = 0;
  for (const auto& s : raw.slices)
    for (const auto& u : s.u) umax = std::max(umax, sup_norm(u));
  r.report["data"] = {{"flow", disp.n},
                      {"time_scale", match.time_scale},
                      {"uh_scale", match.uh_scale},
                      {"provenance", sp.provenance == Provenance::ClosedFormTL ? "closed_form" : "matrix_solve"},
                      {"sup_u", umax}};
  r.report["checks"] = checks.list;
  r.pass = checks.pass;
  r.tables.push_back(fields_table(raw, std::max(1, p.integer("csv_stride", 20))));
  return r;
}

RunResult run_charges(const Node& p, unsigned long long) {
  const SolitonParams sp = parse_soliton(p.at("soliton"));
  const Grid1 x = parse_span(p.at("grid").at("x"));
  const Grid1 tau = parse_times(p.at("grid").at("tau"));
  const FdScheme fd = parse_fd(p);
  const int kmax = p.integer("kmax", 3);
  if (kmax < 1 || kmax > 8) p.at("kmax").fail("must lie in 1..8");
  const double tol = p.num("tolerance", 1e-6);
  SolitonField field = flow_matched(soliton_field(sp.cfg, sp.provenance),
                                    guarded(p.at("soliton"), [&] { return flow_matching(sp.cfg.disp); }));
  std::string tag;
  if (p.has("wrong_flow_velocity")) {
    field = rigid_wrong_flow(field, p.at("wrong_flow_velocity").num());
    tag = " [rigid wrong flow]";
  }
  const Trajectory tr = sample_trajectory(field, x, tau);
  const std::vector<ChargeReport> reps = conservation_drift(kmax, tr, fd);

  RunResult r;
  Checks checks;
  json charges = json::array(), warnings = json::array();
  CsvTable table{"charges", {"t"}, {}};
  for (const auto& c : reps) {
    checks.add("conservation_drift(I" + std::to_string(c.k) + ")" + tag, c.drift, tol);
    json vals = json::array();
    for (const cplx v : c.values) vals.push_back(cplx_json(v));
    charges.push_back({{"k", c.k}, {"drift", c.drift}, {"relative", c.relative}, {"values", vals}});
    if (c.boundary_leak) warnings.push_back("BoundaryLeak: I" + std::to_string(c.k) + " fields do not decay at the grid ends");
    table.columns.push_back("Re_I" + std::to_string(c.k));
    table.columns.push_back("Im_I" + std::to_string(c.k));
  }
  for (int j = 0; j < tau.n; ++j) {
    std::vector<double> row{tau.at(j)};
    for (const auto& c : reps) {
      row.push_back(c.values[j].real());
      row.push_back(c.values[j].imag());
    }
    table.rows.push_back(std::move(row));
  }
  r.report["data"] = {{"charges", charges}};
  r.report["warnings"] = warnings;
  r.report["checks"] = checks.list;
  r.pass = checks.pass;
  r.tables.push_back(std::move(table));
  return r;
}

RunResult run_hierarchy(const Node& p, unsigned long long) {
  const int n = p.integer("n", 3);
  if (n < 0 || n > kDefaultMaxFlow) p.at("n").fail("must lie in 0.." + std::to_string(kDefaultMaxFlow));
  RunResult r;
  Checks checks;
  json comps = json::object(), eoms = json::object();
  for (int k = 0; k <= n; ++k) {
    const LaxComponent V = time_component(k);
    json terms = json::object();
    for (const auto& [deg, b] : V.terms)
      terms["lambda^" + std::to_string(deg)] = {
          {"a", to_string(b.a)}, {"b", to_string(b.b)}, {"c", to_string(b.c)}, {"d", to_string(b.d)}};
    comps["V" + std::to_string(k)] = terms;
  }
  for (int k = 1; k <= n; ++k) {
    const EquationsOfMotion e = derive_eom(k);
    eoms[std::to_string(k)] = {{"dt_u", to_string(e.dt_u)}, {"dt_uh", to_string(e.dt_uh)}, {"label", e.label}};
    const bool hom = e.dt_u.homogeneous(k + 1) && e.dt_uh.homogeneous(k + 1);
    checks.add("eom(" + std::to_string(k) + ") homogeneous of weight " + std::to_string(k + 1), hom ? 0.0 : 1.0, 0.0);
  }
  r.report["data"] = {{"time_components", comps}, {"equations_of_motion", eoms}};
  r.report["checks"] = checks.list;
  r.pass = checks.pass;
  return r;
}

struct GlmData {
  LinearKernel kernel;  // unused for file kernels
  bool from_file = false;
  KernelCsv f, fh;
  std::optional<SolitonConfig> soliton;
  double w1 = 1, w2 = -1, t = 0;
};

GlmData parse_glm_kernel(const Node& k) {
  GlmData d;
  const std::string kind = k.at("kind").str();
  if (kind == "soliton") {
    const SolitonParams s = parse_soliton(k.at("soliton"));
    d.soliton = s.cfg;
    d.kernel = discrete_kernel(s.cfg.disp, s.cfg.b, s.cfg.bh);
    const Node sn = k.at("soliton");
    d.w1 = sn.at("w1").num();
    d.w2 = sn.at("w2").num();
    d.t = k.num("t", 0.0);
  } else if (kind == "airy") {
    d.w1 = k.at("w1").num();
    d.w2 = k.at("w2").num();
    d.t = k.num("t", -1.0);
    const MatC m = k.has("m") ? k.at("m").matrix() : MatC::Identity(1, 1);
    const MatC mh = k.has("mh") ? k.at("mh").matrix() : MatC::Identity(1, 1);
    // Built at |t|; sampled at t (decaying side for t < 0).
    d.kernel = guarded(k, [&] { return airy_kernel(d.w1, d.w2, std::max(std::abs(d.t), 1e-12), m, mh); });
  } else if (kind == "file") {
    d.from_file = true;
    d.w1 = k.at("w1").num();
    d.w2 = k.at("w2").num();
    d.f = guarded(k.at("f"), [&] { return read_kernel_csv(k.at("f").str()); });
    d.fh = guarded(k.at("fh"), [&] { return read_kernel_csv(k.at("fh").str()); });
    if (d.f.n != d.fh.n || d.f.rows != d.fh.cols || d.f.cols != d.fh.rows)
      k.fail("f and fh sample counts or block shapes disagree");
  } else {
    k.at("kind").fail("expected soliton, airy or file");
  }
  if (d.w1 == d.w2) k.fail("w1 = w2 makes h vanish");
  return d;
}

template <class S>
KernelPair<S> glm_samples(const GlmData& d, const Grid1& g) {
  if (!d.from_file) return sample_kernel_pair<S>(d.kernel, g, d.t);
  if (g.n != d.f.n) throw ConfigError("params.grid: grid has " + std::to_string(g.n) + " points, kernel files have " +
                                      std::to_string(d.f.n));
  KernelPair<S> F{Kernel2D<S>(g, d.f.rows, d.f.cols, Support::Full), Kernel2D<S>(g, d.fh.rows, d.fh.cols, Support::Full)};
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      if constexpr (std::is_same_v<S, double>) {
        F.f.set(i, j, d.f.blocks[i * g.n + j].real());
        F.fh.set(i, j, d.fh.blocks[i * g.n + j].real());
      } else {
        F.f.set(i, j, d.f.blocks[i * g.n + j]);
        F.fh.set(i, j, d.fh.blocks[i * g.n + j]);
      }
    }
  return F;
}

bool file_is_real(const GlmData& d) {
  auto real = [](const KernelCsv& k) {
    for (const auto& b : k.blocks)
      if (b.imag().cwiseAbs().maxCoeff() != 0.0) return false;
    return true;
  };
  return real(d.f) && real(d.fh);
}

template <class S>
double closed_form_error(const GlmSolution<S>& sol, const SolitonConfig& cfg, double t) {
  double e = 0;
  const Grid1 g = sol.B.grid();
  for (int i = 0; i < g.n; ++i) {
    const auto [B, C] = closed_form_one_soliton(cfg, g.at(i), g.at(i), t);
    const MatC b = sol.B.block(i, i).template cast<cplx>(), c = sol.C.block(i, i).template cast<cplx>();
    e = std::max({e, sup_norm(b - B), sup_norm(c - C)});
  }
  return e;
}

template <class S>
RunResult run_glm_typed(const Node& p, const GlmData& d) {
  const Grid1 g = p.has("grid") ? parse_span(p.at("grid")) : Grid1{};
  if (g.n < 3) p.at("grid").fail("needs at least three points");
  GlmOptions opt;
  opt.w1 = d.w1;
  opt.w2 = d.w2;
  const Node checks_cfg = p.at("checks");
  const KernelPair<S> F = glm_samples<S>(d, g);
  GlmSolution<S> sol;
  try {
    sol = solve_glm(F, opt);
  } catch (const TruncationInadmissible& e) {
    throw ConfigError(p.path() + ".grid.max: " + e.what());
  }

  RunResult r;
  Checks checks;
  json data = {{"n", g.n}, {"dx", g.dx}, {"min_abs_det", sol.min_abs_det}};
  auto need_soliton = [&](const std::string& key) {
    if (!d.soliton || !d.soliton->xi || d.soliton->L() != 1)
      checks_cfg.at(key).fail("needs a one-mode soliton kernel with xi");
  };
  if (checks_cfg.has("closed_form")) {
    need_soliton("closed_form");
    const double e = closed_form_error(sol, *d.soliton, d.t);
    checks.add("glm B(x,x), C(x,x) vs closed form", e, checks_cfg.at("closed_form").num());
    data["closed_form_error"] = e;
    if (checks_cfg.has("convergence_order")) {
      const Grid1 g2 = Grid1::span(g.at(0), g.back(), 2 * g.dx);
      const double e2 = closed_form_error(solve_glm(glm_samples<S>(d, g2), opt), *d.soliton, d.t);
      const double order = std::log2(e2 / e);
      checks.add("glm observed convergence order", order, checks_cfg.at("convergence_order").num(), false);
      data["closed_form_error_2dx"] = e2;
    }
  }
  if (checks_cfg.has("factorization")) {
    const double c0 = g.at(0), L = g.back() - g.at(0);
    const FactorizationReport<S> fr = factorization_check(sol, F, {c0 + 0.25 * L, c0 + 0.4 * L, c0 + 0.6 * L}, 0.3);
    checks.add("factorization_check", fr.residual, checks_cfg.at("factorization").num());
  }
  if (checks_cfg.has("constr1")) {
    const Constr1Residual c = constr1_residual(sol, d.w1, d.w2);
    checks.add("kernel constraint residual", c.max(), checks_cfg.at("constr1").num());
  }
  if (checks_cfg.has("integral_riccati")) {
    std::optional<std::vector<Mat<S>>> uref;
    if (d.soliton && d.soliton->L() == 1 && !d.soliton->xi) need_soliton("integral_riccati");
    if (d.soliton) {
      uref.emplace();
      for (int i = 0; i < g.n; ++i) {
        const MatC u = solve_fields(*d.soliton, g.at(i), d.t).u;
        if constexpr (std::is_same_v<S, double>)
          uref->push_back(u.real());
        else
          uref->push_back(u);
      }
    }
    const IntegralRiccatiResidual ir = integral_riccati_residual(sol, d.w1, d.w2, uref ? &*uref : nullptr);
    checks.add("integral Riccati: u + h gamma(x,x)", ir.diagonal, checks_cfg.at("integral_riccati").num());
    checks.add("integral Riccati: kernel equation", ir.kernel, checks_cfg.at("integral_riccati").num());
  }
  if (checks_cfg.has("routes")) {
    const Node rc = checks_cfg.at("routes");
    const Grid1 gc = Grid1::span(g.at(0), g.back(), rc.positive("dx"));
    const KernelPair<S> Fc = glm_samples<S>(d, gc);
    const GlmSolution<S> a = solve_glm(Fc, opt);
    const ResolventFields<S> b = resolvent_fields(Fc, opt);
    const double diff = std::max(static_cast<double>((a.B.data() - b.B.data()).cwiseAbs().maxCoeff()),
                                 static_cast<double>((a.C.data() - b.C.data()).cwiseAbs().maxCoeff()));
    checks.add("solve_glm vs resolvent_fields", diff, rc.num("tolerance", 1e-8));
  }

  CsvTable table{"glm", {"x"}, {}};
  add_cplx_columns(table.columns, "u", F.M(), F.N());
  add_cplx_columns(table.columns, "uh", F.N(), F.M());
  for (int i = 0; i < g.n; i += std::max(1, p.integer("csv_stride", 1))) {
    std::vector<double> row{g.at(i)};
    push_cplx(row, sol.u[i].template cast<cplx>());
    push_cplx(row, sol.uh[i].template cast<cplx>());
    table.rows.push_back(std::move(row));
  }
  r.report["data"] = data;
  r.report["checks"] = checks.list;
  r.pass = checks.pass;
  r.tables.push_back(std::move(table));
  return r;
}

RunResult run_glm(const Node& p, unsigned long long) {
  const GlmData d = parse_glm_kernel(p.at("kernel"));
  if (d.from_file) return file_is_real(d) ? run_glm_typed<double>(p, d) : run_glm_typed<cplx>(p, d);
  try {
    return run_glm_typed<double>(p, d);
  } catch (const ShapeMismatch&) {
    return run_glm_typed<cplx>(p, d);  // complex samples
  }
}

RunResult run_airy(const Node& p, unsigned long long) {
  const double w1 = p.at("w1").num(), w2 = p.at("w2").num(), t = p.at("t").num();
  if (!(t > 0)) p.at("t").fail("must be positive");
  const LinearKernel k = guarded(p, [&] {
    return airy_kernel(w1, w2, t, MatC::Identity(1, 1), MatC::Identity(1, 1));
  });
  const Node box = p.at("box");
  KernelSampling s{parse_span(box.at("x")), parse_span(box.at("z")), t, box.num("h", 1e-2)};
  const double tol = p.num("tolerance", 1e-6);
  const FdScheme fd = parse_fd(p);
  EquationId lt{EqKind::LinearTime, 3, {}, {}, {}, {}, {}};
  RunResult r;
  Checks checks;
  const Verdict kv = pde_residual(lt, k, s, VerifyOptions{fd, tol, false, true});
  checks.add("pde_residual(linear_time(3)) on the Airy kernel", kv.residual, tol, true, kv.fd_floor);

  const Grid1 zeta = parse_span(p.at("ode"));
  std::vector<double> y(zeta.n);
  for (int i = 0; i < zeta.n; ++i) y[i] = guarded(p.at("ode"), [&] { return airy_function(zeta.at(i)); });
  const Verdict ov = pde_residual(EquationId{EqKind::AiryOde, 0, {}, {}, {}, {}, {}}, zeta, y, VerifyOptions{fd, tol, false, true});
  checks.add("pde_residual(airy_ode)", ov.residual, tol, true, ov.fd_floor);
  CsvTable table{"airy", {"zeta", "Ai"}, {}};
  const int stride = std::max(1, p.integer("csv_stride", 10));
  for (int i = 0; i < zeta.n; i += stride) table.rows.push_back({zeta.at(i), y[i]});
  r.report["data"] = {{"nu", airy_scale(w1, w2, t)}, {"s", -w1 / w2}};
  r.report["checks"] = checks.list;
  r.pass = checks.pass;
  r.tables.push_back(std::move(table));
  return r;
}

RunResult run_burgers(const Node& p, unsigned long long) {
  const std::string phi_name = p.str("phi", "gaussian");
  const double nu_hat = p.positive("nu_hat");
  HeatSolution phi;
  if (phi_name == "gaussian")
    phi = HeatSolution::gaussian(nu_hat);
  else if (phi_name == "twohump")
    phi = HeatSolution::twohump(nu_hat);
  else
    p.at("phi").fail("expected gaussian or twohump");
  const MatC b = p.at("b").matrix();
  const double kb = p.at("kappa_b").num();
  const BurgersSolution sol = guarded(p, [&] { return cole_hopf_burgers(phi, nu_hat, b, kb); });
  const Grid1 chi = parse_span(p.at("grid").at("chi"));
  const Grid1 tau = parse_times(p.at("grid").at("tau"));
  const double tol = p.num("tolerance", 1e-6);
  const FdScheme fd = parse_fd(p);

  RunResult r;
  Checks checks;
  SampledSeries ks = sample_burgers(sol, chi, tau);
  std::string tag;
  if (p.has("perturb")) {
    const double eps = p.at("perturb").at("eps").num();
    for (int j = 0; j < tau.n; ++j)
      for (int i = 0; i < chi.n; ++i) ks.values[j][i] *= 1.0 + eps * std::sin(chi.at(i));
    tag = " [perturbed]";
  }
  EquationId eq{EqKind::BurgersViscous, 0, {}, {}, {}, {}, sol.nu()};
  const Verdict v = pde_residual(eq, ks, VerifyOptions{fd, tol, false, true});
  checks.add("pde_residual(burgers_viscous)" + tag, v.residual, tol, true, v.fd_floor);

  if (p.has("scalar_reduction")) {
    // 1×1 data b = κ_b: K must equal −2ν ∂χφ/φ at rescaled time κ_b τ.
    const double tol1 = p.at("scalar_reduction").num();
    MatC b1(1, 1);
    b1(0, 0) = kb;
    const BurgersSolution s1 = cole_hopf_burgers(phi, nu_hat, b1, kb);
    double e = 0;
    for (int j = 0; j < tau.n; ++j)
      for (int i = 0; i < chi.n; i += 4) {
        const double th = kb * tau.at(j);
        const double ref = -2.0 * s1.nu() * phi.dphi(chi.at(i), th) / phi.phi(chi.at(i), th);
        e = std::max(e, std::abs(s1.K(chi.at(i), tau.at(j))(0, 0) - ref));
      }
    checks.add("scalar Cole-Hopf reduction", e, tol1);
  }
  CsvTable table{"burgers", {"chi", "tau"}, {}};
  add_cplx_columns(table.columns, "K", static_cast<int>(b.rows()), static_cast<int>(b.cols()));
  const int stride = std::max(1, p.integer("csv_stride", 10));
  for (int j = 0; j < tau.n; ++j)
    for (int i = 0; i < chi.n; i += stride) {
      std::vector<double> row{chi.at(i), tau.at(j)};
      push_cplx(row, ks.values[j][i]);
      table.rows.push_back(std::move(row));
    }
  r.report["data"] = {{"nu", sol.nu()}};
  r.report["checks"] = checks.list;
  r.pass = checks.pass;
  r.tables.push_back(std::move(table));
  return r;
}

using Runner = RunResult (*)(const Node&, unsigned long long);

Runner runner_for(const Node& target) {
  const std::string t = target.str();
  if (t == "soliton") return run_soliton;
  if (t == "charges") return run_charges;
  if (t == "hierarchy") return run_hierarchy;
  if (t == "glm") return run_glm;
  if (t == "airy") return run_airy;
  if (t == "burgers") return run_burgers;
  target.fail("unknown target '" + t + "'");
}

void check_header(const json& cfg) {
  const Node root(cfg, "$");
  if (!cfg.is_object()) root.fail("scenario must be a JSON object");
  const int schema = root.at("schema").integer();
  if (schema != kScenarioSchema) root.at("schema").fail("unsupported schema version " + std::to_string(schema));
  root.at("name").str();
  root.at("params");
  runner_for(root.at("target"));
  if (root.has("seed") && !cfg["seed"].is_number_unsigned() && !cfg["seed"].is_number_integer())
    root.at("seed").fail("expected an integer");
}

}  // namespace

std::string CsvTable::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

std::vector<ScenarioInfo> list_scenarios() {
  std::vector<ScenarioInfo> out;
  for (const auto& b : kBundled) {
    const json j = json::parse(b.text);
    out.push_back({b.name, j.value("description", ""), j.value("anchor", "")});
  }
  return out;
}

json bundled_scenario(const std::string& name) {
  for (const auto& b : kBundled)
    if (name == b.name) return json::parse(b.text);
  throw ConfigError("unknown scenario '" + name + "' (see `akns list`)");
}

json load_scenario(const std::string& path_or_name) {
  if (std::filesystem::exists(path_or_name)) {
    std::ifstream in(path_or_name);
    try {
      return json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(path_or_name + ": " + e.what());
    }
  }
  return bundled_scenario(path_or_name);
}

void validate_scenario(const json& cfg) { check_header(cfg); }

RunResult run_scenario(const json& cfg) {
  check_header(cfg);
  const Node root(cfg, "$");
  const unsigned long long seed = cfg.value("seed", 0ULL);
  RunResult r = runner_for(root.at("target"))(root.at("params"), seed);
  json report = {{"schema", kScenarioSchema},
                 {"scenario", cfg["name"]},
                 {"anchor", cfg.value("anchor", "")},
                 {"target", cfg["target"]},
                 {"seed", seed},
                 {"pass", r.pass}};
  for (auto& [k, v] : r.report.items()) report[k] = v;
  json failing = json::array();
  for (const auto& c : report.value("checks", json::array()))
    if (!c["pass"].get<bool>()) failing.push_back(c["name"]);
  report["failing_checks"] = failing;
  r.report = std::move(report);
  return r;
}

void write_outputs(const RunResult& r, const std::string& report_path, const std::string& csv_stem) {
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw ConfigError("cannot write report to " + report_path);
    out << r.report.dump(2) << '\n';
  }
  if (!csv_stem.empty())
    for (const auto& t : r.tables) {
      const std::string path = csv_stem + "_" + t.name + ".csv";
      std::ofstream out(path);
      if (!out) throw ConfigError("cannot write CSV to " + path);
      out << t.to_csv();
    }
}

KernelCsv read_kernel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open kernel file");
  struct Entry {
    int i, j, r, c;
    cplx v;
  };
  std::vector<Entry> entries;
  std::string line;
  int lineno = 0;
  bool seen_data = false;
  KernelCsv k;
  int maxr = 0, maxc = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    std::vector<double> v;
    try {
      for (const auto& f : fields) v.push_back(std::stod(f));
    } catch (const std::exception&) {
      if (!seen_data && entries.empty()) {  // header: first non-comment line
        seen_data = true;
        continue;
      }
      throw ConfigError(path + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    seen_data = true;
    if (v.size() != 4 && v.size() != 6)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 4 or 6 columns");
    Entry e{static_cast<int>(v[0]), static_cast<int>(v[1]), 0, 0, {}};
    if (v.size() == 6) {
      e.r = static_cast<int>(v[2]);
      e.c = static_cast<int>(v[3]);
    }
    e.v = {v[v.size() - 2], v[v.size() - 1]};
    if (e.i < 0 || e.j < 0 || e.r < 0 || e.c < 0) throw ConfigError(path + ":" + std::to_string(lineno) + ": negative index");
    k.n = std::max({k.n, e.i + 1, e.j + 1});
    maxr = std::max(maxr, e.r + 1);
    maxc = std::max(maxc, e.c + 1);
    entries.push_back(e);
  }
  if (k.n == 0) throw ConfigError(path + ": no samples");
  k.rows = maxr;
  k.cols = maxc;
  k.blocks.assign(static_cast<std::size_t>(k.n) * k.n, MatC::Zero(maxr, maxc));
  std::vector<char> seen(k.blocks.size() * maxr * maxc, 0);
  for (const auto& e : entries) {
    const std::size_t b = static_cast<std::size_t>(e.i) * k.n + e.j;
    k.blocks[b](e.r, e.c) = e.v;
    seen[(b * maxr + e.r) * maxc + e.c] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw ConfigError(path + ": incomplete sample table (every i, j, r, c must appear)");
  return k;
}

}  // namespace akns
