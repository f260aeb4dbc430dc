// akns command-line driver: scenario runner plus thin per-module subcommands.
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "akns/errors.hpp"
#include "akns/glm.hpp"
#include "akns/hierarchy.hpp"
#include "akns/scenario.hpp"
#include "akns/soliton.hpp"
#include "akns/verify.hpp"

using namespace akns;

namespace {

constexpr int kExitConfig = 2;

struct Common {
  std::string report;  // empty: stdout
  std::string csv;     // empty: no CSV
};

int emit(const RunResult& r, const Common& c) {
  if (c.report.empty())
    std::cout << r.report.dump(2) << '\n';
  write_outputs(r, c.report, c.csv);
  if (!r.pass) {
    std::cerr << "verification failed:";
    for (const auto& n : r.report["failing_checks"]) std::cerr << " [" << n.get<std::string>() << "]";
    std::cerr << '\n';
  }
  return r.exit_code();
}

std::vector<double> parse_triple(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, ',');) {
    try {
      v.push_back(std::stod(f));
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": expected min,max,dx");
    }
  }
  if (v.size() != 3) throw ConfigError(std::string(what) + ": expected min,max,dx");
  return v;
}

// Trajectory from a fields CSV (columns x, t, Re_u_ij, Im_u_ij, ..., Re_uh_ij, Im_uh_ij).
Trajectory read_fields_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open fields file");
  std::string line;
  std::getline(in, line);
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) cols.push_back(f);
  }
  if (cols.size() < 2 || cols[0] != "x" || cols[1] != "t") throw ConfigError(path + ": header must start with x,t");
  int N = 0, M = 0;
  for (const auto& c : cols)
    if (c.rfind("Re_u_", 0) == 0 && c.size() == 7) {
      M = std::max(M, c[5] - '0' + 1);
      N = std::max(N, c[6] - '0' + 1);
    }
  if (N == 0 || cols.size() != 2 + 4 * static_cast<std::size_t>(N * M))
    throw ConfigError(path + ": unexpected column layout");
  std::map<double, std::map<double, std::vector<double>>> rows;  // t -> x -> values
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) v.push_back(std::stod(f));
    if (v.size() != cols.size()) throw ConfigError(path + ":" + std::to_string(lineno) + ": wrong field count");
    rows[v[1]][v[0]] = std::vector<double>(v.begin() + 2, v.end());
  }
  if (rows.size() < 2) throw ConfigError(path + ": need several time slices");
  Trajectory tr;
  const double t0 = rows.begin()->first, t1 = std::next(rows.begin())->first;
  tr.t = Grid1{t0, t1 - t0, static_cast<int>(rows.size())};
  for (const auto& [t, xs] : rows) {
    if (xs.size() < 2) throw ConfigError(path + ": need several x samples per slice");
    const double x0 = xs.begin()->first, x1 = std::next(xs.begin())->first;
    GridField f{Grid1{x0, x1 - x0, static_cast<int>(xs.size())}, N, M, {}, {}};
    for (const auto& [x, v] : xs) {
      MatC u(M, N), uh(N, M);
      std::size_t k = 0;
      for (int i = 0; i < M; ++i)
        for (int j = 0; j < N; ++j, k += 2) u(i, j) = {v[k], v[k + 1]};
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < M; ++j, k += 2) uh(i, j) = {v[k], v[k + 1]};
      f.u.push_back(u);
      f.uh.push_back(uh);
    }
    tr.slices.push_back(std::move(f));
  }
  for (int j = 1; j < tr.t.n; ++j)
    if (std::abs(tr.t.at(j) - std::next(rows.begin(), j)->first) > 1e-9 * std::max(1.0, std::abs(tr.t.dx)))
      throw GridMismatch(path + ": time samples are not uniform");
  tr.validate();
  return tr;
}

json verdict_json(const Verdict& v) {
  json j = {{"equation", v.equation}, {"residual", v.residual}, {"tolerance", v.tolerance}, {"pass", v.pass}};
  j["fd_floor"] = v.fd_floor ? json(*v.fd_floor) : json(nullptr);
  return j;
}

int cmd_verify(const std::string& eq_name, const std::string& source, const std::string& config, double tolerance,
               const std::string& path) {
  EquationId eq = EquationId::parse(eq_name);
  Trajectory tr;
  if (source == "file") {
    if (path.empty()) throw ConfigError("--path: required for --source file");
    tr = read_fields_csv(path);
    if (eq.kind == EqKind::NlsS3 || eq.kind == EqKind::MkdvS3 || eq.kind == EqKind::TransportS3)
      if (!eq.w1 || !eq.w2) throw ConfigError("--w1/--w2: required for " + eq.name() + " on file data");
  } else {
    const json cfg = load_scenario(config.empty() ? (source == "glm" ? "glm_vs_closedform" : "one_soliton_nls") : config);
    const json& sj = source == "glm" ? cfg.at("params").at("kernel").at("soliton") : cfg.at("params").at("soliton");
    auto cvec = [](const json& a) {
      std::vector<cplx> v;
      for (const auto& e : a) v.push_back(e.is_array() ? cplx(e[0], e[1]) : cplx(e.get<double>(), 0.0));
      return v;
    };
    auto mats = [](const json& a) {
      std::vector<MatC> out;
      for (const auto& m : a) {
        MatC x(m.size(), m[0].size());
        for (std::size_t i = 0; i < m.size(); ++i)
          for (std::size_t k = 0; k < m[i].size(); ++k)
            x(i, k) = m[i][k].is_array() ? cplx(m[i][k][0], m[i][k][1]) : cplx(m[i][k].get<double>(), 0.0);
        out.push_back(x);
      }
      return out;
    };
    std::optional<cplx> xi;
    if (sj.contains("xi")) xi = cplx(sj["xi"].get<double>(), 0.0);
    const double w1 = sj.at("w1"), w2 = sj.at("w2");
    const SolitonConfig sc = make_soliton_config(
        close_dispersion(w1, w2, cvec(sj.at("kappa")), cvec(sj.at("kappah")), sj.value("n", 2)), mats(sj.at("b")),
        mats(sj.at("bh")), xi);
    const bool s4 = eq.kind == EqKind::TransportS4 || eq.kind == EqKind::NlsS4 || eq.kind == EqKind::MkdvS4Derived;
    if (!s4) {
      eq.w1 = w1;
      eq.w2 = w2;
    }
    SolitonField field;
    Grid1 x, t;
    if (source == "soliton") {
      field = soliton_field(sc, xi && sc.L() == 1 ? Provenance::ClosedFormTL : Provenance::MatrixSolve);
      x = Grid1::span(-15, 15, 0.005);
      t = Grid1{-0.02, 0.005, 9};
    } else if (source == "glm") {
      // u, û reconstructed from GLM solves at each time slice.
      const LinearKernel k = discrete_kernel(sc.disp, sc.b, sc.bh);
      x = Grid1::span(-2, 7, 0.02);
      t = Grid1{-0.04, 0.01, 9};
      std::vector<std::vector<std::pair<MatC, MatC>>> cache(t.n);
      GlmOptions opt;
      opt.w1 = w1;
      opt.w2 = w2;
      for (int j = 0; j < t.n; ++j) {
        const GlmSolution<cplx> sol = solve_glm(sample_kernel_pair<cplx>(k, x, t.at(j)), opt);
        for (int i = 0; i < x.n; ++i) cache[j].push_back({sol.u[i], sol.uh[i]});
      }
      field.N = sc.N();
      field.M = sc.M();
      field.eval = [cache, x, t](double xv, double tv) {
        const int i = static_cast<int>(std::lround((xv - x.x0) / x.dx)), j = static_cast<int>(std::lround((tv - t.x0) / t.dx));
        return cache.at(j).at(i);
      };
    } else {
      throw ConfigError("--source: expected soliton, glm or file");
    }
    if (s4) field = flow_matched(field, flow_matching(sc.disp));
    tr = sample_trajectory(field, x, t);
  }
  VerifyOptions opt;
  opt.tolerance = tolerance;
  const Verdict v = pde_residual(eq, tr, opt);
  json out = verdict_json(v);
  out["source"] = source;
  std::cout << out.dump(2) << '\n';
  return v.pass ? 0 : 1;
}

int cmd_hierarchy(int n, const std::string& format) {
  if (n < 0 || n > kDefaultMaxFlow) throw ConfigError("--n: must lie in 0.." + std::to_string(kDefaultMaxFlow));
  json cfg = bundled_scenario("hierarchy_v3_print");
  cfg["params"]["n"] = n;
  const RunResult r = run_scenario(cfg);
  if (format == "json") {
    std::cout << r.report.dump(2) << '\n';
    return r.exit_code();
  }
  if (format != "text") throw ConfigError("--format: expected text or json");
  for (const auto& [name, terms] : r.report["data"]["time_components"].items()) {
    std::cout << name << ":\n";
    for (const auto& [lam, b] : terms.items())
      std::cout << "  " << lam << ": [[" << b["a"].get<std::string>() << ", " << b["b"].get<std::string>() << "], ["
                << b["c"].get<std::string>() << ", " << b["d"].get<std::string>() << "]]\n";
  }
  for (const auto& [k, e] : r.report["data"]["equations_of_motion"].items())
    std::cout << "flow " << k << ": dt u = " << e["dt_u"].get<std::string>()
              << " ; dt u.hat = " << e["dt_uh"].get<std::string>() << '\n';
  return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix NLS/AKNS hierarchy: symbolic construction, exact solutions, numerical verification"};
  app.require_subcommand(1);
  Common common;

  std::string run_target;
  auto* run = app.add_subcommand("run", "Run a scenario (JSON path or bundled name)");
  run->add_option("config", run_target, "scenario file or bundled name")->required();
  run->add_option("--report", common.report, "write the JSON report here instead of stdout");
  run->add_option("--csv", common.csv, "CSV stem: writes <stem>_<table>.csv");

  auto* list = app.add_subcommand("list", "List bundled scenarios");

  int hn = 3;
  std::string hformat = "text";
  auto* hier = app.add_subcommand("hierarchy", "Print time components and flows up to n");
  hier->add_option("--n", hn, "largest flow index")->default_val(3);
  hier->add_option("--format", hformat, "text or json")->default_val("text");

  int kmax = 3;
  std::string charges_scn = "charges_conservation";
  auto* charges = app.add_subcommand("charges", "Conserved charges along a soliton trajectory");
  charges->add_option("--kmax", kmax, "largest charge index")->default_val(3);
  charges->add_option("--scenario", charges_scn, "charges scenario (path or bundled name)");
  charges->add_option("--csv", common.csv, "CSV stem");

  std::string sol_cfg = "one_soliton_nls", sol_grid = "-15,15,0.05", sol_out;
  double sol_t = 0.0;
  auto* soliton = app.add_subcommand("soliton", "Sample soliton fields to CSV");
  soliton->add_option("--config", sol_cfg, "soliton scenario (path or bundled name)");
  soliton->add_option("--grid", sol_grid, "min,max,dx");
  soliton->add_option("--t", sol_t, "time");
  soliton->add_option("--out", sol_out, "CSV path")->required();

  std::string glm_kind = "soliton", glm_f, glm_fh;
  double glm_dx = 0.01, glm_xmax = 7.0, glm_xmin = -2.0, glm_w1 = 1.0, glm_w2 = -2.0, glm_t = -1.0;
  auto* glm = app.add_subcommand("glm", "Solve the GLM system and run its checks");
  glm->add_option("--kernel", glm_kind, "soliton, airy or file")->default_val("soliton");
  glm->add_option("--dx", glm_dx, "grid step");
  glm->add_option("--xmax", glm_xmax, "truncation point");
  glm->add_option("--xmin", glm_xmin, "left end of the grid");
  glm->add_option("--f", glm_f, "file kernel: CSV for f");
  glm->add_option("--fh", glm_fh, "file kernel: CSV for f.hat");
  glm->add_option("--w1", glm_w1, "airy/file kernels: w1");
  glm->add_option("--w2", glm_w2, "airy/file kernels: w2");
  glm->add_option("--t", glm_t, "airy kernel: sampling time");
  glm->add_option("--csv", common.csv, "CSV stem");

  std::string v_eq, v_source = "soliton", v_cfg, v_path;
  double v_tol = 1e-6;
  std::optional<double> v_w1, v_w2;
  auto* verify = app.add_subcommand("verify", "PDE residual of one equation on a trajectory");
  verify->add_option("--eq", v_eq, "equation id, e.g. nls_s3, mkdv_s4_derived")->required();
  verify->add_option("--source", v_source, "soliton, glm or file")->default_val("soliton");
  verify->add_option("--config", v_cfg, "scenario providing the soliton data");
  verify->add_option("--path", v_path, "fields CSV for --source file");
  verify->add_option("--tolerance", v_tol, "pass threshold");

  std::string airy_grid = "-5,5,0.001";
  auto* airy = app.add_subcommand("airy", "Airy kernel and Airy ODE checks");
  airy->add_option("--grid", airy_grid, "zeta grid min,max,dx");
  airy->add_option("--csv", common.csv, "CSV stem");

  std::string phi = "gaussian";
  auto* burgers = app.add_subcommand("burgers", "Matrix Burgers field via Cole-Hopf");
  burgers->add_option("--phi", phi, "gaussian or twohump")->default_val("gaussian");
  burgers->add_option("--csv", common.csv, "CSV stem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return emit(run_scenario(load_scenario(run_target)), common);
    if (*list) {
      for (const auto& s : list_scenarios()) std::cout << s.name << "  " << s.description << "  [" << s.anchor << "]\n";
      return 0;
    }
    if (*hier) return cmd_hierarchy(hn, hformat);
    if (*charges) {
      json cfg = load_scenario(charges_scn);
      cfg["params"]["kmax"] = kmax;
      return emit(run_scenario(cfg), common);
    }
    if (*soliton) {
      json cfg = load_scenario(sol_cfg);
      const auto g = parse_triple(sol_grid, "--grid");
      cfg["params"]["grid"]["x"] = {{"min", g[0]}, {"max", g[1]}, {"dx", g[2]}};
      cfg["params"]["grid"]["t"] = {{"start", sol_t}, {"dt", 1.0}, {"count", 1}};
      cfg["params"].erase("equations");
      cfg["params"].erase("zero_curvature");
      cfg["params"].erase("perturb");
      cfg["params"]["csv_stride"] = 1;
      RunResult r = run_scenario(cfg);
      std::ofstream out(sol_out);
      if (!out) throw ConfigError("--out: cannot write " + sol_out);
      out << r.tables.front().to_csv();
      std::cout << json{{"written", sol_out}, {"rows", r.tables.front().rows.size()}}.dump() << '\n';
      return 0;
    }
    if (*glm) {
      json cfg = bundled_scenario("glm_vs_closedform");
      json& p = cfg["params"];
      p["grid"] = {{"min", glm_xmin}, {"max", glm_xmax}, {"dx", glm_dx}};
      if (glm_kind == "soliton") {
        p["checks"].erase("routes");
      } else if (glm_kind == "airy") {
        p["kernel"] = {{"kind", "airy"}, {"w1", glm_w1}, {"w2", glm_w2}, {"t", glm_t}};
        p["checks"] = {{"factorization", 1e-3}, {"constr1", 1e-3}};
      } else if (glm_kind == "file") {
        p["kernel"] = {{"kind", "file"}, {"w1", glm_w1}, {"w2", glm_w2}, {"f", glm_f}, {"fh", glm_fh}};
        p["checks"] = {{"factorization", 1e-3}};
      } else {
        throw ConfigError("--kernel: expected soliton, airy or file");
      }
      cfg["name"] = "glm_" + glm_kind;
      return emit(run_scenario(cfg), common);
    }
    if (*verify) return cmd_verify(v_eq, v_source, v_cfg, v_tol, v_path);
    if (*airy) {
      json cfg = bundled_scenario("airy_mkdv");
      const auto g = parse_triple(airy_grid, "--grid");
      cfg["params"]["ode"] = {{"min", g[0]}, {"max", g[1]}, {"dx", g[2]}};
      return emit(run_scenario(cfg), common);
    }
    if (*burgers) {
      json cfg = bundled_scenario("burgers_cole_hopf");
      cfg["params"]["phi"] = phi;
      return emit(run_scenario(cfg), common);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
