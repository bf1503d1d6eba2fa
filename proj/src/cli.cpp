#include "gllab/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "gllab/analysis.hpp"
#include "gllab/error.hpp"
#include "gllab/hodge.hpp"
#include "gllab/parallel.hpp"
#include "gllab/scenarios.hpp"
#include "gllab/solver.hpp"

namespace gllab::cli {

using io::json;
namespace fs = std::filesystem;

json RunConfig::to_json() const {
  return {{"chart", chart}, {"res", res}, {"dim", dim}, {"eps", eps}, {"eps_sweep", eps_sweep}, {"l", l},
          {"init", init}, {"k", k}, {"seed", seed}, {"out", out}, {"threads", threads}, {"tol", tol},
          {"eta", eta}, {"sigma", sigma}, {"theta_min", theta_min}, {"allow_underresolved", allow_underresolved},
          {"stationarity_field", stationarity_field}};
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  const json known = c.to_json();
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  try {
    c.chart = j.value("chart", c.chart);
    if (j.contains("res")) c.res = j["res"].is_array() ? j["res"].get<std::vector<int>>() : std::vector<int>{j["res"].get<int>()};
    c.dim = j.value("dim", c.dim);
    c.eps = j.value("eps", c.eps);
    c.eps_sweep = j.value("eps_sweep", c.eps_sweep);
    c.l = j.value("l", c.l);
    c.init = j.value("init", c.init);
    c.k = j.value("k", c.k);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    c.threads = j.value("threads", c.threads);
    c.tol = j.value("tol", c.tol);
    c.eta = j.value("eta", c.eta);
    c.sigma = j.value("sigma", c.sigma);
    c.theta_min = j.value("theta_min", c.theta_min);
    c.allow_underresolved = j.value("allow_underresolved", c.allow_underresolved);
    c.stationarity_field = j.value("stationarity_field", c.stationarity_field);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

Resolution classify_resolution(const RunConfig& cfg, double eps, double h) {
  if (chart_from_string(cfg.chart) == ChartId::product_s1_hemisphere && (cfg.init == "exact" || cfg.init == "discrete"))
    return Resolution::ok;
  if (eps < 2.0 * h) return Resolution::invalid;
  if (eps < 4.0 * h) return Resolution::underresolved;
  if (eps < 6.0 * h) return Resolution::warn;
  return Resolution::ok;
}

namespace {

fs::path output_root(const RunConfig& cfg, const std::string& leaf) {
  if (!cfg.out.empty()) return cfg.out;
  const char* env = std::getenv("GLLAB_OUT");
  return fs::path(env && *env ? env : "gllab_runs") / leaf;
}

json metadata(double seconds) {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"finished", stamp}, {"seconds", seconds}, {"threads", par::threads()}};
}

DomainPtr make_domain(const RunConfig& cfg) {
  ChartParams p;
  p.dim = cfg.dim;
  p.elongation = cfg.l;
  return build_chart(chart_from_string(cfg.chart), cfg.res, p);
}

ComplexField make_init(const RunConfig& cfg, DomainPtr dom, double eps) {
  const auto chart = dom->grid.chart;
  if (cfg.init == "exact" || cfg.init == "discrete") {
    if (chart != ChartId::product_s1_hemisphere) throw ConfigError("init '" + cfg.init + "' needs the product chart");
    return cfg.init == "exact" ? init_product_exact(dom, eps, cfg.k) : init_product_discrete(dom, eps, cfg.k);
  }
  if (cfg.init == "constant") return init_constant(dom, eps, {1.0, 0.0});
  if (cfg.init == "noise") return init_noise(dom, eps, cfg.seed, 1.0);
  if (cfg.init == "vortex") {
    Vec3 core{0.0, 0.0, 0.0};
    switch (chart) {
      case ChartId::disk: break;
      case ChartId::box:
        for (int a = 0; a < dom->ndim(); ++a) core[a] = 0.5 * dom->grid.params.side;
        break;
      case ChartId::half_ball: core[dom->ndim() - 1] = 0.5 * dom->grid.params.radius; break;
      case ChartId::half_ellipse_rz: core[0] = 0.7; break;
      case ChartId::product_s1_hemisphere: throw ConfigError("init 'vortex' is not available on the product chart");
    }
    return init_vortex(dom, eps, core);
  }
  throw ConfigError("unknown init '" + cfg.init + "' (vortex, noise, constant, exact, discrete)");
}

int cmd_solve(const RunConfig& cfg, bool eps_given) {
  auto dom = make_domain(cfg);
  const double h = dom->grid.max_spacing();
  std::vector<double> epss = cfg.eps_sweep;
  if (epss.empty()) {
    double e = cfg.eps;
    if (!eps_given && dom->grid.chart == ChartId::product_s1_hemisphere && (cfg.init == "exact" || cfg.init == "discrete"))
      e = std::exp(-static_cast<double>(cfg.k * cfg.k));
    epss.push_back(e);
  }
  for (double e : epss) {
    switch (classify_resolution(cfg, e, h)) {
      case Resolution::invalid:
        throw ConfigError("eps = " + io::format_number(e) + " is below 2h (h = " + io::format_number(h) + ")");
      case Resolution::underresolved:
        if (!cfg.allow_underresolved)
          throw ConfigError("eps = " + io::format_number(e) + " is below 4h (h = " + io::format_number(h) +
                            "); pass --allow-underresolved to run anyway");
        std::cerr << "warning: eps = " << e << " is under-resolved (eps < 4h)\n";
        break;
      case Resolution::warn: std::cerr << "warning: eps = " << e << " is below 6h\n"; break;
      case Resolution::ok: break;
    }
  }

  const fs::path root = output_root(cfg, "solve");
  json summary = {{"config_hash", io::config_hash(cfg.to_json())}, {"runs", json::array()}};
  bool all_converged = true;
  const auto t0 = std::chrono::steady_clock::now();
  for (double e : epss) {
    const fs::path dir = epss.size() == 1 ? root : root / ("eps_" + io::format_number(e));
    SolverConfig sc;
    sc.residual_tol = cfg.tol;
    auto out = solve(make_init(cfg, dom, e), sc);
    json rep = io::to_json(out.report);
    rep["epsilon"] = e;
    rep["energy"] = energy(out.field);
    io::write_field(dir / "fields", "u", out.field, {{"init", cfg.init}});
    io::write_energy_history(dir / "tables" / "energy_history.csv", out.report);
    if (epss.size() > 1) io::write_json(dir / "report.json", rep);
    summary["runs"].push_back(rep);
    all_converged = all_converged && out.report.converged;
    std::cout << "eps=" << e << " residual=" << out.report.final_residual << " steps=" << out.report.steps
              << " newton=" << out.report.newton_iterations << (out.report.converged ? " converged" : " NOT converged") << "\n";
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_json(root / "config.json", cfg.to_json());
  io::write_json(root / "report.json", summary);
  io::write_json(root / "metadata.json", metadata(seconds));
  std::cout << "wrote " << root.string() << "\n";
  return all_converged ? 0 : 3;
}

AdmissibleVectorField verify_field(const RunConfig& cfg, const Domain& dom) {
  // Chart bounding box centre and half-extent.
  Vec3 mid{0.0, 0.0, 0.0};
  double half = 1e300;
  for (int a = 0; a < dom.ndim(); ++a) {
    mid[a] = dom.grid.origin[a] + 0.5 * dom.grid.period(a);
    half = std::min(half, 0.5 * dom.grid.period(a));
  }
  const int n = dom.ndim();
  if (cfg.stationarity_field == "bump") {
    return make_vector_field(dom, [=](const Vec3& x) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) s += (x[a] - mid[a]) * (x[a] - mid[a]);
      s /= 0.64 * half * half;
      const double b = s < 1.0 ? std::pow(1.0 - s, 3) : 0.0;
      Vec3 v{0.0, 0.0, 0.0};
      for (int a = 0; a < n; ++a) v[a] = b * (x[a] - mid[a]);
      return v;
    });
  }
  if (cfg.stationarity_field == "rotation")
    return make_vector_field(dom, [=](const Vec3& x) { return Vec3{-(x[1] - mid[1]), x[0] - mid[0], 0.0}; });
  if (cfg.stationarity_field == "radial") {
    return make_vector_field(dom, [=](const Vec3& x) {
      Vec3 v{0.0, 0.0, 0.0};
      for (int a = 0; a < n; ++a) v[a] = x[a] - mid[a];
      return v;
    });
  }
  throw ConfigError("unknown stationarity field '" + cfg.stationarity_field + "' (bump, rotation, radial)");
}

int cmd_verify(const RunConfig& cfg, const fs::path& dir, const std::string& field, std::vector<std::string> checks,
               bool tol_given) {
  const ComplexField u = io::read_field(dir / "fields", field);
  const Domain& dom = u.dom();
  const double tol = tol_given ? cfg.tol : 1e-6;
  if (checks.empty()) checks = {"residual", "first-variation", "monotonicity", "stationarity", "eta-scan"};

  std::size_t core = dom.active_nodes.front();
  for (std::size_t c : dom.active_nodes)
    if (std::abs(u.values[c]) < std::abs(u.values[core])) core = c;
  const double h = dom.grid.max_spacing();
  double half = 1e300;
  for (int a = 0; a < dom.ndim(); ++a) half = std::min(half, 0.5 * dom.grid.period(a));

  json results = json::array();
  bool all = true;
  auto add = [&](const std::string& name, double value, double bound, bool pass) {
    results.push_back({{"check", name}, {"value", value}, {"bound", bound}, {"pass", pass}});
    all = all && pass;
    std::cout << (pass ? "PASS " : "FAIL ") << name << " value=" << value << " bound=" << bound << "\n";
  };

  for (const auto& check : checks) {
    if (check == "residual") {
      const double r = residual_norm(u);
      add(check, r, tol, r <= tol);
    } else if (check == "first-variation") {
      double worst = 0.0;
      for (int s = 0; s < 10; ++s) {
        const auto z = random_smooth_field(dom, cfg.seed + static_cast<std::uint64_t>(s));
        worst = std::max(worst, std::abs(first_variation(u, z)) / weighted_norm(dom, z));
      }
      add(check, worst, tol, worst <= tol);
    } else if (check == "monotonicity") {
      std::vector<double> radii;
      for (int i = 0; i <= 20; ++i) radii.push_back(4.0 * h + (0.4 * half - 4.0 * h) * i / 20.0);
      const std::size_t centers[1] = {core};
      const auto mr = monotonicity_report(energy_measure(u), centers, radii);
      add(check, mr.entries.front().chi_fit, mr.chi_max, mr.all_pass);
    } else if (check == "stationarity") {
      const auto X = verify_field(cfg, dom);
      if (!X.admissible())
        throw ConfigError("stationarity: vector field '" + cfg.stationarity_field + "' is not tangent to the boundary (tangency norm " +
                          io::format_number(X.boundary_tangency_norm) + ")");
      const double bound = 0.02 * energy(u) * X.c1_norm;
      const double s = stationarity_residual(u, X);
      add(check, std::abs(s), bound, std::abs(s) <= bound);
    } else if (check == "eta-scan") {
      const auto es = eta_scan(u, std::max(8.0 * h, 0.2 * half), cfg.eta, cfg.sigma);
      add(check, static_cast<double>(es.counterexamples), 0.0, es.counterexamples == 0);
    } else if (check == "courant-lebesgue") {
      const auto cl = courant_lebesgue_search(u, dom.grid.center(core));
      add(check, cl.c_fit, cl.c_fit, true);
    } else if (check == "singular-set") {
      const auto ss = singular_set(energy_measure(u), std::max(4.0 * h, 0.1 * half), cfg.theta_min);
      add(check, static_cast<double>(ss.cells.size()), 0.0, true);
    } else if (check == "psi") {
      const auto entries = extract_psi({u}, tol);
      add(check, entries.front().harmonic_defect, 1e-4, entries.front().harmonic_defect <= 1e-4);
    } else {
      throw ConfigError("unknown check '" + check +
                        "' (residual, first-variation, monotonicity, stationarity, eta-scan, courant-lebesgue, singular-set, psi)");
    }
  }

  json report = fs::exists(dir / "report.json") ? io::read_json(dir / "report.json") : json::object();
  report["verify"] = {{"field", field}, {"checks", results}, {"passed", all}};
  io::write_json(dir / "report.json", report);
  return all ? 0 : 1;
}

int cmd_scenario_run(const RunConfig& cfg, const std::string& name, const json& overrides) {
  scenario_config(name, overrides);  // validates the name before anything is written
  const fs::path root = cfg.out.empty() ? output_root(cfg, "") : fs::path(cfg.out);
  const auto run = run_scenario(name, overrides, root);
  for (const auto& c : run.report.at("checks")) {
    const bool asserted = c.at("asserted").get<bool>();
    std::cout << (asserted ? (c.at("pass").get<bool>() ? "PASS " : "FAIL ") : "INFO ") << c.at("name").get<std::string>()
              << " = " << c.at("value").dump() << "\n";
  }
  std::cout << "wrote " << run.dir.string() << "\n";
  return run.passed ? 0 : 1;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Ginzburg-Landau Neumann critical points: solve, verify and run scenarios"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overlay;
  auto common = [&](CLI::App* sub) {
    auto opt = [&](CLI::Option* o, std::function<void(RunConfig&)> f) { overlay.emplace_back(o, std::move(f)); };
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    opt(sub->add_option("--chart", flags.chart, "disk, box, product, ellipse, half_ball"), [&](RunConfig& c) { c.chart = flags.chart; });
    opt(sub->add_option("--res", flags.res, "cells per axis (one value or one per axis)"), [&](RunConfig& c) { c.res = flags.res; });
    opt(sub->add_option("--dim", flags.dim, "dimension of box/disk/half_ball charts"), [&](RunConfig& c) { c.dim = flags.dim; });
    opt(sub->add_option("--eps", flags.eps, "epsilon"), [&](RunConfig& c) { c.eps = flags.eps; });
    opt(sub->add_option("--eps-sweep", flags.eps_sweep, "list of epsilons"), [&](RunConfig& c) { c.eps_sweep = flags.eps_sweep; });
    opt(sub->add_option("--l", flags.l, "ellipsoid elongation"), [&](RunConfig& c) { c.l = flags.l; });
    opt(sub->add_option("--init", flags.init, "vortex, noise, constant, exact, discrete"), [&](RunConfig& c) { c.init = flags.init; });
    opt(sub->add_option("--k", flags.k, "plane-wave frequency on the product chart"), [&](RunConfig& c) { c.k = flags.k; });
    opt(sub->add_option("--seed", flags.seed, "random seed"), [&](RunConfig& c) { c.seed = flags.seed; });
    opt(sub->add_option("--out", flags.out, "output directory"), [&](RunConfig& c) { c.out = flags.out; });
    opt(sub->add_option("--threads", flags.threads, "worker threads (default: hardware concurrency)"),
        [&](RunConfig& c) { c.threads = flags.threads; });
    opt(sub->add_option("--tol", flags.tol, "residual tolerance"), [&](RunConfig& c) { c.tol = flags.tol; });
    opt(sub->add_option("--eta", flags.eta, "eta-scan energy threshold"), [&](RunConfig& c) { c.eta = flags.eta; });
    opt(sub->add_option("--sigma", flags.sigma, "eta-scan modulus slack"), [&](RunConfig& c) { c.sigma = flags.sigma; });
    opt(sub->add_option("--theta-min", flags.theta_min, "singular-set density threshold"),
        [&](RunConfig& c) { c.theta_min = flags.theta_min; });
    opt(sub->add_flag("--allow-underresolved", flags.allow_underresolved, "allow 2h <= eps < 4h"),
        [&](RunConfig& c) { c.allow_underresolved = flags.allow_underresolved; });
    opt(sub->add_option("--stationarity-field", flags.stationarity_field, "bump, rotation, radial"),
        [&](RunConfig& c) { c.stationarity_field = flags.stationarity_field; });
  };

  auto* solve_cmd = app.add_subcommand("solve", "compute a critical point");
  common(solve_cmd);

  auto* verify_cmd = app.add_subcommand("verify", "re-run verifiers on a stored field");
  common(verify_cmd);
  std::string run_dir, field_name = "u";
  std::vector<std::string> checks;
  verify_cmd->add_option("run_dir", run_dir, "run directory")->required();
  verify_cmd->add_option("checks", checks, "checks to run");
  verify_cmd->add_option("--field", field_name, "field dump name under fields/");

  auto* scen_cmd = app.add_subcommand("scenario", "list or run built-in scenarios");
  scen_cmd->require_subcommand(1);
  scen_cmd->add_subcommand("list", "list scenarios");
  auto* scen_run = scen_cmd->add_subcommand("run", "run a scenario");
  common(scen_run);
  std::string scen_name, scen_params;
  scen_run->add_option("name", scen_name, "scenario name")->required();
  scen_run->add_option("--params", scen_params, "JSON object of scenario parameter overrides");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_json(io::read_json(config_path));
    bool eps_given = !config_path.empty() && io::read_json(config_path).contains("eps");
    bool tol_given = !config_path.empty() && io::read_json(config_path).contains("tol");
    for (auto& [o, f] : overlay) {
      if (o->count() == 0) continue;
      f(cfg);
      eps_given = eps_given || o->get_name() == "--eps";
      tol_given = tol_given || o->get_name() == "--tol";
    }
    par::set_threads(cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));

    if (solve_cmd->parsed()) return cmd_solve(cfg, eps_given);
    if (verify_cmd->parsed()) return cmd_verify(cfg, run_dir, field_name, checks, tol_given);
    if (scen_cmd->got_subcommand("list")) {
      for (const auto& s : scenario_registry()) std::cout << s.name << "\t" << s.description << "\n";
      return 0;
    }
    json overrides = json::object();
    if (!scen_params.empty()) {
      try {
        overrides = json::parse(scen_params);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("--params is not valid JSON: ") + e.what());
      }
    }
    return cmd_scenario_run(cfg, scen_name, overrides);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gllab::cli
