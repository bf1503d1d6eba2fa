#include "gllab/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <numbers>
#include <random>

#include "gllab/analysis.hpp"
#include "gllab/error.hpp"
#include "gllab/hodge.hpp"
#include "gllab/minmax.hpp"
#include "gllab/parallel.hpp"
#include "gllab/solver.hpp"

namespace gllab {

namespace {

using io::json;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

class Run {
 public:
  Run(fs::path dir, json config) : dir_(std::move(dir)), config_(std::move(config)) {}

  const json& cfg() const { return config_; }
  fs::path fields() const { return dir_ / "fields"; }
  fs::path tables() const { return dir_ / "tables"; }
  json& results() { return results_; }

  // Runs one stage, timing it and tagging any failure with the stage name.
  void stage(const std::string& name, const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const ConfigError& e) {
      throw ConfigError("stage " + name + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("stage " + name + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error("stage " + name + ": " + e.what());
    }
    timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  void check_le(const std::string& name, double value, double bound, bool asserted = true) {
    add(name, value, json(bound), "<=", value <= bound, asserted);
  }
  void check_ge(const std::string& name, double value, double bound, bool asserted = true) {
    add(name, value, json(bound), ">=", value >= bound, asserted);
  }
  void check_in(const std::string& name, double value, double lo, double hi, bool asserted = true) {
    add(name, value, json::array({lo, hi}), "in", value >= lo && value <= hi, asserted);
  }
  void check_true(const std::string& name, bool ok, bool asserted = true) {
    add(name, ok ? 1.0 : 0.0, json(1.0), "==", ok, asserted);
  }
  void record(const std::string& name, double value) { add(name, value, json(nullptr), "recorded", true, false); }

  bool passed() const {
    for (const auto& c : checks_)
      if (c["asserted"].get<bool>() && !c["pass"].get<bool>()) return false;
    return true;
  }
  const json& checks() const { return checks_; }
  const json& timings() const { return timings_; }

 private:
  void add(const std::string& name, double value, json bound, const std::string& op, bool pass, bool asserted) {
    checks_.push_back({{"name", name}, {"value", std::isfinite(value) ? json(value) : json(io::format_number(value))},
                       {"bound", std::move(bound)}, {"op", op}, {"asserted", asserted}, {"pass", pass}});
  }

  fs::path dir_;
  json config_;
  json results_ = json::object();
  json checks_ = json::array();
  json timings_ = json::object();
};

std::string label(double x) { return io::format_number(x); }

std::string ijk_label(const Domain& dom, std::size_t c) {
  const auto q = dom.grid.ijk(c);
  std::string s = std::to_string(q[0]);
  for (int a = 1; a < dom.ndim(); ++a) s += ":" + std::to_string(q[a]);
  return s;
}

SolverConfig solver_config(const json& cfg) {
  SolverConfig sc;
  sc.residual_tol = cfg.at("tol").get<double>();
  return sc;
}

DiscreteOneForm random_form(DomainPtr dom, std::uint64_t seed) {
  DiscreteOneForm w(dom);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int a = 0; a < dom->ndim(); ++a)
    for (std::size_t c = 0; c < dom->size(); ++c) {
      const double x = nd(rng);
      if (w.has_link(a, c)) w.comp[a][c] = x;
    }
  return w;
}

struct HodgeNumbers {
  double orthogonality = 0.0;  // worst |<p, q>| / ‖w‖^2 over distinct parts
  double harmonic_fraction = 0.0;
  double reconstruction = 0.0;
};

HodgeNumbers hodge_numbers(const DiscreteOneForm& w, const HodgeSplit& s) {
  HodgeNumbers h;
  const double n2 = inner(w, w);
  h.orthogonality = std::max({std::abs(inner(s.exact, s.coexact)), std::abs(inner(s.exact, s.harmonic)),
                              std::abs(inner(s.coexact, s.harmonic))}) / n2;
  h.harmonic_fraction = norm(s.harmonic) / std::sqrt(n2);
  h.reconstruction = norm(w - s.exact - s.coexact - s.harmonic) / std::sqrt(n2);
  return h;
}

// Product chart S^1 x hemisphere with the plane waves u_k.
void exact_product(Run& run) {
  const auto& cfg = run.cfg();
  const auto ks = cfg.at("ks").get<std::vector<int>>();
  const auto s_res = cfg.at("s_res").get<std::vector<int>>();
  const int r_res = cfg.at("r_res").get<int>();
  const int t_res = cfg.at("theta_res").get<int>();
  if (s_res.size() < 2) throw ConfigError("s_res needs at least two resolutions");

  io::CsvWriter conv(run.tables() / "product_convergence.csv",
                     {"k", "s_res", "epsilon", "residual_max", "energy", "energy_exact", "energy_rel_error"});
  json& out = run.results()["product"];
  for (int k : ks) {
    const double eps = std::exp(-static_cast<double>(k * k));
    const double a2 = 1.0 - k * k * eps * eps;
    const double e_exact = 4.0 * kPi * kPi * (a2 * k * k / 2.0 + std::pow(k, 4) * eps * eps / 4.0);
    const std::string kl = "k" + std::to_string(k);
    std::vector<double> resmax;
    double rel_fine = 0.0;
    ComplexField finest;
    run.stage("residual_" + kl, [&] {
      for (int ns : s_res) {
        const int res[3] = {ns, r_res, t_res};
        auto dom = build_chart(ChartId::product_s1_hemisphere, res, {});
        auto u = init_product_exact(dom, eps, k);
        const auto r = gl_residual(u);
        double mx = 0.0;
        for (const auto& z : r) mx = std::max(mx, std::abs(z));
        const double e = energy(u);
        rel_fine = (e - e_exact) / e_exact;
        resmax.push_back(mx);
        conv << k << ns << eps << mx << e << e_exact << rel_fine;
        conv.end_row();
        finest = std::move(u);
      }
    });
    const double ratio = resmax[resmax.size() - 2] / resmax.back();
    out[kl] = {{"epsilon", eps}, {"residual_max", resmax}, {"residual_ratio", ratio}, {"energy_exact", e_exact},
               {"energy_rel_error", rel_fine}};
    run.check_in("residual_ratio_" + kl, ratio, 3.5, 4.5);
    run.check_le("energy_rel_error_" + kl, std::abs(rel_fine), 0.005);

    run.stage("psi_" + kl, [&] {
      // The discrete-exact amplitude makes the field critical for the
      // discrete equation, which extract_psi requires.
      auto u = init_product_discrete(finest.domain, eps, k);
      const auto entries = extract_psi({u}, 1e-6);
      const auto& e = entries.front();
      DiscreteOneForm ds(u.domain);
      for (std::size_t c : u.dom().active_nodes)
        if (ds.has_link(0, c)) ds.comp[0][c] = 1.0;
      const double psi_ds = norm(e.psi - ds) / norm(ds);
      const auto mu = energy_measure(u);
      const double mass = mu.total();
      const double psi_half = 0.5 * inner(e.psi, e.psi);
      const double gap = std::abs(mass - psi_half) / mass;

      const auto split = hodge_decompose(ds);
      const double ds_recovery = norm(split.harmonic - ds) / norm(ds);

      out[kl]["psi"] = {{"harmonic_defect", e.harmonic_defect}, {"psi_minus_ds", psi_ds}, {"measure_mass", mass},
                        {"psi_energy", psi_half}, {"measure_gap", gap}, {"ds_recovery", ds_recovery},
                        {"d_norm", e.diagnostics.d_norm}, {"d_star_norm", e.diagnostics.d_star_norm},
                        {"normal_norm", e.diagnostics.normal_norm}};
      run.check_le("psi_harmonic_defect_" + kl, e.harmonic_defect, 1e-4);
      run.check_le("psi_minus_ds_" + kl, psi_ds, 2.0 * k * k * eps * eps + 1e-4);
      run.check_le("measure_gap_" + kl, gap, 0.01);
      run.check_le("ds_recovery_" + kl, ds_recovery, 1e-6);
      io::write_field(run.fields(), "product_" + kl, u, {{"k", k}});
      io::write_form(run.fields(), "psi_" + kl, e.psi);
    });
  }
}

std::vector<AdmissibleVectorField> disk_test_fields(const Domain& dom) {
  auto bump = [](double s) { return s < 1.0 ? std::pow(1.0 - s, 3) : 0.0; };
  auto sq = [](double x, double y) { return x * x + y * y; };
  std::vector<AdmissibleVectorField> xs;
  xs.push_back(make_vector_field(dom, [&](const Vec3& x) {
    const double s = bump(sq(x[0], x[1]) / 0.64);
    return Vec3{x[0] * s, x[1] * s, 0.0};
  }));
  xs.push_back(make_vector_field(dom, [&](const Vec3& x) {
    const double s = bump(sq(x[0] - 0.3, x[1]) / 0.16);
    return Vec3{s, 0.0, 0.0};
  }));
  xs.push_back(make_vector_field(dom, [&](const Vec3& x) {
    const double s = bump(sq(x[0], x[1] + 0.4) / 0.16);
    return Vec3{0.5 * s, s, 0.0};
  }));
  xs.push_back(make_vector_field(dom, [&](const Vec3& x) {
    const double s = bump(sq(x[0] + 0.2, x[1] - 0.3) / 0.25);
    return Vec3{x[1] * s, -x[0] * s + 0.3 * s, 0.0};
  }));
  xs.push_back(make_vector_field(dom, [&](const Vec3& x) {
    const double s = bump(sq(x[0], x[1]) / 0.81);
    return Vec3{x[0] * s + 0.2 * s, x[1] * s - 0.1 * s, 0.0};
  }));
  return xs;
}

ComplexField solve_disk_vortex(Run& run, double eps, int res, const std::string& name, SolveReport* report = nullptr) {
  ChartParams p;
  p.dim = 2;
  const int r[1] = {res};
  auto dom = build_chart(ChartId::disk, r, p);
  auto out = solve(init_vortex(dom, eps, {0.0, 0.0, 0.0}), solver_config(run.cfg()));
  if (!out.report.converged) throw NumericalError("disk vortex " + name + " did not converge: " + out.report.message);
  if (report) *report = out.report;
  return std::move(out.field);
}

std::size_t vortex_core(const ComplexField& u) {
  std::size_t best = u.dom().active_nodes.front();
  for (std::size_t c : u.dom().active_nodes)
    if (std::abs(u.values[c]) < std::abs(u.values[best])) best = c;
  return best;
}

void disk_vortex(Run& run) {
  const auto& cfg = run.cfg();
  const double eps = cfg.at("eps").get<double>();
  const int res = cfg.at("res").get<int>();
  json& out = run.results();

  ComplexField u;
  SolveReport rep;
  run.stage("solve", [&] {
    u = solve_disk_vortex(run, eps, res, "base", &rep);
    out["solve"] = io::to_json(rep);
    out["solve"]["spacing"] = u.dom().grid.max_spacing();
    io::write_energy_history(run.tables() / "energy_history.csv", rep);
    io::write_field(run.fields(), "vortex", u, {{"scenario", "disk-vortex"}});
  });
  const double e_total = energy(u);
  run.check_le("residual", rep.final_residual, 1e-6);
  run.check_le("max_modulus", rep.max_modulus, 1.0 + 1e-8);

  run.stage("first_variation", [&] {
    const int samples = cfg.at("zeta_samples").get<int>();
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      const auto z = random_smooth_field(u.dom(), seed + static_cast<std::uint64_t>(s));
      worst = std::max(worst, std::abs(first_variation(u, z)) / weighted_norm(u.dom(), z));
    }
    out["first_variation_worst"] = worst;
    run.check_le("first_variation", worst, 1e-6);
  });

  const std::size_t core = vortex_core(u);
  const auto mu = energy_measure(u);
  const double h = u.dom().grid.max_spacing();
  const double radius = u.dom().grid.params.radius;

  run.stage("monotonicity", [&] {
    std::vector<double> radii;
    constexpr int kRadii = 21;
    for (int i = 0; i < kRadii; ++i) radii.push_back(4.0 * h + (0.4 * radius - 4.0 * h) * i / (kRadii - 1));
    const std::size_t centers[1] = {core};
    const auto mr = monotonicity_report(mu, centers, radii);
    const auto& e = mr.entries.front();
    io::CsvWriter csv(run.tables() / "monotonicity.csv", {"center_ijk", "r", "value", "pass"});
    bool ok = true;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const bool step_ok = i == 0 || e.profile.values[i] >= (1.0 - mr.slack) * e.profile.values[i - 1];
      ok = ok && step_ok;
      csv << ijk_label(u.dom(), core) << radii[i] << e.profile.values[i] << std::string(step_ok ? "pass" : "fail");
      csv.end_row();
    }
    out["monotonicity"] = {{"center", ijk_label(u.dom(), core)}, {"chi_fit", e.chi_fit}, {"slack", mr.slack}};
    run.check_true("monotone_within_slack", ok);
    run.check_le("chi_fit", e.chi_fit, 0.05);
  });

  run.stage("courant_lebesgue", [&] {
    const auto sweep = cfg.at("eps_sweep").get<std::vector<double>>();
    io::CsvWriter csv(run.tables() / "courant_lebesgue.csv", {"epsilon", "r", "value", "argmin"});
    json entries = json::array();
    double lo = 1e300, hi = 0.0;
    for (double e : sweep) {
      // Same h = eps / 4 ratio as the base run.
      const int r = static_cast<int>(std::lround(res * eps / e));
      const auto v = solve_disk_vortex(run, e, r, "eps=" + label(e));
      const auto cl = courant_lebesgue_search(v, v.dom().grid.center(vortex_core(v)));
      for (std::size_t i = 0; i < cl.radii.size(); ++i) {
        csv << e << cl.radii[i] << cl.values[i] << static_cast<int>(cl.radii[i] == cl.radius);
        csv.end_row();
      }
      entries.push_back({{"epsilon", e}, {"res", r}, {"radius", cl.radius}, {"value", cl.value}, {"bulk", cl.bulk},
                         {"c_fit", cl.c_fit}, {"radii_searched", cl.radii.size()}});
      lo = std::min(lo, cl.c_fit);
      hi = std::max(hi, cl.c_fit);
    }
    out["courant_lebesgue"] = entries;
    run.check_le("courant_lebesgue_c_fit_spread", hi / lo, 2.0);
  });

  run.stage("eta_scan", [&] {
    const auto es = eta_scan(u, cfg.at("eta_radius").get<double>(), cfg.at("eta").get<double>(), cfg.at("sigma").get<double>());
    io::CsvWriter csv(run.tables() / "eta_scan.csv", {"center_ijk", "r", "scaled_energy", "min_modulus", "pass"});
    for (const auto& c : es.centers) {
      csv << ijk_label(u.dom(), c.center) << es.ball_radius << c.scaled_energy << c.min_modulus
          << std::string(c.counterexample ? "fail" : "pass");
      csv.end_row();
    }
    out["eta_scan"] = {{"ball_radius", es.ball_radius}, {"eta", es.eta}, {"sigma", es.sigma},
                       {"centers", es.centers.size()}, {"energy_small", es.passing}, {"counterexamples", es.counterexamples}};
    run.check_le("eta_counterexamples", static_cast<double>(es.counterexamples), 0.0);
    run.record("eta_energy_small_centers", static_cast<double>(es.passing));
  });

  run.stage("singular_set", [&] {
    const auto ss = singular_set(mu, cfg.at("r_probe").get<double>(), cfg.at("theta_min").get<double>());
    io::CsvWriter csv(run.tables() / "singular_set.csv", {"center_ijk", "r", "value", "pass"});
    for (std::size_t i = 0; i < ss.cells.size(); ++i) {
      csv << ijk_label(u.dom(), ss.cells[i]) << ss.r_probe << ss.density[i] << std::string("pass");
      csv.end_row();
    }
    out["singular_set"] = {{"cells", ss.cells.size()}, {"max_density", ss.max_density}, {"r_probe", ss.r_probe},
                           {"theta_min", ss.theta_min}};
    bool contains_core = std::binary_search(ss.cells.begin(), ss.cells.end(), core);
    run.check_true("singular_set_contains_core", contains_core);
    run.record("singular_set_max_density", ss.max_density);
    run.check_le("density_upper_bound", ss.max_density, 4.0 * e_total / mu.log_eps);
  });

  run.stage("stationarity", [&] {
    const auto fine = solve_disk_vortex(run, eps, 2 * res, "refined");
    const double e_fine = energy(fine);
    const auto xs = disk_test_fields(u.dom());
    const auto xs_fine = disk_test_fields(fine.dom());
    io::CsvWriter csv(run.tables() / "stationarity.csv", {"field", "res", "residual", "ratio"});
    json entries = json::array();
    double worst = 0.0, worst_gain = 1e300;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double s0 = stationarity_residual(u, xs[i]);
      const double s1 = stationarity_residual(fine, xs_fine[i]);
      const double r0 = std::abs(s0) / (e_total * xs[i].c1_norm);
      const double r1 = std::abs(s1) / (e_fine * xs_fine[i].c1_norm);
      csv << static_cast<int>(i) << res << s0 << r0;
      csv.end_row();
      csv << static_cast<int>(i) << 2 * res << s1 << r1;
      csv.end_row();
      entries.push_back({{"field", i}, {"residual", s0}, {"residual_refined", s1}, {"ratio", r0}, {"ratio_refined", r1}});
      worst = std::max({worst, r0, r1});
      worst_gain = std::min(worst_gain, r0 / r1);
    }
    // A Killing field of the disk: the integrand cancels exactly.
    const auto rot = make_vector_field(u.dom(), [](const Vec3& x) { return Vec3{-x[1], x[0], 0.0}; });
    const double s_rot = stationarity_residual(u, rot);
    out["stationarity"] = {{"fields", entries}, {"rotation", s_rot}};
    run.check_le("stationarity_ratio", worst, 0.02);
    run.check_ge("stationarity_refinement_gain", worst_gain, 2.0);
    run.record("stationarity_rotation", s_rot);
  });
}

void ellipsoid_minmax(Run& run) {
  const auto& cfg = run.cfg();
  const auto sweep = cfg.at("eps_sweep").get<std::vector<double>>();
  const auto ls = cfg.at("l").get<std::vector<double>>();
  const double cells = cfg.at("cells_per_eps").get<double>();
  const int budget = cfg.at("flow_budget").get<int>();
  const int radial = cfg.at("radial").get<int>();
  const int angular = cfg.at("angular").get<int>();
  json& out = run.results();
  out["runs"] = json::array();

  io::CsvWriter conc(run.tables() / "concentration.csv", {"l", "epsilon", "rho", "fraction"});
  for (double l : ls) {
    std::vector<double> tube8;
    for (double eps : sweep) {
      const std::string tag = "l" + label(l) + "_eps" + label(eps);
      const int nr = static_cast<int>(std::lround(cells / eps));
      const int res[2] = {nr, static_cast<int>(std::lround(2.0 * l * nr))};
      run.stage("minmax_" + tag, [&] {
        auto fam = sweep_family(eps, l, res, radial, angular);
        const double lip = fam.lipschitz;
        const auto rep = mountain_pass(fam, budget);

        bool boundary_rule = true;
        for (const auto& m : fam.members) {
          if (!m.on_boundary) continue;
          for (std::size_t c : fam.domain->active_nodes) boundary_rule = boundary_rule && std::abs(m.field.values[c] - m.y) <= 1e-12;
        }
        bool trace_monotone = true;
        for (std::size_t s = 1; s < rep.c_trace.size(); ++s) trace_monotone = trace_monotone && rep.c_trace[s] <= rep.c_trace[s - 1];

        const auto mu = energy_measure(rep.polished, true, Potential::modified);
        const double radii[3] = {4.0 * eps, 8.0 * eps, 16.0 * eps};
        const auto cr = equator_concentration(mu, radii);
        for (std::size_t i = 0; i < 3; ++i) {
          conc << l << eps << radii[i] << cr.fractions[i];
          conc.end_row();
        }
        tube8.push_back(cr.fractions[1]);

        // Quartic and modified residuals must agree wherever |u| <= 1.
        const auto rq = gl_residual(rep.polished, Potential::quartic);
        const auto rm = gl_residual(rep.polished, Potential::modified);
        double mismatch = 0.0;
        for (std::size_t c : fam.domain->active_nodes)
          if (std::abs(rep.polished.values[c]) <= 1.0) mismatch = std::max(mismatch, std::abs(rq[c] - rm[c]));

        const auto cur = u_cross_du(rep.polished);
        const auto split = hodge_decompose(cur);
        const double harm = norm(split.harmonic) / norm(cur);

        io::CsvWriter traj(run.tables() / ("member_energy_" + tag + ".csv"), {"y_index", "step", "energy"});
        for (std::size_t m = 0; m < rep.member_energy.size(); ++m)
          for (std::size_t s = 0; s < rep.member_energy[m].size(); ++s) {
            traj << m << s << rep.member_energy[m][s];
            traj.end_row();
          }
        io::write_field(run.fields(), "minmax_" + tag, rep.polished, {{"l", l}, {"converged", rep.polish_converged}});

        const double dz = std::abs(rep.vortex_location[1]);
        out["runs"].push_back({{"l", l}, {"epsilon", eps}, {"resolution", {res[0], res[1]}},
                               {"members", fam.members.size()}, {"lipschitz", lip}, {"c_initial", rep.c_initial},
                               {"c_eps", rep.c_eps}, {"c_refined", rep.c_refined}, {"energy_over_log_eps", rep.energy_over_log_eps},
                               {"argmax_y", {rep.argmax_y.real(), rep.argmax_y.imag()}},
                               {"refined_y", {rep.refined_y.real(), rep.refined_y.imag()}},
                               {"polished_energy", rep.polished_energy}, {"polished_residual", rep.polished_residual},
                               {"polish_converged", rep.polish_converged}, {"polish_message", rep.polish_message},
                               {"vortex_location", rep.vortex_location}, {"vortex_min_modulus", rep.vortex_min_modulus},
                               {"vortex_arc_distance_cells", rep.vortex_boundary_distance},
                               {"tube_radii", cr.tube_radii}, {"tube_fractions", cr.fractions},
                               {"current_harmonic_fraction", harm}, {"quartic_modified_mismatch", mismatch}});
        run.check_in("c_over_log_eps_" + tag, rep.energy_over_log_eps, 0.1, 50.0);
        run.check_true("boundary_rule_" + tag, boundary_rule);
        run.check_true("c_trace_non_increasing_" + tag, trace_monotone);
        run.check_le("vortex_arc_distance_cells_" + tag, rep.vortex_boundary_distance, 2.0);
        run.check_le("vortex_equator_offset_" + tag, dz, 0.1 * l);
        run.check_ge("tube_fraction_8eps_" + tag, cr.fractions[1], 0.5);
        run.check_le("quartic_modified_mismatch_" + tag, mismatch, 1e-10);
        run.record("polished_residual_" + tag, rep.polished_residual);
        run.record("current_harmonic_fraction_" + tag, harm);
      });
    }
    bool trend = true;
    for (std::size_t i = 1; i < tube8.size(); ++i) trend = trend && tube8[i] >= tube8[i - 1];
    run.check_true("tube_fraction_trend_l" + label(l), trend);
  }

  run.stage("harmonic_forms", [&] {
    const int nr = static_cast<int>(std::lround(cells / sweep.front()));
    const double l = ls.back();
    const int res[2] = {nr, static_cast<int>(std::lround(2.0 * l * nr))};
    ChartParams p;
    p.elongation = l;
    auto dom = build_chart(ChartId::half_ellipse_rz, res, p);
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    double harm = 0.0, orth = 0.0;
    for (int i = 0; i < cfg.at("random_forms").get<int>(); ++i) {
      const auto w = random_form(dom, seed + static_cast<std::uint64_t>(i));
      const auto hn = hodge_numbers(w, hodge_decompose(w));
      harm = std::max(harm, hn.harmonic_fraction);
      orth = std::max(orth, hn.orthogonality);
    }
    out["harmonic_forms"] = {{"max_harmonic_fraction", harm}, {"max_orthogonality", orth}};
    run.check_le("ellipsoid_harmonic_fraction", harm, 1e-5);
    run.check_le("hodge_orthogonality", orth, 1e-8);
  });
}

void half_ball_reflection(Run& run) {
  const auto& cfg = run.cfg();
  const double eps = cfg.at("eps").get<double>();
  ChartParams p;
  p.dim = 2;
  const int r[1] = {cfg.at("res").get<int>()};
  auto dom = build_chart(ChartId::half_ball, r, p);
  json& out = run.results();

  run.stage("solve", [&] {
    // Newton straight from a vortex on the symmetry axis; the flow would
    // push the vortex out through the boundary.
    SolverConfig sc = solver_config(cfg);
    sc.newton_after = 1e300;
    auto res = solve(init_vortex(dom, eps, {0.0, cfg.at("vortex_height").get<double>(), 0.0}), sc);
    if (!res.report.converged) throw NumericalError("half-ball solve did not converge: " + res.report.message);
    io::write_energy_history(run.tables() / "energy_history.csv", res.report);
    const auto rr = reflect_even(res.field);
    out["solve"] = io::to_json(res.report);
    out["reflection"] = {{"half_interior_residual", rr.half_interior_residual},
                         {"full_interior_residual", rr.full_interior_residual},
                         {"neumann_violation", rr.neumann_violation},
                         {"half_energy", energy(res.field)},
                         {"full_energy", energy(rr.full)}};
    run.check_true("reflection_within_bound", rr.within_bound);
    run.check_true("solution_not_flagged", !rr.neumann_flagged);
    run.record("vortex_min_modulus", std::abs(res.field.values[vortex_core(res.field)]));
    io::write_field(run.fields(), "half", res.field);
    io::write_field(run.fields(), "full", rr.full);
  });

  run.stage("negative_control", [&] {
    ComplexField x(dom, eps);
    const int last = dom->ndim() - 1;
    for (std::size_t c : dom->active_nodes) x.values[c] = dom->grid.center(c)[last];
    const auto rr = reflect_even(x);
    out["negative_control"] = {{"neumann_violation", rr.neumann_violation}, {"flagged", rr.neumann_flagged}};
    run.check_true("negative_control_flagged", rr.neumann_flagged);
  });
}

const std::vector<ScenarioInfo>& registry() {
  static const std::vector<ScenarioInfo> r = {
      {"exact-product", "plane waves on S^1 x hemisphere: residual order, energy, harmonic phase, measure gap",
       {{"ks", {2, 3}}, {"s_res", {64, 128}}, {"r_res", 16}, {"theta_res", 8}}},
      {"disk-vortex", "flat-disk Neumann vortex: criticality, monotonicity, Courant-Lebesgue, eta-scan, singular set, stationarity",
       {{"eps", 0.05}, {"res", 160}, {"tol", 1e-8}, {"eps_sweep", {0.1, 0.05, 0.025}}, {"zeta_samples", 10},
        {"seed", 1}, {"eta", 0.05}, {"sigma", 0.25}, {"eta_radius", 0.2}, {"theta_min", 1.0}, {"r_probe", 0.1}}},
      {"ellipsoid-minmax", "axisymmetric min-max on solid ellipsoids: sweep, mountain pass, equator concentration",
       {{"eps_sweep", {0.1, 0.05, 0.025}}, {"l", {1.5, 3.0}}, {"cells_per_eps", 4.0}, {"flow_budget", 5},
        {"radial", 8}, {"angular", 16}, {"seed", 7}, {"random_forms", 10}}},
      {"half-ball-reflection", "even reflection of a half-disk Neumann solution and the odd negative control",
       {{"eps", 0.05}, {"res", 160}, {"tol", 1e-8}, {"vortex_height", 0.5}}},
  };
  return r;
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_registry() { return registry(); }

io::json scenario_config(const std::string& name, const io::json& overrides) {
  for (const auto& s : registry()) {
    if (s.name != name) continue;
    json cfg = s.defaults;
    for (const auto& [k, v] : overrides.items()) {
      if (!cfg.contains(k)) throw ConfigError("scenario " + name + " has no parameter '" + k + "'");
      if (cfg[k].is_number() && !v.is_number()) throw ConfigError("parameter '" + k + "' must be a number");
      if (cfg[k].is_array() && !v.is_array()) throw ConfigError("parameter '" + k + "' must be a list");
      cfg[k] = v;
    }
    return cfg;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

ScenarioRun run_scenario(const std::string& name, const io::json& overrides, const std::filesystem::path& out_root) {
  json cfg = scenario_config(name, overrides);
  ScenarioRun result;
  result.dir = out_root / name;
  result.config = cfg;
  fs::create_directories(result.dir / "fields");
  fs::create_directories(result.dir / "tables");
  io::write_json(result.dir / "config.json", cfg);

  Run run(result.dir, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const std::time_t started = std::time(nullptr);
  try {
    if (name == "exact-product") exact_product(run);
    else if (name == "disk-vortex") disk_vortex(run);
    else if (name == "ellipsoid-minmax") ellipsoid_minmax(run);
    else half_ball_reflection(run);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad scenario parameter: ") + e.what());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  result.passed = run.passed();
  result.report = {{"scenario", name}, {"config_hash", io::config_hash(cfg)}, {"results", run.results()},
                   {"checks", run.checks()}, {"passed", result.passed}};
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&started));
  result.metadata = {{"started", stamp}, {"seconds", seconds}, {"stage_seconds", run.timings()},
                     {"threads", par::threads()}, {"config_hash", io::config_hash(cfg)}};
  io::write_json(result.dir / "report.json", result.report);
  io::write_json(result.dir / "metadata.json", result.metadata);
  return result;
}

const io::json& find_check(const io::json& report, const std::string& name) {
  for (const auto& c : report.at("checks"))
    if (c.at("name") == name) return c;
  throw Error("report has no check named " + name);
}

}  // namespace gllab
