#include "gllab/minmax.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gllab/error.hpp"

namespace gllab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_ellipse(const Domain& dom, const char* what) {
  if (dom.grid.chart != ChartId::half_ellipse_rz) throw ConfigError(std::string(what) + ": field is not on the half_ellipse_rz chart");
}

// Distance from the origin to the half-ellipse boundary along direction phi.
double ray_extent(double phi, double l) {
  const double c = std::cos(phi), s = std::sin(phi);
  return 1.0 / std::sqrt(c * c + s * s / (l * l));
}

}  // namespace

double reduced_energy(const ComplexField& rf) {
  require_ellipse(rf.dom(), "reduced_energy");
  return energy(rf, Potential::modified);
}

cplx sweep_profile(cplx x, cplx y, double eps) {
  const double ay = std::abs(y);
  if (ay >= 1.0) return y / ay;
  const cplx w = -y / (1.0 - ay);
  const cplx d = x - w;
  const double t = std::abs(d);
  if (t == 0.0) return {0.0, 0.0};
  return std::min(t / eps, 1.0) * d / t;
}

cplx sweep_parameter(double frac, double phi, double l) {
  const double aw = frac * ray_extent(phi, l);
  return std::polar(aw / (1.0 + aw), phi + kPi);
}

ComplexField SweepFamily::member(cplx y) const {
  ComplexField f(domain, epsilon);
  for (std::size_t c : domain->active_nodes) {
    const Vec3 x = domain->grid.center(c);
    f.values[c] = sweep_profile(cplx{x[0], x[1]}, y, epsilon);
  }
  return f;
}

SweepFamily sweep_family(double eps, double l, std::span<const int> resolution, int radial, int angular) {
  if (radial < 8 || angular < 16) throw ConfigError("sweep_family: parameter resolution must be at least 8 radial x 16 angular");
  ChartParams p;
  p.elongation = l;
  SweepFamily fam;
  fam.epsilon = eps;
  fam.elongation = l;
  fam.radial = radial;
  fam.angular = angular;
  fam.domain = build_chart(ChartId::half_ellipse_rz, resolution, p);

  for (int i = 1; i < radial; ++i) fam.fractions.push_back(1.15 * static_cast<double>(i) / (radial - 1));
  auto make = [&](cplx y, int i, int j) {
    SweepMember m;
    m.y = y;
    m.radial_index = i;
    m.angular_index = j;
    m.on_boundary = i == radial;
    m.field = fam.member(y);
    m.energy = reduced_energy(m.field);
    fam.members.push_back(std::move(m));
  };

  make(cplx{0.0, 0.0}, 0, 0);
  for (int i = 1; i <= radial; ++i) {
    for (int j = 0; j < angular; ++j) {
      const double phi = 2.0 * kPi * j / angular;
      const cplx y = i == radial ? std::polar(1.0, phi + kPi) : sweep_parameter(fam.fractions[i - 1], phi, l);
      make(y, i, j);
    }
  }
  for (const auto& m : fam.members) fam.max_energy = std::max(fam.max_energy, m.energy);

  // Sampled Lipschitz constant over radial and angular neighbours.
  const auto& dom = *fam.domain;
  auto idx = [&](int i, int j) -> std::size_t { return i == 0 ? 0 : 1 + (i - 1) * angular + ((j % angular) + angular) % angular; };
  auto dist = [&](const SweepMember& a, const SweepMember& b) {
    std::vector<cplx> d(dom.size());
    for (std::size_t c = 0; c < dom.size(); ++c) d[c] = a.field.values[c] - b.field.values[c];
    const double dy = std::abs(a.y - b.y);
    return dy > 0.0 ? std::sqrt(weighted_dot(dom, d, d) / dom.volume) / dy : 0.0;
  };
  for (int i = 1; i <= radial; ++i)
    for (int j = 0; j < angular; ++j) {
      fam.lipschitz = std::max(fam.lipschitz, dist(fam.members[idx(i, j)], fam.members[idx(i, j + 1)]));
      fam.lipschitz = std::max(fam.lipschitz, dist(fam.members[idx(i, j)], fam.members[idx(i - 1, j)]));
    }
  return fam;
}

double distance_to_arc(double r, double z, double l) {
  constexpr int kSamples = 2000;
  auto dist = [&](double t) { return std::hypot(r - std::cos(t), z - l * std::sin(t)); };
  const double dt = kPi / kSamples;
  int best = 0;
  for (int s = 1; s <= kSamples; ++s)
    if (dist(-0.5 * kPi + dt * s) < dist(-0.5 * kPi + dt * best)) best = s;
  // Golden-section refinement inside the bracketing samples.
  double a = std::max(-0.5 * kPi, -0.5 * kPi + dt * (best - 1)), b = std::min(0.5 * kPi, -0.5 * kPi + dt * (best + 1));
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (dist(c) < dist(d)) b = d;
    else a = c;
  }
  return std::min(dist(0.5 * (a + b)), dist(-0.5 * kPi + dt * best));
}

MinMaxReport mountain_pass(SweepFamily& family, int flow_budget, const MountainPassOptions& opt) {
  if (family.members.empty()) throw ConfigError("mountain_pass: empty family");
  MinMaxReport rep;
  rep.epsilon = family.epsilon;
  rep.c_initial = family.max_energy;
  rep.c_trace.assign(static_cast<std::size_t>(flow_budget) + 1, 0.0);

  SolverConfig cfg;
  cfg.potential = Potential::modified;
  cfg.max_steps = flow_budget;
  cfg.residual_tol = 0.0;
  for (auto& m : family.members) {
    std::vector<double> traj(static_cast<std::size_t>(flow_budget) + 1, m.energy);
    if (flow_budget > 0) {
      auto out = gradient_flow(std::move(m.field), cfg);
      if (out.report.aborted) throw NumericalError("mountain_pass: " + out.report.message);
      m.field = std::move(out.field);
      for (const auto& h : out.report.energy_history) traj[static_cast<std::size_t>(h.step)] = h.energy;
      // Converged members stay put for the rest of the budget.
      for (std::size_t s = static_cast<std::size_t>(out.report.steps) + 1; s < traj.size(); ++s) traj[s] = traj[s - 1];
      m.energy = traj.back();
    }
    for (std::size_t s = 0; s < traj.size(); ++s) rep.c_trace[s] = std::max(rep.c_trace[s], traj[s]);
    rep.member_energy.push_back(std::move(traj));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < family.members.size(); ++i)
    if (family.members[i].energy > family.members[best].energy) best = i;
  rep.argmax_index = best;
  rep.argmax_y = family.members[best].y;
  rep.c_eps = family.members[best].energy;
  rep.energy_over_log_eps = rep.c_eps / std::abs(std::log(family.epsilon));

  // Pattern search over (fraction, angle) around the sampled argmax.
  ComplexField start = family.members[best].field;
  rep.refined_y = rep.argmax_y;
  rep.c_refined = rep.c_eps;
  const auto& bm = family.members[best];
  if (!bm.on_boundary && bm.radial_index > 0 && opt.refine_evaluations > 0) {
    double frac = family.fractions[static_cast<std::size_t>(bm.radial_index - 1)];
    double phi = 2.0 * kPi * bm.angular_index / family.angular;
    double dfrac = 0.5 * family.fractions[0];
    double dphi = kPi / family.angular;
    auto evaluate = [&](double f, double p, ComplexField* keep) {
      ++rep.refine_evaluations;
      auto out = gradient_flow(family.member(sweep_parameter(f, p, family.elongation)), cfg);
      const double e = out.report.energy_history.back().energy;
      if (keep) *keep = std::move(out.field);
      return e;
    };
    for (int halvings = 0; halvings < 4 && rep.refine_evaluations < opt.refine_evaluations;) {
      bool moved = false;
      const double cand[4][2] = {{frac + dfrac, phi}, {frac - dfrac, phi}, {frac, phi + dphi}, {frac, phi - dphi}};
      for (const auto& cd : cand) {
        if (cd[0] <= 0.0 || rep.refine_evaluations >= opt.refine_evaluations) continue;
        ComplexField f;
        const double e = evaluate(cd[0], cd[1], &f);
        if (e > rep.c_refined) {
          rep.c_refined = e;
          frac = cd[0];
          phi = cd[1];
          start = std::move(f);
          moved = true;
          break;
        }
      }
      if (!moved) {
        dfrac *= 0.5;
        dphi *= 0.5;
        ++halvings;
      }
    }
    rep.refined_y = sweep_parameter(frac, phi, family.elongation);
  }

  // Polish: short flow to relax the core profile, a phase solve for the far
  // field, then Newton, which can land on a saddle.
  SolverConfig pc;
  pc.potential = Potential::modified;
  pc.residual_tol = opt.polish_tol;
  pc.max_steps = opt.polish_flow_steps;
  ComplexField u = std::move(start);
  if (opt.polish_flow_steps > 0) u = gradient_flow(std::move(u), pc).field;
  if (opt.phase_sweeps > 0) {
    u = relax_phase(std::move(u), opt.phase_sweeps);
    // The phase solve barely constrains the core, so let it relax again.
    if (opt.polish_flow_steps > 0) u = gradient_flow(std::move(u), pc).field;
  }
  pc.max_newton = opt.polish_newton;
  auto nr = newton_polish(std::move(u), pc);
  rep.polished = std::move(nr.field);
  rep.polished_residual = residual_norm(rep.polished, Potential::modified);
  rep.polish_converged = rep.polished_residual <= opt.polish_tol;
  rep.polish_message = nr.report.message;
  rep.polished_energy = reduced_energy(rep.polished);

  const Domain& dom = rep.polished.dom();
  double mn = 1e300;
  std::size_t arg = 0;
  for (std::size_t c : dom.active_nodes) {
    const double a = std::abs(rep.polished.values[c]);
    if (a < mn) {
      mn = a;
      arg = c;
    }
  }
  const Vec3 x = dom.grid.center(arg);
  rep.vortex_location = {x[0], x[1]};
  rep.vortex_min_modulus = mn;
  rep.vortex_boundary_distance = distance_to_arc(x[0], x[1], family.elongation) / dom.grid.max_spacing();
  return rep;
}

ConcentrationReport equator_concentration(const EnergyMeasure& mu, std::span<const double> tube_radii) {
  const Domain& dom = *mu.domain;
  require_ellipse(dom, "equator_concentration");
  ConcentrationReport rep;
  const double total = par::sum(mu.cell_mass);
  for (double rho : tube_radii) {
    const double in = par::sum_of(dom.size(), [&](std::size_t c) {
      if (!dom.active(c)) return 0.0;
      const Vec3 x = dom.grid.center(c);
      return std::hypot(x[0] - 1.0, x[1]) < rho ? mu.cell_mass[c] : 0.0;
    });
    rep.tube_radii.push_back(rho);
    rep.fractions.push_back(total > 0.0 ? in / total : 0.0);
  }
  return rep;
}

ComplexField planted_equator_ring(DomainPtr dom, double eps) {
  require_ellipse(*dom, "planted_equator_ring");
  ComplexField u(dom, eps);
  for (std::size_t c : u.dom().active_nodes) {
    const Vec3 x = u.dom().grid.center(c);
    u.values[c] = std::tanh(std::hypot(x[0] - 1.0, x[1]) / eps);
  }
  return u;
}

}  // namespace gllab
