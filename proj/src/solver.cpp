#include "gllab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "gllab/error.hpp"
#include "gllab/linalg.hpp"

namespace gllab {

namespace {

// Reaction force -dP/du with P = W(|u|)/eps^2.
cplx reaction(Potential pot, cplx u, double eps) {
  const double t2 = std::norm(u);
  if (pot == Potential::quartic || t2 <= 1.0) return (1.0 - t2) * u / (eps * eps);
  const double t = std::sqrt(t2);
  return -2.0 * (t - 1.0) / t * u / (eps * eps);
}

// Hessian of P applied to d: [W''(t) uu^T/t^2 + W'(t)/t (I - uu^T/t^2)] d / eps^2.
cplx hessian_apply(Potential pot, cplx u, cplx d, double eps) {
  const double t2 = std::norm(u);
  const double ud = u.real() * d.real() + u.imag() * d.imag();
  if (pot == Potential::quartic || t2 <= 1.0) return ((t2 - 1.0) * d + 2.0 * ud * u) / (eps * eps);
  const double t = std::sqrt(t2);
  const double radial = 2.0;
  const double tangential = 2.0 * (t - 1.0) / t;
  return (tangential * d + (radial - tangential) * ud / t2 * u) / (eps * eps);
}

double step_for(const ComplexField& u, const SolverConfig& cfg) {
  return cfg.dt > 0.0 ? cfg.dt : dt_stability(u.epsilon);
}

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Sparse Cholesky factor of W + dt K over the active cells. Every flow
// step on a domain reuses it; the last few factors are cached.
class FlowFactor {
 public:
  FlowFactor(DomainPtr dom, double dt) : dom_(std::move(dom)), dt_(dt) {
    const Domain& d = *dom_;
    index_.assign(d.size(), -1);
    for (std::size_t i = 0; i < d.active_nodes.size(); ++i) index_[d.active_nodes[i]] = static_cast<int>(i);
    const int m = static_cast<int>(d.active_nodes.size());
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t c : d.active_nodes) {
      const int i = index_[c];
      t.emplace_back(i, i, d.node_weight[c]);
      for (int a = 0; a < d.ndim(); ++a) {
        const auto p = d.plus[a][c];
        if (p < 0) continue;
        const int j = index_[static_cast<std::size_t>(p)];
        const double k = dt * d.conductance[a][c];
        t.emplace_back(i, i, k);
        t.emplace_back(j, j, k);
        t.emplace_back(i, j, -k);
        t.emplace_back(j, i, -k);
      }
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(t.begin(), t.end());
    llt_.compute(a);
    if (llt_.info() != Eigen::Success) throw NumericalError("flow: factorisation of the implicit operator failed");
  }

  bool matches(const DomainPtr& dom, double dt) const { return dom == dom_ && dt == dt_; }

  void solve(const std::vector<cplx>& rhs, std::vector<cplx>& out) const {
    const Domain& d = *dom_;
    const auto m = static_cast<Eigen::Index>(d.active_nodes.size());
    Eigen::MatrixXd b(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
      const cplx v = rhs[d.active_nodes[static_cast<std::size_t>(i)]];
      b(i, 0) = v.real();
      b(i, 1) = v.imag();
    }
    const Eigen::MatrixXd x = llt_.solve(b);
    std::fill(out.begin(), out.end(), cplx{0.0, 0.0});
    for (Eigen::Index i = 0; i < m; ++i) out[d.active_nodes[static_cast<std::size_t>(i)]] = {x(i, 0), x(i, 1)};
  }

 private:
  DomainPtr dom_;
  double dt_;
  std::vector<int> index_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

std::shared_ptr<const FlowFactor> flow_factor(const DomainPtr& dom, double dt) {
  static std::mutex mu;
  static std::deque<std::shared_ptr<const FlowFactor>> cache;
  std::lock_guard<std::mutex> lock(mu);
  for (const auto& f : cache)
    if (f->matches(dom, dt)) return f;
  auto f = std::make_shared<const FlowFactor>(dom, dt);
  cache.push_front(f);
  if (cache.size() > 4) cache.pop_back();
  return f;
}

}  // namespace

std::vector<cplx> gl_residual(const ComplexField& u, Potential pot) {
  const Domain& dom = u.dom();
  std::vector<cplx> k(dom.size());
  apply_stiffness<cplx>(dom, u.values, k);
  par::for_each(dom.size(), [&](std::size_t c) {
    if (!dom.active(c)) {
      k[c] = 0.0;
      return;
    }
    k[c] = k[c] / dom.node_weight[c] - reaction(pot, u.values[c], u.epsilon);
  });
  return k;
}

double residual_norm(const ComplexField& u, Potential pot) {
  const auto r = gl_residual(u, pot);
  return weighted_rms(u.dom(), r);
}

double interior_residual_norm(const ComplexField& u, Potential pot) {
  const Domain& dom = u.dom();
  const auto r = gl_residual(u, pot);
  const double num = par::sum_of(dom.size(), [&](std::size_t c) {
    return dom.grid.mask[c] == CellKind::interior ? dom.node_weight[c] * std::norm(r[c]) : 0.0;
  });
  const double den = par::sum_of(dom.size(), [&](std::size_t c) {
    return dom.grid.mask[c] == CellKind::interior ? dom.node_weight[c] : 0.0;
  });
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

SolveResult gradient_flow(ComplexField u, const SolverConfig& cfg) {
  const Domain& dom = u.dom();
  const std::size_t n = dom.size();
  const double dt = step_for(u, cfg);
  SolveReport rep;

  const auto factor = flow_factor(u.domain, dt);

  double e_prev = energy(u, cfg.potential);
  double res = residual_norm(u, cfg.potential);
  rep.energy_history.push_back({0, e_prev, res, false});
  int increases = 0;
  std::vector<cplx> rhs(n);
  for (int step = 1; step <= cfg.max_steps && res > cfg.residual_tol; ++step) {
    par::for_each(n, [&](std::size_t c) {
      rhs[c] = dom.active(c)
                   ? dom.node_weight[c] * (u.values[c] + dt * reaction(cfg.potential, u.values[c], u.epsilon))
                   : cplx{0.0, 0.0};
    });
    factor->solve(rhs, u.values);
    u.zero_exterior();
    rep.steps = step;
    const double e = energy(u, cfg.potential);
    res = residual_norm(u, cfg.potential);
    if (step % cfg.record_every == 0) rep.energy_history.push_back({step, e, res, false});
    if (e > e_prev + 1e-10 * std::max(1.0, std::abs(e_prev))) {
      if (++increases >= 3) {
        rep.aborted = true;
        rep.message = "flow unstable: energy increased on 3 consecutive steps (dt too large?)";
        break;
      }
    } else {
      increases = 0;
    }
    e_prev = e;
  }
  rep.final_residual = res;
  rep.converged = res <= cfg.residual_tol && !rep.aborted;
  if (!rep.converged && rep.message.empty()) rep.message = "flow did not reach residual_tol within max_steps";
  rep.max_modulus = u.max_modulus();
  return {std::move(u), std::move(rep)};
}

ComplexField relax_phase(ComplexField u, int sweeps) {
  const Domain& dom = u.dom();
  const std::size_t n = dom.size();
  std::vector<int> index(n, -1);
  for (std::size_t i = 0; i < dom.active_nodes.size(); ++i) index[dom.active_nodes[i]] = static_cast<int>(i);
  const auto m = static_cast<Eigen::Index>(dom.active_nodes.size());
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    // Σ_links σ ρ_a ρ_b (ψ_b - ψ_a + θ_ab) = 0 at every node: the corrected
    // current has zero discrete divergence.
    std::vector<Eigen::Triplet<double>> t;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    double diag_mean = 0.0;
    for (std::size_t c : dom.active_nodes) {
      const int i = index[c];
      for (int a = 0; a < dom.ndim(); ++a) {
        const auto p = dom.plus[a][c];
        if (p < 0) continue;
        const int j = index[static_cast<std::size_t>(p)];
        const cplx ua = u.values[c], ub = u.values[static_cast<std::size_t>(p)];
        const double k = dom.conductance[a][c] * std::abs(ua) * std::abs(ub);
        const double theta = link_phase(ua, ub);
        t.emplace_back(i, i, k);
        t.emplace_back(j, j, k);
        t.emplace_back(i, j, -k);
        t.emplace_back(j, i, -k);
        b[i] += k * theta;
        b[j] -= k * theta;
        diag_mean += 2.0 * k;
      }
    }
    diag_mean /= static_cast<double>(std::max<Eigen::Index>(m, 1));
    for (Eigen::Index i = 0; i < m; ++i) t.emplace_back(i, i, 1e-10 * diag_mean);
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(a);
    if (llt.info() != Eigen::Success) throw NumericalError("relax_phase: factorisation failed");
    const Eigen::VectorXd psi = llt.solve(b);
    for (Eigen::Index i = 0; i < m; ++i) {
      const std::size_t c = dom.active_nodes[static_cast<std::size_t>(i)];
      u.values[c] *= std::polar(1.0, psi[i]);
    }
  }
  return u;
}

SolveResult newton_polish(ComplexField u, const SolverConfig& cfg) {
  const Domain& dom = u.dom();
  const std::size_t n = dom.size();
  const double eps = u.epsilon;
  SolveReport rep;
  double res = residual_norm(u, cfg.potential);
  rep.energy_history.push_back({0, energy(u, cfg.potential), res, true});

  // Preconditioner M = K + 2W/eps^2 = (2/eps^2)(W + (eps^2/2) K), SPD and
  // spectrally equivalent to the Jacobian away from its kernel.
  const double shift = 0.5 * eps * eps;
  const auto factor = flow_factor(u.domain, shift);
  const linalg::Operator<cplx> precond = [&](const std::vector<cplx>& r, std::vector<cplx>& z) {
    factor->solve(r, z);
    for (auto& v : z) v *= shift;
  };

  for (int it = 1; it <= cfg.max_newton && res > cfg.residual_tol; ++it) {
    const auto r = gl_residual(u, cfg.potential);
    std::vector<cplx> b(n);
    par::for_each(n, [&](std::size_t c) { b[c] = -dom.node_weight[c] * r[c]; });
    const ComplexField base = u;
    const linalg::Operator<cplx> op = [&](const std::vector<cplx>& x, std::vector<cplx>& y) {
      apply_stiffness<cplx>(dom, x, y);
      par::for_each(n, [&](std::size_t c) {
        if (dom.active(c)) y[c] += dom.node_weight[c] * hessian_apply(cfg.potential, base.values[c], x[c], eps);
      });
    };
    std::vector<cplx> delta(n, cplx{0.0, 0.0});
    const auto ks = linalg::minres<cplx>(op, b, delta, precond, cfg.newton_linear_tol, cfg.newton_max_linear);
    rep.linear_iterations += ks.iterations;

    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 10; ++ls) {
      ComplexField trial = base;
      par::for_each(n, [&](std::size_t c) { trial.values[c] += lambda * delta[c]; });
      const double tr = residual_norm(trial, cfg.potential);
      if (tr < (1.0 - 1e-4 * lambda) * res) {
        u = std::move(trial);
        res = tr;
        accepted = true;
        break;
      }
      lambda *= cfg.damping;
    }
    rep.newton_iterations = it;
    rep.energy_history.push_back({it, energy(u, cfg.potential), res, true});
    if (!accepted) {
      rep.newton_fallback = true;
      rep.message = "Newton stagnated: no residual decrease along the MINRES direction";
      break;
    }
    constexpr int kWindow = 8;
    const auto& hist = rep.energy_history;
    if (it >= kWindow && res > 0.5 * hist[hist.size() - 1 - kWindow].residual) {
      rep.newton_fallback = true;
      rep.message = "Newton stagnated: residual did not halve in 8 iterations";
      break;
    }
  }
  rep.final_residual = res;
  rep.converged = res <= cfg.residual_tol;
  if (!rep.converged && rep.message.empty()) rep.message = "Newton did not reach residual_tol";
  rep.max_modulus = u.max_modulus();
  return {std::move(u), std::move(rep)};
}

SolveResult solve(ComplexField u, const SolverConfig& cfg) {
  SolveReport total;
  int flow_budget = cfg.max_steps;
  auto append = [&](const SolveReport& part, bool newton) {
    const int offset = newton ? total.newton_iterations : total.steps;
    for (std::size_t i = (total.energy_history.empty() ? 0 : 1); i < part.energy_history.size(); ++i) {
      auto rec = part.energy_history[i];
      rec.step += offset;
      total.energy_history.push_back(rec);
    }
    if (newton) {
      total.newton_iterations += part.newton_iterations;
    } else {
      total.steps += part.steps;
    }
    total.final_residual = part.final_residual;
    total.max_modulus = part.max_modulus;
    total.message = part.message;
  };

  for (int round = 0; round < 20; ++round) {
    SolverConfig flow_cfg = cfg;
    flow_cfg.residual_tol = std::max(cfg.residual_tol, cfg.newton_after);
    flow_cfg.max_steps = round == 0 ? flow_budget : std::min(flow_budget, cfg.fallback_steps);
    if (residual_norm(u, cfg.potential) > flow_cfg.residual_tol || round > 0) {
      auto fr = gradient_flow(std::move(u), flow_cfg);
      u = std::move(fr.field);
      flow_budget -= fr.report.steps;
      append(fr.report, false);
      if (fr.report.aborted) {
        total.aborted = true;
        break;
      }
    }
    auto nr = newton_polish(std::move(u), cfg);
    u = std::move(nr.field);
    append(nr.report, true);
    if (nr.report.converged) {
      total.converged = true;
      total.message.clear();
      break;
    }
    total.newton_fallback = true;
    if (flow_budget <= 0) break;
  }
  total.final_residual = residual_norm(u, cfg.potential);
  total.max_modulus = u.max_modulus();
  total.converged = total.final_residual <= cfg.residual_tol;
  if (!total.converged && total.message.empty()) total.message = "did not converge";
  return {std::move(u), std::move(total)};
}

ComplexField init_constant(DomainPtr dom, double eps, cplx value) {
  ComplexField u(std::move(dom), eps);
  for (std::size_t c : u.dom().active_nodes) u.values[c] = value;
  return u;
}

ComplexField init_noise(DomainPtr dom, double eps, std::uint64_t seed, double amplitude) {
  ComplexField u(std::move(dom), eps);
  std::uint64_t s = seed;
  auto uniform = [&] { return static_cast<double>(splitmix(s) >> 11) * 0x1.0p-53; };
  for (std::size_t c : u.dom().active_nodes) {
    const double re = 2.0 * uniform() - 1.0;
    const double im = 2.0 * uniform() - 1.0;
    u.values[c] = amplitude * cplx{re, im};
  }
  return u;
}

ComplexField init_vortex(DomainPtr dom, double eps, const Vec3& core, int degree, int a, int b) {
  ComplexField u(std::move(dom), eps);
  const auto& g = u.dom().grid;
  for (std::size_t c : u.dom().active_nodes) {
    const Vec3 x = g.center(c);
    const double dx = x[a] - core[a];
    const double dy = x[b] - core[b];
    const double d = std::hypot(dx, dy);
    const double theta = std::atan2(dy, dx);
    u.values[c] = std::tanh(d / eps) * std::polar(1.0, degree * theta);
  }
  return u;
}

ComplexField init_product_exact(DomainPtr dom, double eps, int k) {
  ComplexField u(std::move(dom), eps);
  const double amp = std::sqrt(1.0 - k * k * eps * eps);
  const auto& g = u.dom().grid;
  for (std::size_t c : u.dom().active_nodes) u.values[c] = std::polar(amp, k * g.center(c)[0]);
  return u;
}

ComplexField init_product_discrete(DomainPtr dom, double eps, int k) {
  ComplexField u(std::move(dom), eps);
  const auto& g = u.dom().grid;
  const double h = g.spacing[0];
  // -Δ_h e^{iks} = (2 - 2 cos kh)/h^2 e^{iks}
  const double lam = (2.0 - 2.0 * std::cos(k * h)) / (h * h);
  const double amp = std::sqrt(1.0 - lam * eps * eps);
  for (std::size_t c : u.dom().active_nodes) u.values[c] = std::polar(amp, k * g.center(c)[0]);
  return u;
}

ReflectionReport reflect_even(const ComplexField& half, double neumann_flag_tol) {
  const Domain& hd = half.dom();
  if (hd.grid.chart != ChartId::half_ball) throw ConfigError("reflect_even: field is not on a half_ball chart");
  const int n = hd.ndim();
  const int last = n - 1;
  std::vector<int> res;
  for (int a = 0; a < n; ++a) res.push_back(a == last ? 2 * hd.grid.dims[a] : hd.grid.dims[a]);
  ChartParams p = hd.grid.params;
  auto full_dom = build_chart(ChartId::disk, res, p);

  ReflectionReport rep;
  rep.full = ComplexField(full_dom, half.epsilon);
  const int nh = hd.grid.dims[last];
  for (std::size_t c : full_dom->active_nodes) {
    auto q = full_dom->grid.ijk(c);
    q[last] = q[last] >= nh ? q[last] - nh : nh - 1 - q[last];
    const std::size_t src = hd.grid.index(q[0], q[1], q[2]);
    rep.full.values[c] = hd.active(src) ? half.values[src] : cplx{0.0, 0.0};
  }
  rep.half_interior_residual = interior_residual_norm(half);
  rep.full_interior_residual = interior_residual_norm(rep.full);
  rep.within_bound = rep.full_interior_residual <= 2.0 * rep.half_interior_residual;

  // One-sided normal derivative at the flat face, cubic extrapolation from
  // the first four cell centres above it, relative to the local gradient.
  const auto grad = gradient(half);
  const double h = hd.grid.spacing[last];
  double num = 0.0, den = 0.0;
  for (std::size_t c : hd.active_nodes) {
    if (hd.grid.ijk(c)[last] != 0) continue;
    std::size_t chain[4] = {c, 0, 0, 0};
    bool ok = true;
    for (int t = 1; t < 4 && ok; ++t) {
      const auto nb = hd.plus[last][chain[t - 1]];
      ok = nb >= 0;
      if (ok) chain[t] = static_cast<std::size_t>(nb);
    }
    if (!ok) continue;
    const auto& v = half.values;
    const cplx dn = (-23.0 * v[chain[0]] + 21.0 * v[chain[1]] + 3.0 * v[chain[2]] - v[chain[3]]) / (24.0 * h);
    num += std::norm(dn);
    den += gradient_norm2(hd, grad, c);
  }
  rep.neumann_violation = den > 0.0 ? std::sqrt(num / den) : (num > 0.0 ? 1e300 : 0.0);
  rep.neumann_flagged = rep.neumann_violation > neumann_flag_tol;
  return rep;
}

}  // namespace gllab
