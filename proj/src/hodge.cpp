#include "gllab/hodge.hpp"

#include <cmath>

#include "gllab/error.hpp"
#include "gllab/linalg.hpp"
#include "gllab/solver.hpp"

namespace gllab {

namespace {

constexpr int kPlaneA[3] = {0, 0, 1};
constexpr int kPlaneB[3] = {1, 2, 2};

int plane_count(int n) { return n == 3 ? 3 : (n == 2 ? 1 : 0); }

// 2-forms flattened as [plane 0 | plane 1 | plane 2 | caps].
std::size_t two_form_size(const Domain& dom) { return 3 * dom.size() + dom.caps.size(); }

double cap_area(const Domain& dom) {
  const double r = 0.5 * dom.grid.spacing[1];
  return std::acos(-1.0) * r * r;
}

void apply_d1(const Domain& dom, const DiscreteOneForm& w, std::vector<double>& out) {
  const std::size_t n = dom.size();
  out.assign(two_form_size(dom), 0.0);
  for (int p = 0; p < plane_count(dom.ndim()); ++p) {
    const int a = kPlaneA[p], b = kPlaneB[p];
    const double ha = dom.grid.spacing[a], hb = dom.grid.spacing[b];
    par::for_each(n, [&](std::size_t c) {
      if (!dom.plaquette[p][c]) return;
      const auto pa = static_cast<std::size_t>(dom.plus[a][c]);
      const auto pb = static_cast<std::size_t>(dom.plus[b][c]);
      out[p * n + c] = (w.comp[b][pa] - w.comp[b][c]) / ha - (w.comp[a][pb] - w.comp[a][c]) / hb;
    });
  }
  if (!dom.caps.empty()) {
    const int t = dom.cap_angular_axis;
    const double ht = dom.grid.spacing[t];
    const double area = cap_area(dom);
    for (std::size_t k = 0; k < dom.caps.size(); ++k) {
      double s = 0.0;
      for (std::size_t c : dom.caps[k]) s += w.comp[t][c] * ht;
      out[3 * n + k] = s / area;
    }
  }
}

void apply_d1_transpose(const Domain& dom, const std::vector<double>& g, DiscreteOneForm& w) {
  const std::size_t n = dom.size();
  for (auto& c : w.comp) std::fill(c.begin(), c.end(), 0.0);
  // Serial scatter: each plaquette touches four links.
  for (int p = 0; p < plane_count(dom.ndim()); ++p) {
    const int a = kPlaneA[p], b = kPlaneB[p];
    const double ha = dom.grid.spacing[a], hb = dom.grid.spacing[b];
    for (std::size_t c = 0; c < n; ++c) {
      if (!dom.plaquette[p][c]) continue;
      const double v = g[p * n + c];
      const auto pa = static_cast<std::size_t>(dom.plus[a][c]);
      const auto pb = static_cast<std::size_t>(dom.plus[b][c]);
      w.comp[b][pa] += v / ha;
      w.comp[b][c] -= v / ha;
      w.comp[a][pb] -= v / hb;
      w.comp[a][c] += v / hb;
    }
  }
  if (!dom.caps.empty()) {
    const int t = dom.cap_angular_axis;
    const double f = dom.grid.spacing[t] / cap_area(dom);
    for (std::size_t k = 0; k < dom.caps.size(); ++k)
      for (std::size_t c : dom.caps[k]) w.comp[t][c] += g[3 * n + k] * f;
  }
}

// D0^T M1 ω
std::vector<double> divergence_mass(const DiscreteOneForm& w) {
  const Domain& dom = w.dom();
  std::vector<double> out(dom.size(), 0.0);
  par::for_each(dom.size(), [&](std::size_t c) {
    if (!dom.active(c)) return;
    double s = 0.0;
    for (int a = 0; a < dom.ndim(); ++a) {
      const double h = dom.grid.spacing[a];
      if (dom.plus[a][c] >= 0) s -= dom.link_weight[a][c] * w.comp[a][c] / h;
      const auto m = dom.minus[a][c];
      if (m >= 0) s += dom.link_weight[a][m] * w.comp[a][m] / h;
    }
    out[c] = s;
  });
  return out;
}

void remove_mean(const Domain& dom, std::vector<double>& v) {
  const double s = par::sum_of(dom.active_nodes.size(), [&](std::size_t i) { return v[dom.active_nodes[i]]; });
  const double m = s / static_cast<double>(dom.active_nodes.size());
  for (std::size_t c : dom.active_nodes) v[c] -= m;
}

}  // namespace

DiscreteOneForm exterior_derivative(DomainPtr dom, const std::vector<double>& f) {
  DiscreteOneForm w(dom);
  for (int a = 0; a < dom->ndim(); ++a) {
    const double h = dom->grid.spacing[a];
    par::for_each(dom->size(), [&](std::size_t c) {
      const auto p = dom->plus[a][c];
      if (p >= 0) w.comp[a][c] = (f[static_cast<std::size_t>(p)] - f[c]) / h;
    });
  }
  return w;
}

std::vector<double> d_star(const DiscreteOneForm& w) {
  const Domain& dom = w.dom();
  auto out = divergence_mass(w);
  for (std::size_t c : dom.active_nodes) out[c] /= dom.node_weight[c];
  return out;
}

DiscreteTwoForm d(const DiscreteOneForm& w) {
  const Domain& dom = w.dom();
  std::vector<double> flat;
  apply_d1(dom, w, flat);
  const std::size_t n = dom.size();
  DiscreteTwoForm out;
  for (int p = 0; p < 3; ++p) out.plane[p].assign(flat.begin() + p * n, flat.begin() + (p + 1) * n);
  out.cap.assign(flat.begin() + 3 * n, flat.end());
  return out;
}

double norm(const Domain& dom, const DiscreteTwoForm& f) {
  const std::size_t n = dom.size();
  const double vol = dom.grid.cell_volume();
  double s = 0.0;
  for (int p = 0; p < plane_count(dom.ndim()); ++p) {
    const int a = kPlaneA[p], b = kPlaneB[p];
    s += par::sum_of(n, [&](std::size_t c) {
      if (!dom.plaquette[p][c]) return 0.0;
      const double w = dom.measure_factor * dom.metric.sqrt_det[c] * dom.metric.inv_component(c, a, a) *
                       dom.metric.inv_component(c, b, b) * vol;
      return w * f.plane[p][c] * f.plane[p][c];
    });
  }
  for (std::size_t k = 0; k < f.cap.size(); ++k) {
    double w = 0.0;
    for (std::size_t c : dom.caps[k]) w += dom.node_weight[c];
    s += w * f.cap[k] * f.cap[k];
  }
  return std::sqrt(s);
}

HodgeSplit hodge_decompose(const DiscreteOneForm& w, double rtol) {
  const DomainPtr& dp = w.domain;
  const Domain& dom = *dp;
  const std::size_t n = dom.size();
  HodgeSplit out;
  constexpr int kMaxIter = 50000;

  // Exact part: K α = D0^T M1 ω with K the stiffness operator.
  {
    std::vector<double> b = divergence_mass(w);
    std::vector<double> inv_diag(n, 0.0);
    for (std::size_t c : dom.active_nodes) {
      double dg = 0.0;
      for (int a = 0; a < dom.ndim(); ++a) {
        dg += dom.conductance[a][c];
        const auto m = dom.minus[a][c];
        if (m >= 0) dg += dom.conductance[a][m];
      }
      inv_diag[c] = dg > 0.0 ? 1.0 / dg : 0.0;
    }
    const linalg::Operator<double> op = [&](const std::vector<double>& x, std::vector<double>& y) {
      apply_stiffness<double>(dom, x, y);
    };
    const auto project = [&](std::vector<double>& v) { remove_mean(dom, v); };
    std::vector<double> alpha(n, 0.0);
    const auto st = linalg::conjugate_gradient<double>(op, b, alpha, inv_diag, rtol, kMaxIter, project);
    out.residual_norm = std::max(out.residual_norm, st.relative_residual);
    out.flagged = out.flagged || !st.converged;
    const double mean = par::sum_of(n, [&](std::size_t c) { return dom.node_weight[c] * alpha[c]; }) / dom.volume;
    for (std::size_t c : dom.active_nodes) alpha[c] -= mean;
    out.exact = exterior_derivative(dp, alpha);
    out.alpha = std::move(alpha);
  }

  // Coexact part: (D1 M1^-1 D1^T) γ = D1 ω, then M1^-1 D1^T γ.
  out.coexact = DiscreteOneForm(dp);
  {
    std::vector<double> b;
    apply_d1(dom, w, b);
    double bn = 0.0;
    for (double x : b) bn += x * x;
    if (bn > 0.0) {
      const std::size_t m = b.size();
      DiscreteOneForm tmp(dp);
      const auto inv_mass = [&](DiscreteOneForm& f) {
        for (int a = 0; a < dom.ndim(); ++a)
          for (std::size_t c = 0; c < n; ++c)
            f.comp[a][c] = dom.link_weight[a][c] > 0.0 ? f.comp[a][c] / dom.link_weight[a][c] : 0.0;
      };
      const linalg::Operator<double> op = [&](const std::vector<double>& x, std::vector<double>& y) {
        apply_d1_transpose(dom, x, tmp);
        inv_mass(tmp);
        apply_d1(dom, tmp, y);
      };
      // Jacobi: diagonal entries via unit probes would be costly; assemble
      // them from the stencil instead.
      std::vector<double> diag(m, 0.0);
      for (int p = 0; p < plane_count(dom.ndim()); ++p) {
        const int a = kPlaneA[p], bb = kPlaneB[p];
        const double ha = dom.grid.spacing[a], hb = dom.grid.spacing[bb];
        for (std::size_t c = 0; c < n; ++c) {
          if (!dom.plaquette[p][c]) continue;
          const auto pa = static_cast<std::size_t>(dom.plus[a][c]);
          const auto pb = static_cast<std::size_t>(dom.plus[bb][c]);
          diag[p * n + c] = (1.0 / dom.link_weight[bb][pa] + 1.0 / dom.link_weight[bb][c]) / (ha * ha) +
                            (1.0 / dom.link_weight[a][pb] + 1.0 / dom.link_weight[a][c]) / (hb * hb);
        }
      }
      if (!dom.caps.empty()) {
        const int t = dom.cap_angular_axis;
        const double f = dom.grid.spacing[t] / cap_area(dom);
        for (std::size_t k = 0; k < dom.caps.size(); ++k) {
          double s = 0.0;
          for (std::size_t c : dom.caps[k]) s += f * f / dom.link_weight[t][c];
          diag[3 * n + k] = s;
        }
      }
      std::vector<double> inv_diag(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) inv_diag[i] = diag[i] > 0.0 ? 1.0 / diag[i] : 0.0;
      std::vector<double> gamma(m, 0.0);
      const auto st = linalg::conjugate_gradient<double>(op, b, gamma, inv_diag, rtol, kMaxIter);
      out.residual_norm = std::max(out.residual_norm, st.relative_residual);
      out.flagged = out.flagged || !st.converged;
      apply_d1_transpose(dom, gamma, out.coexact);
      inv_mass(out.coexact);
    }
  }

  out.harmonic = w - out.exact - out.coexact;
  return out;
}

Harmonicity harmonicity(const DiscreteOneForm& w) {
  const Domain& dom = w.dom();
  Harmonicity h;
  const double wn = norm(w);
  if (wn == 0.0) return h;
  h.d_norm = norm(dom, d(w)) / wn;
  const auto ds = d_star(w);
  const double dsn = std::sqrt(par::sum_of(dom.size(), [&](std::size_t c) { return dom.node_weight[c] * ds[c] * ds[c]; }));
  h.d_star_norm = dsn / wn;

  const auto v = to_node_vectors(w);
  const int n = dom.ndim();
  double num = 0.0;
  for (std::size_t k = 0; k < dom.normal.nodes.size(); ++k) {
    const std::size_t c = dom.normal.nodes[k];
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += v[c][a] * dom.normal.nu[k][a];
    num += s * s;
  }
  const double rms_boundary = dom.normal.nodes.empty() ? 0.0 : std::sqrt(num / dom.normal.nodes.size());
  double all = 0.0;
  for (std::size_t c : dom.active_nodes)
    for (int a = 0; a < n; ++a) all += v[c][a] * v[c][a] * dom.metric.inv_component(c, a, a);
  const double rms_all = std::sqrt(all / dom.active_nodes.size());
  h.normal_norm = rms_all > 0.0 ? rms_boundary / rms_all : 0.0;
  return h;
}

std::vector<PsiEntry> extract_psi(const std::vector<ComplexField>& fields, double max_residual) {
  std::vector<PsiEntry> out;
  for (const auto& u : fields) {
    const double r = residual_norm(u);
    if (!(r <= max_residual))
      throw Error("extract_psi: field at eps=" + std::to_string(u.epsilon) + " is not converged (residual " +
                  std::to_string(r) + ")");
    PsiEntry e;
    e.epsilon = u.epsilon;
    e.psi = u_cross_du(u);
    e.psi *= 1.0 / std::sqrt(std::abs(std::log(u.epsilon)));
    const auto split = hodge_decompose(e.psi);
    e.harmonic = split.harmonic;
    e.diagnostics = harmonicity(e.psi);
    const double pn = norm(e.psi);
    e.harmonic_defect = pn > 0.0 ? norm(e.psi - e.harmonic) / pn : 0.0;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace gllab
