#include "gllab/field.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "gllab/error.hpp"
#include "gllab/forms.hpp"

namespace gllab {

namespace {
constexpr double kPi = std::numbers::pi;

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }
double dotc(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

double potential_density(Potential pot, cplx u, double eps) {
  const double t2 = std::norm(u);
  if (pot == Potential::quartic || t2 <= 1.0) {
    const double d = 1.0 - t2;
    return 0.25 * d * d / (eps * eps);
  }
  const double t = std::sqrt(t2);
  return (t - 1.0) * (t - 1.0) / (eps * eps);
}
}  // namespace

PotentialValue modified_potential(double t) {
  if (t < 0.0) throw ConfigError("modified_potential: argument must be non-negative");
  if (t <= 1.0) {
    const double d = t * t - 1.0;
    return {0.25 * d * d, t * d, 3.0 * t * t - 1.0};
  }
  return {(t - 1.0) * (t - 1.0), 2.0 * (t - 1.0), 2.0};
}

PotentialValue potential(Potential kind, double t) {
  if (kind == Potential::modified) return modified_potential(t);
  const double d = t * t - 1.0;
  return {0.25 * d * d, t * d, 3.0 * t * t - 1.0};
}

ComplexField::ComplexField(DomainPtr dom, double eps)
    : domain(std::move(dom)), epsilon(eps), values(domain->size(), cplx{0.0, 0.0}) {}

double ComplexField::max_modulus() const {
  double m = 0.0;
  for (std::size_t c : domain->active_nodes) m = std::max(m, std::abs(values[c]));
  return m;
}

void ComplexField::zero_exterior() {
  for (std::size_t c = 0; c < values.size(); ++c)
    if (!domain->active(c)) values[c] = 0.0;
}

NodeGradient gradient(const ComplexField& u) {
  const Domain& dom = u.dom();
  const int n = dom.ndim();
  NodeGradient g;
  g.d.assign(dom.size() * 3, cplx{0.0, 0.0});
  const auto& v = u.values;
  par::for_each(dom.size(), [&](std::size_t c) {
    if (!dom.active(c)) return;
    for (int a = 0; a < n; ++a) {
      const double h = dom.grid.spacing[a];
      const auto p = dom.plus[a][c];
      const auto m = dom.minus[a][c];
      cplx d{0.0, 0.0};
      if (p >= 0 && m >= 0) {
        d = (v[p] - v[m]) / (2.0 * h);
      } else if (p >= 0) {
        const auto pp = dom.plus[a][p];
        d = pp >= 0 ? (-3.0 * v[c] + 4.0 * v[p] - v[pp]) / (2.0 * h) : (v[p] - v[c]) / h;
      } else if (m >= 0) {
        const auto mm = dom.minus[a][m];
        d = mm >= 0 ? (3.0 * v[c] - 4.0 * v[m] + v[mm]) / (2.0 * h) : (v[c] - v[m]) / h;
      }
      g.d[c * 3 + a] = d;
    }
  });
  return g;
}

double gradient_norm2(const Domain& dom, const NodeGradient& grad, std::size_t node) {
  double s = 0.0;
  for (int a = 0; a < dom.ndim(); ++a) s += dom.metric.inv_component(node, a, a) * std::norm(grad.at(node, a));
  return s;
}

std::vector<double> cell_energy(const ComplexField& u, Potential pot) {
  const Domain& dom = u.dom();
  const int n = dom.ndim();
  const auto& v = u.values;
  std::vector<double> mass(dom.size(), 0.0);
  par::for_each(dom.size(), [&](std::size_t c) {
    if (!dom.active(c)) return;
    double kin = 0.0;
    for (int a = 0; a < n; ++a) {
      const auto p = dom.plus[a][c];
      if (p >= 0) kin += dom.conductance[a][c] * std::norm(v[p] - v[c]);
      const auto m = dom.minus[a][c];
      if (m >= 0) kin += dom.conductance[a][m] * std::norm(v[c] - v[m]);
    }
    mass[c] = 0.25 * kin + dom.node_weight[c] * potential_density(pot, v[c], u.epsilon);
  });
  return mass;
}

double energy(const ComplexField& u, Potential pot) { return par::sum(cell_energy(u, pot)); }

EnergyDensity decompose_energy(const ComplexField& u) {
  const Domain& dom = u.dom();
  const int n = dom.ndim();
  const auto& v = u.values;
  EnergyDensity out;
  const auto mass = cell_energy(u, Potential::quartic);
  out.e.assign(dom.size(), 0.0);
  for (auto& p : out.parts) p.assign(dom.size(), 0.0);
  par::for_each(dom.size(), [&](std::size_t c) {
    if (!dom.active(c)) return;
    double p1 = 0.0, p2 = 0.0, p3 = 0.0;
    auto add = [&](double sigma, cplx ua, cplx ub) {
      const cplx diff = ub - ua;
      const cplx mid = 0.5 * (ua + ub);
      p1 += sigma * (1.0 - std::norm(mid)) * std::norm(diff);
      const double dm = dotc(mid, diff);
      p2 += sigma * dm * dm;
      const double cr = cross(mid, diff);
      p3 += sigma * cr * cr;
    };
    for (int a = 0; a < n; ++a) {
      const auto p = dom.plus[a][c];
      if (p >= 0) add(dom.conductance[a][c], v[c], v[p]);
      const auto m = dom.minus[a][c];
      if (m >= 0) add(dom.conductance[a][m], v[m], v[c]);
    }
    const double w = dom.node_weight[c];
    out.parts[0][c] = 0.25 * p1 / w;
    out.parts[1][c] = 0.25 * p2 / w;
    out.parts[2][c] = 0.25 * p3 / w;
    out.parts[3][c] = potential_density(Potential::quartic, v[c], u.epsilon);
    out.e[c] = mass[c] / w;
  });
  return out;
}

LinkGradientSplit gradient_decomposition(const ComplexField& u) {
  const Domain& dom = u.dom();
  const auto& v = u.values;
  LinkGradientSplit s;
  for (int a = 0; a < 3; ++a) {
    s.total[a].assign(dom.size(), 0.0);
    s.amplitude_weighted[a].assign(dom.size(), 0.0);
    s.modulus[a].assign(dom.size(), 0.0);
    s.cross[a].assign(dom.size(), 0.0);
  }
  for (int a = 0; a < dom.ndim(); ++a) {
    const double h = dom.grid.spacing[a];
    par::for_each(dom.size(), [&](std::size_t c) {
      const auto p = dom.plus[a][c];
      if (p < 0) return;
      const cplx du = (v[p] - v[c]) / h;
      const cplx mid = 0.5 * (v[c] + v[p]);
      const double dmod = (std::norm(v[p]) - std::norm(v[c])) / h;
      const double cr = cross(mid, du);
      s.total[a][c] = std::norm(du);
      s.amplitude_weighted[a][c] = (1.0 - std::norm(mid)) * std::norm(du);
      s.modulus[a][c] = 0.25 * dmod * dmod;
      s.cross[a][c] = cr * cr;
    });
  }
  return s;
}

PolarForm polar_decompose(const ComplexField& u, double rho_min) {
  const Domain& dom = u.dom();
  const auto& v = u.values;
  PolarForm pf;
  pf.rho.assign(dom.size(), 0.0);
  pf.phi.assign(dom.size(), 0.0);
  pf.X.assign(dom.size(), 0.0);
  pf.valid.assign(dom.size(), 0);
  const double inv_eps2 = 1.0 / (u.epsilon * u.epsilon);
  double best = -1.0;
  for (std::size_t c : dom.active_nodes) {
    pf.rho[c] = std::abs(v[c]);
    pf.X[c] = inv_eps2 * (1.0 - pf.rho[c]);
    if (pf.rho[c] > best) {
      best = pf.rho[c];
      pf.seed = c;
    }
  }
  if (best < rho_min) throw Error("polar_decompose: no valid seed (|u| < rho_min everywhere)");

  std::vector<std::uint8_t> seen(dom.size(), 0);
  std::deque<std::size_t> queue{pf.seed};
  seen[pf.seed] = 1;
  pf.phi[pf.seed] = std::arg(v[pf.seed]);
  while (!queue.empty()) {
    const std::size_t c = queue.front();
    queue.pop_front();
    pf.valid[c] = 1;
    for (int a = 0; a < dom.ndim(); ++a) {
      for (const auto nb : {dom.plus[a][c], dom.minus[a][c]}) {
        if (nb < 0) continue;
        const auto q = static_cast<std::size_t>(nb);
        if (seen[q] || pf.rho[q] < rho_min) continue;
        const double jump = std::remainder(std::arg(v[q]) - pf.phi[c], 2.0 * kPi);
        if (std::abs(jump) >= kPi) throw Error("polar_decompose: phase jump of exactly pi is ambiguous");
        pf.phi[q] = pf.phi[c] + jump;
        seen[q] = 1;
        queue.push_back(q);
      }
    }
  }
  return pf;
}

double link_phase(cplx a, cplx b) {
  const cplx z = std::conj(a) * b;
  if (z.imag() == 0.0 && z.real() <= 0.0) return 0.0;
  return std::atan2(z.imag(), z.real());
}

int phase_winding(const ComplexField& u, std::span<const std::size_t> loop) {
  if (loop.size() < 3) throw ConfigError("phase_winding: loop needs at least 3 nodes");
  double total = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const cplx a = u.values[loop[i]];
    const cplx b = u.values[loop[(i + 1) % loop.size()]];
    if (std::abs(a) < 0.5) throw ConfigError("phase_winding: loop node with |u| < 0.5");
    const cplx z = std::conj(a) * b;
    const double jump = std::atan2(z.imag(), z.real());
    if (std::abs(jump) >= 0.99 * kPi) throw Error("phase_winding: ambiguous phase jump along loop");
    total += jump;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

std::vector<std::size_t> square_loop(const Domain& dom, std::size_t center, int half, int a, int b) {
  const auto& g = dom.grid;
  const auto c0 = g.ijk(center);
  std::vector<std::array<int, 2>> offsets;
  for (int t = -half; t < half; ++t) offsets.push_back({t, -half});
  for (int t = -half; t < half; ++t) offsets.push_back({half, t});
  for (int t = half; t > -half; --t) offsets.push_back({t, half});
  for (int t = half; t > -half; --t) offsets.push_back({-half, t});
  std::vector<std::size_t> loop;
  for (const auto& o : offsets) {
    auto q = c0;
    q[a] += o[0];
    q[b] += o[1];
    for (int ax : {a, b}) {
      if (g.periodic[ax]) q[ax] = ((q[ax] % g.dims[ax]) + g.dims[ax]) % g.dims[ax];
      if (q[ax] < 0 || q[ax] >= g.dims[ax]) throw ConfigError("square_loop: loop leaves the grid");
    }
    loop.push_back(g.index(q[0], q[1], q[2]));
  }
  return loop;
}

double weighted_dot(const Domain& dom, std::span<const cplx> a, std::span<const cplx> b) {
  return par::sum_of(dom.size(), [&](std::size_t c) { return dom.node_weight[c] * dotc(a[c], b[c]); });
}

double weighted_rms(const Domain& dom, std::span<const cplx> v) {
  return std::sqrt(weighted_dot(dom, v, v) / dom.volume);
}

// ---- forms ---------------------------------------------------------------

DiscreteOneForm::DiscreteOneForm(DomainPtr dom) : domain(std::move(dom)) {
  for (auto& c : comp) c.assign(domain->size(), 0.0);
}

DiscreteOneForm& DiscreteOneForm::operator+=(const DiscreteOneForm& o) {
  for (int a = 0; a < 3; ++a)
    for (std::size_t i = 0; i < comp[a].size(); ++i) comp[a][i] += o.comp[a][i];
  return *this;
}

DiscreteOneForm& DiscreteOneForm::operator-=(const DiscreteOneForm& o) {
  for (int a = 0; a < 3; ++a)
    for (std::size_t i = 0; i < comp[a].size(); ++i) comp[a][i] -= o.comp[a][i];
  return *this;
}

DiscreteOneForm& DiscreteOneForm::operator*=(double s) {
  for (auto& c : comp)
    for (auto& x : c) x *= s;
  return *this;
}

DiscreteOneForm operator+(DiscreteOneForm a, const DiscreteOneForm& b) { return a += b; }
DiscreteOneForm operator-(DiscreteOneForm a, const DiscreteOneForm& b) { return a -= b; }
DiscreteOneForm operator*(double s, DiscreteOneForm a) { return a *= s; }

double inner(const DiscreteOneForm& a, const DiscreteOneForm& b) {
  const Domain& dom = a.dom();
  const int n = dom.ndim();
  return par::sum_of(dom.size(), [&](std::size_t c) {
    double s = 0.0;
    for (int ax = 0; ax < n; ++ax) s += dom.link_weight[ax][c] * a.comp[ax][c] * b.comp[ax][c];
    return s;
  });
}

double norm(const DiscreteOneForm& a) { return std::sqrt(inner(a, a)); }

DiscreteOneForm u_cross_du(const ComplexField& u) {
  const Domain& dom = u.dom();
  DiscreteOneForm w(u.domain);
  const auto& v = u.values;
  for (int a = 0; a < dom.ndim(); ++a) {
    const double h = dom.grid.spacing[a];
    par::for_each(dom.size(), [&](std::size_t c) {
      const auto p = dom.plus[a][c];
      if (p < 0) return;
      w.comp[a][c] = std::abs(v[c]) * std::abs(v[p]) * link_phase(v[c], v[p]) / h;
    });
  }
  return w;
}

std::vector<Vec3> to_node_vectors(const DiscreteOneForm& w) {
  const Domain& dom = w.dom();
  std::vector<Vec3> out(dom.size(), Vec3{0.0, 0.0, 0.0});
  for (std::size_t c : dom.active_nodes) {
    for (int a = 0; a < dom.ndim(); ++a) {
      double s = 0.0;
      int k = 0;
      if (dom.plus[a][c] >= 0) {
        s += w.comp[a][c];
        ++k;
      }
      const auto m = dom.minus[a][c];
      if (m >= 0) {
        s += w.comp[a][m];
        ++k;
      }
      out[c][a] = k ? s / k : 0.0;
    }
  }
  return out;
}

}  // namespace gllab
