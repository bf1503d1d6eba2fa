#include "gllab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gllab/error.hpp"
#include "gllab/solver.hpp"

namespace gllab {

namespace {

constexpr double kPi = std::numbers::pi;

double dotc(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

std::size_t locate(const Domain& dom, const Vec3& x) {
  const auto& g = dom.grid;
  std::array<int, 3> q{0, 0, 0};
  for (int a = 0; a < g.ndim; ++a) {
    q[a] = static_cast<int>(std::floor((x[a] - g.origin[a]) / g.spacing[a]));
    if (g.periodic[a]) q[a] = ((q[a] % g.dims[a]) + g.dims[a]) % g.dims[a];
    if (q[a] < 0 || q[a] >= g.dims[a]) throw ConfigError("point lies outside the chart");
  }
  return g.index(q[0], q[1], q[2]);
}

std::vector<Vec3> sphere_directions(int n, int count) {
  std::vector<Vec3> dirs;
  if (n == 1) return {Vec3{1, 0, 0}, Vec3{-1, 0, 0}};
  if (n == 2) {
    for (int j = 0; j < count; ++j) {
      const double t = 2.0 * kPi * (j + 0.5) / count;
      dirs.push_back({std::cos(t), std::sin(t), 0.0});
    }
    return dirs;
  }
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int j = 0; j < count; ++j) {
    const double z = 1.0 - 2.0 * (j + 0.5) / count;
    const double rho = std::sqrt(1.0 - z * z);
    dirs.push_back({rho * std::cos(golden * j), rho * std::sin(golden * j), z});
  }
  return dirs;
}

double sphere_area(int n, double r) {
  if (n == 1) return 2.0;
  if (n == 2) return 2.0 * kPi * r;
  return 4.0 * kPi * r * r;
}

}  // namespace

BallStencil ball_stencil(const StructuredGrid& grid, double radius) {
  BallStencil st;
  st.radius = radius;
  std::array<int, 3> span{0, 0, 0};
  for (int a = 0; a < grid.ndim; ++a) span[a] = static_cast<int>(std::ceil(radius / grid.spacing[a]));
  for (int i = -span[0]; i <= span[0]; ++i)
    for (int j = -span[1]; j <= span[1]; ++j)
      for (int k = -span[2]; k <= span[2]; ++k) {
        const double d2 = std::pow(i * grid.spacing[0], 2) + std::pow(j * grid.spacing[1], 2) +
                          std::pow(k * grid.spacing[2], 2);
        if (std::sqrt(d2) < radius) st.offsets.push_back({i, j, k});
      }
  return st;
}

void for_ball(const Domain& dom, const BallStencil& st, std::size_t center, const std::function<void(std::size_t)>& f) {
  const auto& g = dom.grid;
  const auto c0 = g.ijk(center);
  for (const auto& o : st.offsets) {
    std::array<int, 3> q{c0[0] + o[0], c0[1] + o[1], c0[2] + o[2]};
    bool ok = true;
    for (int a = 0; a < g.ndim && ok; ++a) {
      if (g.periodic[a]) {
        // Offsets beyond half a period would double count.
        if (2 * std::abs(o[a]) > g.dims[a] || (2 * o[a] == g.dims[a])) ok = false;
        q[a] = ((q[a] % g.dims[a]) + g.dims[a]) % g.dims[a];
      } else if (q[a] < 0 || q[a] >= g.dims[a]) {
        ok = false;
      }
    }
    if (!ok) continue;
    const std::size_t c = g.index(q[0], q[1], q[2]);
    if (g.active(c)) f(c);
  }
}

double EnergyMeasure::total() const { return par::sum(cell_mass) * scale(); }

double EnergyMeasure::ball(const BallStencil& st, std::size_t center) const {
  double s = 0.0;
  for_ball(*domain, st, center, [&](std::size_t c) { s += cell_mass[c]; });
  return s * scale();
}

EnergyMeasure energy_measure(const ComplexField& u, bool normalized, Potential pot) {
  EnergyMeasure mu;
  mu.domain = u.domain;
  mu.cell_mass = cell_energy(u, pot);
  mu.log_eps = std::abs(std::log(u.epsilon));
  mu.normalized = normalized;
  return mu;
}

DensityProfile density_profile(const EnergyMeasure& mu, std::size_t center, std::span<const double> radii, double chi) {
  const Domain& dom = *mu.domain;
  if (center >= dom.size() || !dom.active(center)) throw ConfigError("density_profile: center outside the domain");
  const double lo = 2.0 * dom.grid.max_spacing();
  const double hi = domain_diameter(dom);
  const int n = dom.ndim();
  DensityProfile p;
  p.center = center;
  p.chi = chi;
  for (double r : radii) {
    if (!(r > lo && r < hi)) throw ConfigError("density_profile: radius outside (2h, diameter)");
    const auto st = ball_stencil(dom.grid, r);
    p.radii.push_back(r);
    p.values.push_back(std::exp(chi * r) * std::pow(r, 2 - n) * mu.ball(st, center));
  }
  return p;
}

MonotonicityReport monotonicity_report(const EnergyMeasure& mu, std::span<const std::size_t> centers,
                                       std::span<const double> radii, double slack, double chi_max) {
  if (radii.size() < 3) throw ConfigError("monotonicity_report: need at least 3 radii");
  MonotonicityReport rep;
  rep.slack = slack;
  rep.chi_max = chi_max;
  for (std::size_t c : centers) {
    MonotonicityEntry e;
    e.center = c;
    e.profile = density_profile(mu, c, radii, 0.0);
    const auto& r = e.profile.radii;
    const auto& v = e.profile.values;
    double chi = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = i + 1; j < r.size(); ++j) {
        if (v[i] <= 0.0) continue;
        // need e^{chi r_j} v_j >= (1 - slack) e^{chi r_i} v_i
        if (v[j] <= 0.0) {
          chi = std::numeric_limits<double>::infinity();
          continue;
        }
        chi = std::max(chi, std::log((1.0 - slack) * v[i] / v[j]) / (r[j] - r[i]));
      }
    e.chi_fit = chi;
    e.flagged = chi > chi_max;
    rep.all_pass = rep.all_pass && !e.flagged;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

cplx interpolate(const Domain& dom, std::span<const cplx> values, const Vec3& x, bool* inside) {
  const auto& g = dom.grid;
  const int n = g.ndim;
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0, 0, 0};
  for (int a = 0; a < n; ++a) {
    const double s = (x[a] - g.origin[a]) / g.spacing[a] - 0.5;
    base[a] = static_cast<int>(std::floor(s));
    frac[a] = s - base[a];
  }
  cplx acc{0.0, 0.0};
  double wsum = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    std::array<int, 3> q{0, 0, 0};
    double w = 1.0;
    bool ok = true;
    for (int a = 0; a < n; ++a) {
      const int bit = (corner >> a) & 1;
      q[a] = base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
      if (g.periodic[a]) {
        q[a] = ((q[a] % g.dims[a]) + g.dims[a]) % g.dims[a];
      } else if (q[a] < 0 || q[a] >= g.dims[a]) {
        ok = false;
      }
    }
    if (!ok) continue;
    const std::size_t c = g.index(q[0], q[1], q[2]);
    if (!g.active(c)) continue;
    acc += w * values[c];
    wsum += w;
  }
  if (inside) *inside = wsum > 0.999999;
  return wsum > 0.0 ? acc / wsum : cplx{0.0, 0.0};
}

CourantLebesgueResult courant_lebesgue_search(const ComplexField& u, const Vec3& center) {
  const Domain& dom = u.dom();
  const int n = dom.ndim();
  const double eps = u.epsilon;
  const double h = dom.grid.max_spacing();
  CourantLebesgueResult res;
  res.r_lo = std::sqrt(eps);
  res.r_hi = std::pow(eps, 0.25);
  const int m = std::min(48, static_cast<int>(std::floor((res.r_hi - res.r_lo) / h)) - 1);
  if (m < 3) throw ConfigError("courant_lebesgue_search: interval (sqrt(eps), eps^(1/4)) holds fewer than 3 resolvable radii");
  const std::size_t c0 = locate(dom, center);
  if (!dom.active(c0)) throw ConfigError("courant_lebesgue_search: center outside the domain");

  const auto grad = gradient(u);
  std::array<std::vector<cplx>, 3> comp;
  for (int a = 0; a < n; ++a) {
    comp[a].assign(dom.size(), cplx{0.0, 0.0});
    for (std::size_t c : dom.active_nodes) comp[a][c] = grad.at(c, a);
  }
  std::vector<double> pot(dom.size(), 0.0);
  for (std::size_t c : dom.active_nodes) {
    const double t = 1.0 - std::norm(u.values[c]);
    pot[c] = dom.node_weight[c] * t * t / (2.0 * eps * eps);
  }
  const auto mass = cell_energy(u);
  const Vec3 xc = dom.grid.center(c0);

  const double dr = (res.r_hi - res.r_lo) / (m + 1);
  for (int j = 1; j <= m; ++j) {
    const double r = res.r_lo + j * dr;
    const int count = n == 2 ? std::max(64, static_cast<int>(4.0 * kPi * r / h)) : std::max(256, static_cast<int>(16.0 * kPi * r * r / (h * h)));
    const auto dirs = sphere_directions(n, count);
    double shell = 0.0;
    const double dA = sphere_area(n, r) / static_cast<double>(dirs.size());
    for (const auto& dvec : dirs) {
      Vec3 x = xc;
      for (int a = 0; a < n; ++a) x[a] += r * dvec[a];
      bool inside = false;
      cplx dnu{0.0, 0.0};
      const Vec3 gd = chart_metric_diag(dom.grid, x);
      double nrm = 0.0;
      for (int a = 0; a < n; ++a) nrm += gd[a] * dvec[a] * dvec[a];
      nrm = std::sqrt(nrm);
      for (int a = 0; a < n; ++a) {
        dnu += dvec[a] / nrm * interpolate(dom, comp[a], x, &inside);
        if (!inside) break;
      }
      if (!inside) continue;
      shell += dom.measure_factor * chart_volume_density(dom.grid, x) * std::norm(dnu) * dA;
    }
    const auto st = ball_stencil(dom.grid, r);
    double bulk = 0.0;
    for_ball(dom, st, c0, [&](std::size_t c) { bulk += pot[c]; });
    const double v = std::pow(r, 3 - n) * shell + std::pow(r, 2 - n) * bulk;
    res.radii.push_back(r);
    res.values.push_back(v);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < res.values.size(); ++i)
    if (res.values[i] < res.values[best]) best = i;
  res.radius = res.radii[best];
  res.value = res.values[best];
  const auto st = ball_stencil(dom.grid, res.r_hi);
  double e = 0.0;
  for_ball(dom, st, c0, [&](std::size_t c) { e += mass[c]; });
  res.bulk = std::pow(res.r_hi, 2 - n) * e;
  res.c_fit = res.bulk > 0.0 ? res.value * std::abs(std::log(eps)) / res.bulk : 0.0;
  return res;
}

EtaScanReport eta_scan(const ComplexField& u, double ball_radius, double eta, double sigma, int stride) {
  const Domain& dom = u.dom();
  const auto& g = dom.grid;
  const int n = dom.ndim();
  if (ball_radius < 8.0 * g.max_spacing()) throw ConfigError("eta_scan: ball radius must be at least 8 cells");
  if (stride <= 0) stride = std::max(1, static_cast<int>(std::lround(ball_radius / (4.0 * g.max_spacing()))));
  EtaScanReport rep;
  rep.ball_radius = ball_radius;
  rep.eta = eta;
  rep.sigma = sigma;
  const auto mass = cell_energy(u);
  const auto big = ball_stencil(g, ball_radius);
  const auto small = ball_stencil(g, 0.25 * ball_radius);
  const double denom = std::abs(std::log(u.epsilon / ball_radius));
  const double weight = std::pow(ball_radius, 2 - n);
  for (std::size_t c : dom.active_nodes) {
    const auto q = g.ijk(c);
    if (q[0] % stride || q[1] % stride || q[2] % stride) continue;
    EtaCenter e;
    e.center = c;
    double s = 0.0;
    for_ball(dom, big, c, [&](std::size_t k) { s += mass[k]; });
    e.scaled_energy = weight * s / denom;
    double mn = 1e300;
    for_ball(dom, small, c, [&](std::size_t k) { mn = std::min(mn, std::abs(u.values[k])); });
    e.min_modulus = mn;
    e.energy_small = e.scaled_energy <= eta;
    e.counterexample = e.energy_small && mn < 1.0 - sigma;
    rep.passing += e.energy_small;
    rep.counterexamples += e.counterexample;
    rep.centers.push_back(e);
  }
  return rep;
}

SingularSet singular_set(const EnergyMeasure& mu, double r_probe, double theta_min) {
  if (!(theta_min > 0.0)) throw ConfigError("singular_set: theta_min must be positive");
  const Domain& dom = *mu.domain;
  SingularSet s;
  s.r_probe = r_probe;
  s.theta_min = theta_min;
  const auto st = ball_stencil(dom.grid, r_probe);
  const double w = std::pow(r_probe, 2 - dom.ndim());
  std::vector<double> dens(dom.size(), 0.0);
  par::for_each(dom.active_nodes.size(), [&](std::size_t i) {
    const std::size_t c = dom.active_nodes[i];
    dens[c] = w * mu.ball(st, c);
  });
  for (std::size_t c : dom.active_nodes) {
    s.max_density = std::max(s.max_density, dens[c]);
    if (dens[c] >= theta_min) {
      s.cells.push_back(c);
      s.density.push_back(dens[c]);
    }
  }
  return s;
}

AdmissibleVectorField make_vector_field(const Domain& dom, const std::function<Vec3(const Vec3&)>& X) {
  AdmissibleVectorField f;
  const auto& g = dom.grid;
  const int n = dom.ndim();
  f.X.assign(dom.size(), Vec3{0, 0, 0});
  f.DX.assign(dom.size(), std::array<double, 9>{});
  double max_x = 0.0, max_dx = 0.0;
  for (std::size_t c : dom.active_nodes) {
    const Vec3 x = g.center(c);
    f.X[c] = X(x);
    for (int a = 0; a < n; ++a) {
      const double t = 1e-5 * g.spacing[a] / g.max_spacing();
      Vec3 xp = x, xm = x;
      xp[a] += t;
      xm[a] -= t;
      const Vec3 fp = X(xp), fm = X(xm);
      for (int b = 0; b < n; ++b) f.DX[c][b * 3 + a] = (fp[b] - fm[b]) / (2.0 * t);
    }
    const Vec3 gd = chart_metric_diag(g, x);
    const auto gam = christoffel(g, x);
    double nx = 0.0, ndx = 0.0;
    for (int a = 0; a < n; ++a) nx += gd[a] * f.X[c][a] * f.X[c][a];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double cov = f.DX[c][b * 3 + a];
        for (int k = 0; k < n; ++k) cov += gam[b * 9 + a * 3 + k] * f.X[c][k];
        ndx += gd[b] / gd[a] * cov * cov;
      }
    max_x = std::max(max_x, std::sqrt(nx));
    max_dx = std::max(max_dx, std::sqrt(ndx));
  }
  f.c1_norm = max_x + max_dx;
  for (std::size_t k = 0; k < dom.normal.nodes.size(); ++k) {
    const std::size_t c = dom.normal.nodes[k];
    const Vec3 gd = chart_metric_diag(g, g.center(c));
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += gd[a] * f.X[c][a] * dom.normal.nu[k][a];
    f.boundary_tangency_norm = std::max(f.boundary_tangency_norm, std::abs(s));
  }
  return f;
}

AdmissibleVectorField combine(double a, const AdmissibleVectorField& x1, double b, const AdmissibleVectorField& x2,
                              const Domain& dom) {
  AdmissibleVectorField f = x1;
  for (std::size_t c = 0; c < dom.size(); ++c) {
    for (int k = 0; k < 3; ++k) f.X[c][k] = a * x1.X[c][k] + b * x2.X[c][k];
    for (int k = 0; k < 9; ++k) f.DX[c][k] = a * x1.DX[c][k] + b * x2.DX[c][k];
  }
  f.boundary_tangency_norm = std::abs(a) * x1.boundary_tangency_norm + std::abs(b) * x2.boundary_tangency_norm;
  f.c1_norm = std::abs(a) * x1.c1_norm + std::abs(b) * x2.c1_norm;
  return f;
}

double stationarity_residual(const ComplexField& u, const AdmissibleVectorField& X) {
  if (!X.admissible())
    throw ConfigError("stationarity_residual: vector field is not tangent to the boundary (tangency norm " +
                      std::to_string(X.boundary_tangency_norm) + ")");
  const Domain& dom = u.dom();
  const auto& g = dom.grid;
  const int n = dom.ndim();
  const auto grad = gradient(u);
  const double eps = u.epsilon;
  return par::sum_of(dom.active_nodes.size(), [&](std::size_t i) {
    const std::size_t c = dom.active_nodes[i];
    const Vec3 x = g.center(c);
    const auto gam = christoffel(g, x);
    double nabla[3][3] = {};  // nabla[a][b] = ∇_a X^b
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double v = X.DX[c][b * 3 + a];
        for (int k = 0; k < n; ++k) v += gam[b * 9 + a * 3 + k] * X.X[c][k];
        nabla[a][b] = v;
      }
    double div = 0.0;
    for (int a = 0; a < n; ++a) div += nabla[a][a];
    const double t = 1.0 - std::norm(u.values[c]);
    const double e = 0.5 * gradient_norm2(dom, grad, c) + t * t / (4.0 * eps * eps);
    double stress = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        stress += dom.metric.inv_component(c, a, a) * nabla[a][b] * dotc(grad.at(c, b), grad.at(c, a));
    return dom.node_weight[c] * (e * div - stress);
  });
}

double first_variation(const ComplexField& u, std::span<const cplx> zeta, Potential pot) {
  const auto r = gl_residual(u, pot);
  return weighted_dot(u.dom(), r, zeta);
}

double weighted_norm(const Domain& dom, std::span<const cplx> zeta) { return std::sqrt(weighted_dot(dom, zeta, zeta)); }

std::vector<cplx> random_smooth_field(const Domain& dom, std::uint64_t seed, int modes) {
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const auto& g = dom.grid;
  const int n = dom.ndim();
  struct Mode {
    std::array<double, 3> k;
    double phase;
    cplx amp;
  };
  std::vector<Mode> ms;
  for (int m = 0; m < modes; ++m) {
    Mode md{};
    for (int a = 0; a < n; ++a) {
      const double len = g.period(a);
      // integer wave numbers on periodic axes keep ζ continuous across the seam
      const int kk = static_cast<int>(uniform() * 4.0);
      md.k[a] = 2.0 * kPi * kk / len;
    }
    md.phase = 2.0 * kPi * uniform();
    md.amp = cplx{2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0};
    ms.push_back(md);
  }
  std::vector<cplx> z(dom.size(), cplx{0.0, 0.0});
  for (std::size_t c : dom.active_nodes) {
    const Vec3 x = g.center(c);
    cplx s{0.0, 0.0};
    for (const auto& md : ms) {
      double arg = md.phase;
      for (int a = 0; a < n; ++a) arg += md.k[a] * x[a];
      s += md.amp * std::cos(arg);
    }
    z[c] = s;
  }
  return z;
}

}  // namespace gllab
