#include "gllab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gllab/error.hpp"

namespace gllab {

namespace {

constexpr double kPi = std::numbers::pi;

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Low side of this axis is a coordinate axis (r = 0), not a boundary.
int symmetry_axis(ChartId chart) {
  switch (chart) {
    case ChartId::product_s1_hemisphere: return 1;
    case ChartId::half_ellipse_rz: return 0;
    default: return -1;
  }
}

double conformal_factor(const StructuredGrid& grid, const Vec3& x) {
  return 1.0 + grid.params.metric_amp * dot3(x, x);
}

// Boundary pieces: the domain is {phi_k <= 0 for every k}.
int piece_count(const StructuredGrid& grid) {
  switch (grid.chart) {
    case ChartId::box: return 2 * grid.ndim;
    case ChartId::disk: return 1;
    case ChartId::product_s1_hemisphere: return 1;
    case ChartId::half_ellipse_rz: return 1;
    case ChartId::half_ball: return 2;
  }
  return 0;
}

double piece_value(const StructuredGrid& grid, int k, const Vec3& x, Vec3& grad) {
  grad = {0.0, 0.0, 0.0};
  const auto& p = grid.params;
  switch (grid.chart) {
    case ChartId::box: {
      const int a = k / 2;
      if (k % 2 == 0) {
        grad[a] = -1.0;
        return -x[a];
      }
      grad[a] = 1.0;
      return x[a] - p.side;
    }
    case ChartId::disk:
      for (int a = 0; a < grid.ndim; ++a) grad[a] = 2.0 * x[a];
      return dot3(x, x) - p.radius * p.radius;
    case ChartId::product_s1_hemisphere:
      grad[1] = 1.0;
      return x[1] - kPi / 2.0;
    case ChartId::half_ellipse_rz: {
      const double l = p.elongation;
      grad[0] = 2.0 * x[0];
      grad[1] = 2.0 * x[1] / (l * l);
      return x[0] * x[0] + (x[1] / l) * (x[1] / l) - 1.0;
    }
    case ChartId::half_ball:
      if (k == 0) {
        for (int a = 0; a < grid.ndim; ++a) grad[a] = 2.0 * x[a];
        return dot3(x, x) - p.radius * p.radius;
      }
      grad[grid.ndim - 1] = -1.0;
      return -x[grid.ndim - 1];
  }
  return 0.0;
}

Vec3 normal_from_piece(const StructuredGrid& grid, int k, const Vec3& x) {
  Vec3 grad;
  piece_value(grid, k, x, grad);
  const Vec3 gd = chart_metric_diag(grid, x);
  double norm2 = 0.0;
  for (int a = 0; a < grid.ndim; ++a) norm2 += grad[a] * grad[a] / gd[a];
  const double norm = std::sqrt(norm2);
  Vec3 nu{0.0, 0.0, 0.0};
  for (int a = 0; a < grid.ndim; ++a) nu[a] = -grad[a] / gd[a] / norm;
  return nu;
}

bool inside(const StructuredGrid& grid, const Vec3& x) {
  Vec3 grad;
  for (int k = 0; k < piece_count(grid); ++k) {
    if (piece_value(grid, k, x, grad) > 0.0) return false;
  }
  return true;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

std::string to_string(ChartId id) {
  switch (id) {
    case ChartId::box: return "box";
    case ChartId::disk: return "disk";
    case ChartId::product_s1_hemisphere: return "product_s1_hemisphere";
    case ChartId::half_ellipse_rz: return "half_ellipse_rz";
    case ChartId::half_ball: return "half_ball";
  }
  return "unknown";
}

ChartId chart_from_string(std::string_view name) {
  if (name == "box") return ChartId::box;
  if (name == "disk" || name == "ball") return ChartId::disk;
  if (name == "product" || name == "product_s1_hemisphere") return ChartId::product_s1_hemisphere;
  if (name == "ellipse" || name == "half_ellipse_rz") return ChartId::half_ellipse_rz;
  if (name == "half_ball") return ChartId::half_ball;
  throw ConfigError("unknown chart_id '" + std::string(name) + "'");
}

std::array<int, 3> StructuredGrid::ijk(std::size_t idx) const {
  const int k = static_cast<int>(idx % dims[2]);
  idx /= dims[2];
  const int j = static_cast<int>(idx % dims[1]);
  const int i = static_cast<int>(idx / dims[1]);
  return {i, j, k};
}

Vec3 StructuredGrid::center(std::size_t idx) const {
  const auto c = ijk(idx);
  Vec3 x{0.0, 0.0, 0.0};
  for (int a = 0; a < ndim; ++a) x[a] = origin[a] + (c[a] + 0.5) * spacing[a];
  return x;
}

double StructuredGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < ndim; ++a) v *= spacing[a];
  return v;
}

double StructuredGrid::max_spacing() const {
  double h = 0.0;
  for (int a = 0; a < ndim; ++a) h = std::max(h, spacing[a]);
  return h;
}

Vec3 chart_metric_diag(const StructuredGrid& grid, const Vec3& x) {
  switch (grid.chart) {
    case ChartId::product_s1_hemisphere: {
      const double s = std::sin(x[1]);
      return {1.0, 1.0, s * s};
    }
    case ChartId::disk:
    case ChartId::half_ball: {
      const double c = conformal_factor(grid, x);
      Vec3 g{1.0, 1.0, 1.0};
      for (int a = 0; a < grid.ndim; ++a) g[a] = c;
      return g;
    }
    default: return {1.0, 1.0, 1.0};
  }
}

double chart_volume_density(const StructuredGrid& grid, const Vec3& x) {
  switch (grid.chart) {
    case ChartId::product_s1_hemisphere: return std::sin(x[1]);
    case ChartId::half_ellipse_rz: return x[0];
    case ChartId::disk:
    case ChartId::half_ball: return std::pow(conformal_factor(grid, x), 0.5 * grid.ndim);
    default: return 1.0;
  }
}

std::array<double, 27> christoffel(const StructuredGrid& grid, const Vec3& x) {
  std::array<double, 27> gamma{};
  const int n = grid.ndim;
  const Vec3 g = chart_metric_diag(grid, x);
  // dg[c][a] = d g_aa / d x^c
  double dg[3][3] = {};
  const double t = 1e-6;
  for (int c = 0; c < n; ++c) {
    Vec3 xp = x, xm = x;
    xp[c] += t;
    xm[c] -= t;
    const Vec3 gp = chart_metric_diag(grid, xp);
    const Vec3 gm = chart_metric_diag(grid, xm);
    for (int a = 0; a < n; ++a) dg[c][a] = (gp[a] - gm[a]) / (2.0 * t);
  }
  // Diagonal metric: Gamma^i_{jk} = 1/2 g^{ii} (d_j g_ik + d_k g_ij - d_i g_jk).
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double v = 0.0;
        if (i == k) v += dg[j][i];
        if (i == j) v += dg[k][i];
        if (j == k) v -= dg[i][j];
        gamma[(i * 3 + j) * 3 + k] = 0.5 * v / g[i];
      }
    }
  }
  return gamma;
}

std::vector<CellKind> classify_cells(const StructuredGrid& grid, std::span<const CellKind> mask) {
  std::vector<CellKind> out(mask.size(), CellKind::exterior);
  const int axis_side = symmetry_axis(grid.chart);
  for (std::size_t c = 0; c < mask.size(); ++c) {
    if (mask[c] == CellKind::exterior) continue;
    const auto ijk = grid.ijk(c);
    bool boundary = false;
    for (int a = 0; a < grid.ndim && !boundary; ++a) {
      for (int dir : {-1, 1}) {
        auto nb = ijk;
        nb[a] += dir;
        if (nb[a] < 0 || nb[a] >= grid.dims[a]) {
          if (grid.periodic[a]) continue;
          if (a == axis_side && dir == -1) continue;
          boundary = true;
          break;
        }
        if (mask[grid.index(nb[0], nb[1], nb[2])] == CellKind::exterior) {
          boundary = true;
          break;
        }
      }
    }
    out[c] = boundary ? CellKind::boundary : CellKind::interior;
  }
  return out;
}

double chart_distance(const StructuredGrid& grid, const Vec3& a, const Vec3& b) {
  double d2 = 0.0;
  for (int k = 0; k < grid.ndim; ++k) {
    double d = std::abs(a[k] - b[k]);
    if (grid.periodic[k]) {
      const double p = grid.period(k);
      d = std::fmod(d, p);
      d = std::min(d, p - d);
    }
    d2 += d * d;
  }
  return std::sqrt(d2);
}

DomainPtr build_chart(ChartId chart, std::span<const int> resolution, const ChartParams& params) {
  auto dom = std::make_shared<Domain>();
  StructuredGrid& grid = dom->grid;
  grid.chart = chart;
  grid.params = params;

  switch (chart) {
    case ChartId::box:
    case ChartId::disk:
    case ChartId::half_ball:
      require(params.dim >= 1 && params.dim <= 3, "chart dimension must be 1..3");
      require(chart == ChartId::box || params.dim >= 2, "disk/half_ball need dim >= 2");
      grid.ndim = params.dim;
      break;
    case ChartId::product_s1_hemisphere: grid.ndim = 3; break;
    case ChartId::half_ellipse_rz: grid.ndim = 2; break;
  }
  const int n = grid.ndim;
  require(!resolution.empty(), "resolution must not be empty");
  require(resolution.size() == 1 || static_cast<int>(resolution.size()) == n,
          "resolution must give one value or one per axis");
  std::array<int, 3> res{1, 1, 1};
  for (int a = 0; a < n; ++a) res[a] = resolution.size() == 1 ? resolution[0] : resolution[a];
  if (chart == ChartId::half_ball && resolution.size() == 1) res[n - 1] = std::max(1, resolution[0] / 2);
  for (int a = 0; a < n; ++a) require(res[a] >= 8, "resolution must be >= 8 cells per axis");

  switch (chart) {
    case ChartId::box:
      require(params.side > 0.0, "box side must be positive");
      for (int a = 0; a < n; ++a) grid.spacing[a] = params.side / res[a];
      break;
    case ChartId::disk:
      require(params.radius > 0.0, "radius must be positive");
      for (int a = 0; a < n; ++a) {
        grid.origin[a] = -params.radius;
        grid.spacing[a] = 2.0 * params.radius / res[a];
      }
      break;
    case ChartId::half_ball:
      require(params.radius > 0.0, "radius must be positive");
      for (int a = 0; a + 1 < n; ++a) {
        grid.origin[a] = -params.radius;
        grid.spacing[a] = 2.0 * params.radius / res[a];
      }
      grid.origin[n - 1] = 0.0;
      grid.spacing[n - 1] = params.radius / res[n - 1];
      break;
    case ChartId::product_s1_hemisphere:
      grid.spacing = {2.0 * kPi / res[0], 0.5 * kPi / res[1], 2.0 * kPi / res[2]};
      grid.periodic = {true, false, true};
      break;
    case ChartId::half_ellipse_rz:
      require(params.elongation > 0.0, "elongation l must be positive");
      grid.spacing = {1.0 / res[0], 2.0 * params.elongation / res[1], 1.0};
      grid.origin = {0.0, -params.elongation, 0.0};
      break;
  }
  for (int a = 0; a < n; ++a) grid.dims[a] = res[a];

  const std::size_t total = static_cast<std::size_t>(grid.dims[0]) * grid.dims[1] * grid.dims[2];
  std::vector<CellKind> in(total, CellKind::exterior);
  for (std::size_t c = 0; c < total; ++c) {
    if (inside(grid, grid.center(c))) in[c] = CellKind::interior;
  }
  grid.mask = classify_cells(grid, in);

  // Every axis must carry at least 4 interior cells along some grid line.
  for (int a = 0; a < n; ++a) {
    int best = 0;
    for (std::size_t c = 0; c < total; ++c) {
      const auto ijk = grid.ijk(c);
      if (ijk[a] != 0) continue;
      int count = 0;
      for (int t = 0; t < grid.dims[a]; ++t) {
        auto q = ijk;
        q[a] = t;
        if (grid.mask[grid.index(q[0], q[1], q[2])] == CellKind::interior) ++count;
      }
      best = std::max(best, count);
    }
    require(best >= 4, "resolution too small to resolve the boundary (fewer than 4 interior cells across)");
  }

  // Metric.
  MetricField& m = dom->metric;
  m.ndim = n;
  m.g.assign(total * n * n, 0.0);
  m.g_inv.assign(total * n * n, 0.0);
  m.sqrt_det.assign(total, 0.0);
  for (std::size_t c = 0; c < total; ++c) {
    const Vec3 x = grid.center(c);
    const Vec3 gd = chart_metric_diag(grid, x);
    for (int a = 0; a < n; ++a) {
      m.g[c * n * n + a * n + a] = gd[a];
      m.g_inv[c * n * n + a * n + a] = 1.0 / gd[a];
    }
    m.sqrt_det[c] = chart_volume_density(grid, x);
  }

  // Weights and links.
  dom->measure_factor = chart == ChartId::half_ellipse_rz ? 2.0 * kPi : 1.0;
  const double vol = grid.cell_volume();
  dom->node_weight.assign(total, 0.0);
  for (std::size_t c = 0; c < total; ++c) {
    if (!grid.active(c)) continue;
    dom->node_weight[c] = dom->measure_factor * m.sqrt_det[c] * vol;
    dom->active_nodes.push_back(c);
  }
  double v = 0.0;
  for (std::size_t c : dom->active_nodes) v += dom->node_weight[c];
  dom->volume = v;

  for (int a = 0; a < 3; ++a) {
    dom->plus[a].assign(total, -1);
    dom->minus[a].assign(total, -1);
    dom->link_weight[a].assign(total, 0.0);
    dom->conductance[a].assign(total, 0.0);
  }
  for (int a = 0; a < n; ++a) {
    const double h = grid.spacing[a];
    for (std::size_t c : dom->active_nodes) {
      auto q = grid.ijk(c);
      q[a] += 1;
      if (q[a] >= grid.dims[a]) {
        if (!grid.periodic[a]) continue;
        q[a] = 0;
      }
      const std::size_t nb = grid.index(q[0], q[1], q[2]);
      if (!grid.active(nb) || nb == c) continue;
      Vec3 xf = grid.center(c);
      xf[a] += 0.5 * h;
      const Vec3 gd = chart_metric_diag(grid, xf);
      const double w = dom->measure_factor * chart_volume_density(grid, xf) / gd[a] * vol;
      dom->plus[a][c] = static_cast<std::int64_t>(nb);
      dom->minus[a][nb] = static_cast<std::int64_t>(c);
      dom->link_weight[a][c] = w;
      dom->conductance[a][c] = w / (h * h);
    }
  }

  int plane = 0;
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b, ++plane) {
      dom->plaquette[plane].assign(total, 0);
      if (b >= n) continue;
      for (std::size_t c : dom->active_nodes) {
        const auto pa = dom->plus[a][c];
        const auto pb = dom->plus[b][c];
        if (pa < 0 || pb < 0) continue;
        if (dom->plus[b][pa] < 0 || dom->plus[a][pb] < 0) continue;
        dom->plaquette[plane][c] = 1;
      }
    }
  }

  if (chart == ChartId::product_s1_hemisphere) {
    dom->cap_angular_axis = 2;
    for (int i = 0; i < grid.dims[0]; ++i) {
      std::vector<std::size_t> ring;
      for (int k = 0; k < grid.dims[2]; ++k) ring.push_back(grid.index(i, 0, k));
      dom->caps.push_back(std::move(ring));
    }
  }

  // Boundary normals from the active level-set piece.
  BoundaryNormal& bn = dom->normal;
  const int npieces = piece_count(grid);
  for (std::size_t c = 0; c < total; ++c) {
    if (grid.mask[c] != CellKind::boundary) continue;
    const Vec3 x = grid.center(c);
    int best = 0;
    double best_d = -1e300;
    for (int k = 0; k < npieces; ++k) {
      Vec3 grad;
      const double phi = piece_value(grid, k, x, grad);
      const double gn = std::sqrt(dot3(grad, grad));
      const double d = gn > 0.0 ? phi / gn : -1e300;
      if (d > best_d) {
        best_d = d;
        best = k;
      }
    }
    bn.nodes.push_back(c);
    bn.piece.push_back(best);
    bn.nu.push_back(normal_from_piece(grid, best, x));
  }
  return dom;
}

double shape_quadform(const Domain& dom, std::size_t k, const Vec3& xi) {
  const StructuredGrid& grid = dom.grid;
  const int n = grid.ndim;
  const Vec3 p = grid.center(dom.normal.nodes[k]);
  const int piece = dom.normal.piece[k];
  const double t = 1e-5 * grid.max_spacing();
  Vec3 xp = p, xm = p;
  for (int a = 0; a < n; ++a) {
    xp[a] += t * xi[a];
    xm[a] -= t * xi[a];
  }
  const Vec3 np = normal_from_piece(grid, piece, xp);
  const Vec3 nm = normal_from_piece(grid, piece, xm);
  const Vec3 nu = dom.normal.nu[k];
  const auto gamma = christoffel(grid, p);
  const Vec3 gd = chart_metric_diag(grid, p);
  double q = 0.0;
  for (int j = 0; j < n; ++j) {
    double cov = (np[j] - nm[j]) / (2.0 * t);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) cov += gamma[(j * 3 + a) * 3 + b] * xi[a] * nu[b];
    q += gd[j] * xi[j] * cov;
  }
  return q;
}

ConvexityReport convexity_check(const Domain& dom) {
  const StructuredGrid& grid = dom.grid;
  const int n = grid.ndim;
  ConvexityReport rep;
  rep.max_value = -1e300;
  auto consider = [&](double v, std::size_t node) {
    ++rep.samples;
    if (v > rep.max_value) {
      rep.max_value = v;
      rep.argmax_node = node;
    }
  };
  for (std::size_t k = 0; k < dom.normal.nodes.size(); ++k) {
    const std::size_t node = dom.normal.nodes[k];
    const Vec3 p = grid.center(node);
    const Vec3 gd = chart_metric_diag(grid, p);
    const Vec3 nu = dom.normal.nu[k];
    auto gdot = [&](const Vec3& a, const Vec3& b) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += gd[i] * a[i] * b[i];
      return s;
    };
    // g-orthonormal tangent basis by Gram-Schmidt on the coordinate axes.
    std::vector<Vec3> tangents;
    for (int a = 0; a < n && static_cast<int>(tangents.size()) < n - 1; ++a) {
      Vec3 e{0.0, 0.0, 0.0};
      e[a] = 1.0;
      const double pn = gdot(e, nu);
      for (int i = 0; i < n; ++i) e[i] -= pn * nu[i];
      for (const auto& t : tangents) {
        const double pt = gdot(e, t);
        for (int i = 0; i < n; ++i) e[i] -= pt * t[i];
      }
      const double len = std::sqrt(gdot(e, e));
      if (len < 1e-8) continue;
      for (int i = 0; i < n; ++i) e[i] /= len;
      tangents.push_back(e);
    }
    if (tangents.size() == 1) {
      consider(shape_quadform(dom, k, tangents[0]), node);
    } else if (tangents.size() == 2) {
      const Vec3& t1 = tangents[0];
      const Vec3& t2 = tangents[1];
      Vec3 sp{}, sm{};
      for (int i = 0; i < 3; ++i) {
        sp[i] = t1[i] + t2[i];
        sm[i] = t1[i] - t2[i];
      }
      const double b11 = shape_quadform(dom, k, t1);
      const double b22 = shape_quadform(dom, k, t2);
      const double b12 = 0.25 * (shape_quadform(dom, k, sp) - shape_quadform(dom, k, sm));
      const double mean = 0.5 * (b11 + b22);
      const double rad = std::sqrt(0.25 * (b11 - b22) * (b11 - b22) + b12 * b12);
      consider(mean + rad, node);
    }
    // Surface of revolution: the azimuthal principal direction contributes nu^r / r.
    if (grid.chart == ChartId::half_ellipse_rz) consider(nu[0] / p[0], node);
  }
  if (rep.samples == 0) rep.max_value = 0.0;
  return rep;
}

std::vector<std::size_t> metric_ball_at(const Domain& dom, const Vec3& center, double radius) {
  const StructuredGrid& grid = dom.grid;
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    if (a >= grid.ndim) continue;
    const double rel = (center[a] - grid.origin[a]) / grid.spacing[a] - 0.5;
    const int span = static_cast<int>(std::ceil(radius / grid.spacing[a])) + 1;
    lo[a] = static_cast<int>(std::floor(rel)) - span;
    hi[a] = static_cast<int>(std::ceil(rel)) + span;
    if (grid.periodic[a]) {
      if (hi[a] - lo[a] + 1 >= grid.dims[a]) {
        lo[a] = 0;
        hi[a] = grid.dims[a] - 1;
      }
    } else {
      lo[a] = std::max(lo[a], 0);
      hi[a] = std::min(hi[a], grid.dims[a] - 1);
    }
  }
  std::vector<std::size_t> out;
  for (int i = lo[0]; i <= hi[0]; ++i) {
    for (int j = lo[1]; j <= hi[1]; ++j) {
      for (int k = lo[2]; k <= hi[2]; ++k) {
        std::array<int, 3> q{i, j, k};
        for (int a = 0; a < grid.ndim; ++a) {
          if (grid.periodic[a]) q[a] = ((q[a] % grid.dims[a]) + grid.dims[a]) % grid.dims[a];
        }
        const std::size_t c = grid.index(q[0], q[1], q[2]);
        if (!grid.active(c)) continue;
        if (chart_distance(grid, grid.center(c), center) < radius) out.push_back(c);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> metric_ball(const Domain& dom, std::size_t center_node, double radius) {
  if (radius < 2.0 * dom.grid.max_spacing()) {
    throw ConfigError("metric_ball: radius below resolvable scale (2 * max spacing)");
  }
  return metric_ball_at(dom, dom.grid.center(center_node), radius);
}

double domain_diameter(const Domain& dom) {
  const StructuredGrid& grid = dom.grid;
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (std::size_t c : dom.active_nodes) {
    const Vec3 x = grid.center(c);
    for (int a = 0; a < grid.ndim; ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
    }
  }
  double d2 = 0.0;
  for (int a = 0; a < grid.ndim; ++a) {
    const double ext = grid.periodic[a] ? 0.5 * grid.period(a) : hi[a] - lo[a];
    d2 += ext * ext;
  }
  return std::sqrt(d2);
}

}  // namespace gllab
