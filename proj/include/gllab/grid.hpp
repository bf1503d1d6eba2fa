#pragma once

// Structured grids over explicit coordinate charts.
//
// Nodes sit at cell centres. A cell is either outside the domain (exterior),
// fully surrounded by domain cells (interior) or next to the domain edge
// (boundary). Neighbouring domain cells are joined by links; the discrete
// Neumann condition is the absence of links that leave the domain.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gllab {

enum class ChartId { box, disk, product_s1_hemisphere, half_ellipse_rz, half_ball };

std::string to_string(ChartId id);
ChartId chart_from_string(std::string_view name);

enum class CellKind : std::uint8_t { exterior = 0, interior = 1, boundary = 2 };

using Vec3 = std::array<double, 3>;

struct ChartParams {
  int dim = 2;               // box, disk (ball) and half_ball
  double side = 1.0;         // box edge length
  double radius = 1.0;       // disk / ball / half_ball radius
  double elongation = 3.0;   // half_ellipse_rz: the ellipsoid is x^2+y^2+(z/l)^2 <= 1
  double metric_amp = 0.0;   // disk / half_ball: conformal metric (1 + a|x|^2) delta
};

struct StructuredGrid {
  ChartId chart = ChartId::box;
  ChartParams params;
  int ndim = 0;
  std::array<int, 3> dims{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};  // lower corner of cell 0
  std::array<bool, 3> periodic{false, false, false};
  std::vector<CellKind> mask;

  std::size_t size() const { return mask.size(); }
  // Row-major: the last axis varies fastest.
  std::size_t index(int i, int j = 0, int k = 0) const {
    return (static_cast<std::size_t>(i) * dims[1] + static_cast<std::size_t>(j)) * dims[2] +
           static_cast<std::size_t>(k);
  }
  std::array<int, 3> ijk(std::size_t idx) const;
  Vec3 center(std::size_t idx) const;
  double cell_volume() const;
  double max_spacing() const;
  double period(int axis) const { return dims[axis] * spacing[axis]; }
  bool active(std::size_t idx) const { return mask[idx] != CellKind::exterior; }
};

/// Per-node metric tensor in chart components (row-major ndim x ndim).
/// `sqrt_det` is the volume density; for half_ellipse_rz it is the
/// cylindrical weight r.
struct MetricField {
  int ndim = 0;
  std::vector<double> g;
  std::vector<double> g_inv;
  std::vector<double> sqrt_det;

  double component(std::size_t node, int i, int j) const { return g[node * ndim * ndim + i * ndim + j]; }
  double inv_component(std::size_t node, int i, int j) const {
    return g_inv[node * ndim * ndim + i * ndim + j];
  }
};

struct BoundaryNormal {
  std::vector<std::size_t> nodes;  // boundary node indices, ascending
  std::vector<Vec3> nu;            // inward unit normal (w.r.t. g), chart components
  std::vector<int> piece;          // which boundary piece is active at the node
};

/// Immutable bundle of grid, metric, boundary data and the discretisation
/// tables every numerical module shares. `node_weight` and `link_weight`
/// include the chart's measure factor (2*pi for the axisymmetric chart).
class Domain {
 public:
  StructuredGrid grid;
  MetricField metric;
  BoundaryNormal normal;

  double measure_factor = 1.0;
  double volume = 0.0;
  std::vector<double> node_weight;
  std::vector<std::size_t> active_nodes;
  // plus[a][c] / minus[a][c]: linked neighbour along axis a, or -1.
  std::array<std::vector<std::int64_t>, 3> plus;
  std::array<std::vector<std::int64_t>, 3> minus;
  // Weight of link c -> plus[a][c]: sqrt_det * g^{aa} * cell volume at the face.
  std::array<std::vector<double>, 3> link_weight;
  // link_weight / h_a^2, the stiffness coefficient.
  std::array<std::vector<double>, 3> conductance;
  // Plaquettes in plane (a,b), a<b, anchored at cell c.
  // plane index: 0=(0,1), 1=(0,2), 2=(1,2).
  std::array<std::vector<std::uint8_t>, 3> plaquette;
  // Polar caps closing the angular rings next to a coordinate axis
  // (product chart only). Each cap lists its ring cells in angular order.
  std::vector<std::vector<std::size_t>> caps;
  int cap_angular_axis = -1;

  int ndim() const { return grid.ndim; }
  std::size_t size() const { return grid.size(); }
  bool active(std::size_t c) const { return grid.active(c); }
};

using DomainPtr = std::shared_ptr<const Domain>;

/// Builds one of the built-in charts. `resolution` gives cells per axis; a
/// single value is broadcast to every axis. For disk/half_ball it is the
/// number of cells across the diameter.
DomainPtr build_chart(ChartId chart, std::span<const int> resolution, const ChartParams& params);

/// Diagonal metric components g_aa at an arbitrary chart point.
Vec3 chart_metric_diag(const StructuredGrid& grid, const Vec3& x);
/// Volume density (sqrt det g, or r for the axisymmetric chart).
double chart_volume_density(const StructuredGrid& grid, const Vec3& x);
/// Christoffel symbols Gamma^i_{jk} at x (flattened [i][j][k]), by central
/// differencing of the analytic metric.
std::array<double, 27> christoffel(const StructuredGrid& grid, const Vec3& x);

/// Reclassifies a cell set into interior/boundary cells. Pure function of
/// the in/out pattern, the periodic flags and the chart's symmetry axes.
std::vector<CellKind> classify_cells(const StructuredGrid& grid, std::span<const CellKind> mask);

/// Chart-coordinate distance (minimal image on periodic axes).
double chart_distance(const StructuredGrid& grid, const Vec3& a, const Vec3& b);

/// ⟨∇_ξ ν, ξ⟩_g at boundary node number k of `normal`, with ν finite
/// differenced along ξ.
double shape_quadform(const Domain& dom, std::size_t k, const Vec3& xi);

struct ConvexityReport {
  double max_value = 0.0;
  std::size_t argmax_node = 0;
  std::size_t samples = 0;
};

ConvexityReport convexity_check(const Domain& dom);

/// Active cells whose centre lies at chart distance < radius from the centre
/// node. Sorted ascending.
std::vector<std::size_t> metric_ball(const Domain& dom, std::size_t center_node, double radius);
/// Same, centred at an arbitrary chart point.
std::vector<std::size_t> metric_ball_at(const Domain& dom, const Vec3& center, double radius);

/// Largest chart-coordinate distance between two active cell centres
/// (bounding-box estimate).
double domain_diameter(const Domain& dom);

}  // namespace gllab
