#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gllab/error.hpp"
#include "gllab/grid.hpp"

using namespace gllab;

namespace {

DomainPtr chart(ChartId id, std::vector<int> res, ChartParams p = {}) { return build_chart(id, res, p); }

ChartParams dim(int d) {
  ChartParams p;
  p.dim = d;
  return p;
}

bool face_neighbour(const Domain& dom, std::size_t c, CellKind want) {
  const auto& g = dom.grid;
  const auto q = g.ijk(c);
  for (int a = 0; a < g.ndim; ++a)
    for (int dir : {-1, 1}) {
      auto nb = q;
      nb[a] += dir;
      if (g.periodic[a]) nb[a] = (nb[a] + g.dims[a]) % g.dims[a];
      if (nb[a] < 0 || nb[a] >= g.dims[a]) continue;
      const auto k = g.mask[g.index(nb[0], nb[1], nb[2])];
      if (want == CellKind::exterior ? k != CellKind::exterior : k == want) return true;
    }
  return false;
}

}  // namespace

TEST_CASE("box chart is flat") {
  auto dom = chart(ChartId::box, {32}, dim(3));
  for (std::size_t c = 0; c < dom->size(); ++c) {
    CHECK(dom->metric.sqrt_det[c] == 1.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(dom->metric.component(c, i, j) == (i == j ? 1.0 : 0.0));
  }
  CHECK(dom->volume == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("product chart metric is diag(1, 1, sin^2 r)") {
  auto dom = chart(ChartId::product_s1_hemisphere, {16, 16, 16});
  for (std::size_t c = 0; c < dom->size(); ++c) {
    const double r = dom->grid.center(c)[1];
    CHECK(std::abs(dom->metric.sqrt_det[c] - std::sin(r)) <= 1e-12);
    CHECK(dom->metric.component(c, 0, 0) == 1.0);
    CHECK(dom->metric.component(c, 1, 1) == 1.0);
    CHECK(std::abs(dom->metric.component(c, 2, 2) - std::sin(r) * std::sin(r)) <= 1e-12);
  }
  // The s axis is periodic: no cell is a boundary cell because of it.
  const auto& g = dom->grid;
  CHECK(g.periodic[0]);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto q = g.ijk(c);
    if (g.mask[c] != CellKind::boundary) continue;
    // Boundary status must come from the r axis (the hemisphere rim).
    CHECK(q[1] == g.dims[1] - 1);
  }
}

TEST_CASE("half-ellipse mask matches the defining inequality") {
  ChartParams p;
  p.elongation = 3.0;
  auto dom = chart(ChartId::half_ellipse_rz, {128, 128}, p);
  const auto& g = dom->grid;
  for (int i = 0; i < 128; ++i)
    for (int j = 0; j < 128; ++j) {
      const double r = (i + 0.5) / 128.0;
      const double z = -3.0 + (j + 0.5) * 6.0 / 128.0;
      const bool in = r * r + z * z / 9.0 <= 1.0;
      CHECK(g.active(g.index(i, j)) == in);
    }
  // Cells on the axis away from the tips are interior, not boundary.
  for (int j = 32; j < 96; ++j) CHECK(g.mask[g.index(0, j)] == CellKind::interior);
  // The arc is boundary.
  CHECK(g.mask[g.index(127, 64)] == CellKind::boundary);
  CHECK(dom->measure_factor == doctest::Approx(2.0 * std::numbers::pi));
}

TEST_CASE("grid invariants hold on every chart") {
  ChartParams ell;
  ell.elongation = 1.5;
  std::vector<DomainPtr> doms = {chart(ChartId::box, {12}, dim(2)),         chart(ChartId::disk, {40}, dim(2)),
                                 chart(ChartId::disk, {16}, dim(3)),        chart(ChartId::half_ball, {40}, dim(2)),
                                 chart(ChartId::half_ellipse_rz, {32, 48}, ell), chart(ChartId::product_s1_hemisphere, {16, 8, 8})};
  for (const auto& dom : doms) {
    const auto& g = dom->grid;
    const int n = g.ndim;
    for (int a = 0; a < n; ++a) CHECK(g.spacing[a] > 0.0);
    // Re-deriving the classification from the mask changes nothing.
    CHECK(classify_cells(g, g.mask) == g.mask);
    for (std::size_t c : dom->active_nodes) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          CHECK(dom->metric.component(c, i, j) == dom->metric.component(c, j, i));
          double id = 0.0;
          for (int k = 0; k < n; ++k) id += dom->metric.inv_component(c, i, k) * dom->metric.component(c, k, j);
          CHECK(std::abs(id - (i == j ? 1.0 : 0.0)) <= 1e-12);
        }
        CHECK(dom->metric.component(c, i, i) > 0.0);
      }
      if (g.mask[c] == CellKind::boundary) CHECK(face_neighbour(*dom, c, CellKind::exterior));
    }
    for (std::size_t k = 0; k < dom->normal.nodes.size(); ++k) {
      const auto node = dom->normal.nodes[k];
      const auto& nu = dom->normal.nu[k];
      double len = 0.0;
      for (int a = 0; a < n; ++a) len += dom->metric.component(node, a, a) * nu[a] * nu[a];
      CHECK(std::abs(std::sqrt(len) - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("convexity diagnostic") {
  SUBCASE("disk boundary is strictly convex") {
    auto dom = chart(ChartId::disk, {64}, dim(2));
    CHECK(convexity_check(*dom).max_value < 0.0);
  }
  SUBCASE("flat face of a half ball contributes zero") {
    auto dom = chart(ChartId::half_ball, {64}, dim(2));
    for (std::size_t k = 0; k < dom->normal.nodes.size(); ++k) {
      const auto node = dom->normal.nodes[k];
      if (dom->grid.ijk(node)[1] != 0) continue;
      if (std::abs(dom->grid.center(node)[0]) > 0.5) continue;
      CHECK(std::abs(shape_quadform(*dom, k, {1.0, 0.0, 0.0})) <= 1e-12);
    }
  }
  SUBCASE("ellipsoid chart") {
    ChartParams p;
    p.elongation = 3.0;
    auto dom = chart(ChartId::half_ellipse_rz, {64, 384}, p);
    CHECK(convexity_check(*dom).max_value <= 1e-6);
  }
}

TEST_CASE("metric balls") {
  auto dom = chart(ChartId::box, {64}, dim(2));
  const std::size_t mid = dom->grid.index(32, 32);
  SUBCASE("a ball of the full diameter holds every cell") {
    CHECK(metric_ball(*dom, mid, 2.0).size() == dom->active_nodes.size());
  }
  SUBCASE("monotone in the radius") {
    std::vector<std::size_t> prev;
    for (double r : {0.05, 0.1, 0.2, 0.3}) {
      const auto cur = metric_ball(*dom, mid, r);
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
  SUBCASE("volume converges to the disc area") {
    const double r = 0.25;
    const double area = metric_ball(*dom, mid, r).size() * dom->grid.cell_volume();
    CHECK(std::abs(area - std::numbers::pi * r * r) / (std::numbers::pi * r * r) <= 2.0 * dom->grid.max_spacing() / r);
  }
  SUBCASE("balls on the ellipse boundary stay inside the mask") {
    ChartParams p;
    p.elongation = 3.0;
    auto ell = chart(ChartId::half_ellipse_rz, {64, 384}, p);
    const auto node = ell->normal.nodes.front();
    for (std::size_t c : metric_ball(*ell, node, 0.1)) CHECK(ell->active(c));
  }
}

TEST_CASE("chart construction errors") {
  CHECK_THROWS_AS(chart(ChartId::box, {4}, dim(2)), ConfigError);
  CHECK_THROWS_AS(chart_from_string("torus"), ConfigError);
  CHECK(chart_from_string(to_string(ChartId::half_ellipse_rz)) == ChartId::half_ellipse_rz);
}
