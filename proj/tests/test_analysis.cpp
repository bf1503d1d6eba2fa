#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gllab/analysis.hpp"
#include "gllab/error.hpp"
#include "gllab/solver.hpp"

using namespace gllab;

namespace {

DomainPtr box(int n, int d) {
  ChartParams p;
  p.dim = d;
  const int r[1] = {n};
  return build_chart(ChartId::box, r, p);
}

DomainPtr disk(int n) {
  ChartParams p;
  p.dim = 2;
  const int r[1] = {n};
  return build_chart(ChartId::disk, r, p);
}

DomainPtr product(int ns) {
  const int r[3] = {ns, 16, 8};
  return build_chart(ChartId::product_s1_hemisphere, r, {});
}

double dist(const Vec3& a, const Vec3& b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

ComplexField solved_vortex(double eps, int res) {
  SolverConfig cfg;
  cfg.residual_tol = 1e-8;
  auto out = solve(init_vortex(disk(res), eps, {0.0, 0.0, 0.0}), cfg);
  REQUIRE(out.report.converged);
  return out.field;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

}  // namespace

TEST_CASE("energy measure of the zero field counts cells") {
  const double eps = 0.1;
  auto dom = disk(64);
  const auto mu = energy_measure(init_constant(dom, eps, {0.0, 0.0}));
  const double h = dom->grid.spacing[0];
  const double per_cell = h * h / (4.0 * eps * eps) / std::abs(std::log(eps));
  const std::size_t c0 = dom->grid.index(32, 32);
  const Vec3 x0 = dom->grid.center(c0);
  for (double r : {0.1, 0.25, 0.5}) {
    std::size_t count = 0;
    for (std::size_t c : dom->active_nodes)
      if (dist(dom->grid.center(c), x0, 2) < r) ++count;
    CHECK(mu.ball(ball_stencil(dom->grid, r), c0) == doctest::Approx(count * per_cell).epsilon(1e-12));
  }
  CHECK(mu.total() == doctest::Approx(dom->active_nodes.size() * per_cell).epsilon(1e-12));
}

TEST_CASE("unit constant carries no measure") {
  auto dom = disk(48);
  const auto u = init_constant(dom, 0.1, {1.0, 0.0});
  const auto mu = energy_measure(u);
  CHECK(mu.total() == 0.0);
  const std::size_t c0 = dom->grid.index(24, 24);
  const auto radii = linspace(0.1, 0.4, 6);
  for (double v : density_profile(mu, c0, radii).values) CHECK(v == 0.0);
  CHECK(singular_set(mu, 0.1, 1e-6).cells.empty());
  const auto cl = courant_lebesgue_search(u, dom->grid.center(c0));
  CHECK(cl.value == 0.0);
  CHECK(cl.c_fit == 0.0);
}

TEST_CASE("density profile argument errors") {
  auto dom = disk(48);
  const auto mu = energy_measure(init_constant(dom, 0.1, {0.0, 0.0}));
  const double ok[3] = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(density_profile(mu, 0, ok), ConfigError);  // corner cell lies outside the disk
  const double tiny[3] = {dom->grid.max_spacing(), 0.2, 0.3};
  CHECK_THROWS_AS(density_profile(mu, dom->grid.index(24, 24), tiny), ConfigError);
  const double two[2] = {0.1, 0.2};
  const std::size_t centers[1] = {dom->grid.index(24, 24)};
  CHECK_THROWS_AS(monotonicity_report(mu, centers, two), ConfigError);
}

TEST_CASE("monotonicity") {
  SUBCASE("disk vortex passes with small chi") {
    const auto u = solved_vortex(0.1, 80);
    const auto& dom = u.dom();
    const auto mu = energy_measure(u);
    const double h = dom.grid.max_spacing();
    const auto radii = linspace(4.0 * h, 0.4, 12);
    const std::size_t centers[3] = {dom.grid.index(40, 40), dom.grid.index(50, 40), dom.grid.index(40, 30)};
    const auto rep = monotonicity_report(mu, centers, radii);
    CHECK(rep.all_pass);
    for (const auto& e : rep.entries) CHECK(e.chi_fit <= 0.05);
  }
  SUBCASE("concentrated energy in three dimensions is flagged") {
    // A tiny zero blob: mu(B_r) stops growing, so r^{-1} mu(B_r) decays.
    auto dom = box(32, 3);
    auto u = init_constant(dom, 0.2, {1.0, 0.0});
    const std::size_t c0 = dom->grid.index(16, 16, 16);
    const Vec3 x0 = dom->grid.center(c0);
    for (std::size_t c : dom->active_nodes)
      if (dist(dom->grid.center(c), x0, 3) < 1.5 * dom->grid.spacing[0]) u.values[c] = 0.0;
    const auto mu = energy_measure(u);
    const auto radii = linspace(4.0 * dom->grid.spacing[0], 0.4, 8);
    const std::size_t centers[1] = {c0};
    const auto rep = monotonicity_report(mu, centers, radii);
    CHECK_FALSE(rep.all_pass);
    CHECK(rep.entries.front().flagged);
  }
  SUBCASE("uniform three-dimensional density needs no correction") {
    auto dom = box(32, 3);
    const auto mu = energy_measure(init_constant(dom, 0.2, {0.0, 0.0}));
    const auto radii = linspace(4.0 * dom->grid.spacing[0], 0.4, 8);
    const std::size_t centers[1] = {dom->grid.index(16, 16, 16)};
    const auto rep = monotonicity_report(mu, centers, radii);
    CHECK(rep.all_pass);
    CHECK(rep.entries.front().chi_fit == 0.0);
  }
}

TEST_CASE("Courant-Lebesgue search on a unimodular wave") {
  // Only the shell term survives: r ∫_{∂B_r} |∂_ν u|^2 = a^2 π r^2, smallest at the first radius.
  const double a = 2.0;
  auto dom = box(256, 2);
  ComplexField u(dom, 0.01);
  for (std::size_t c : dom->active_nodes) u.values[c] = std::polar(1.0, a * dom->grid.center(c)[0]);
  const auto cl = courant_lebesgue_search(u, {0.5, 0.5, 0.0});
  REQUIRE(cl.radii.size() >= 3);
  CHECK(cl.r_lo == doctest::Approx(0.1));
  CHECK(cl.r_hi == doctest::Approx(std::pow(0.01, 0.25)));
  CHECK(cl.radius == cl.radii.front());
  for (std::size_t i = 0; i < cl.radii.size(); ++i) {
    const double r = cl.radii[i];
    CHECK(std::abs(cl.values[i] - a * a * std::numbers::pi * r * r) <= 0.02 * a * a * std::numbers::pi * r * r);
  }
  SUBCASE("too coarse a grid is rejected") {
    auto coarse = box(8, 2);
    CHECK_THROWS_AS(courant_lebesgue_search(init_constant(coarse, 0.01, {1.0, 0.0}), {0.5, 0.5, 0.0}), ConfigError);
  }
}

TEST_CASE("eta scan") {
  SUBCASE("unit constant: every centre small, no counterexample") {
    auto dom = disk(80);
    const auto rep = eta_scan(init_constant(dom, 0.05, {1.0, 0.0}), 0.25, 0.05, 0.25);
    CHECK(!rep.centers.empty());
    CHECK(rep.passing == rep.centers.size());
    CHECK(rep.counterexamples == 0);
  }
  SUBCASE("vortex: the core ball is not small and the predicate is consistent") {
    const auto u = solved_vortex(0.1, 80);
    const auto rep = eta_scan(u, 0.25, 0.05, 0.25);
    CHECK(rep.counterexamples == 0);
    bool core_seen = false;
    for (const auto& e : rep.centers) {
      CHECK(e.counterexample == (e.energy_small && e.min_modulus < 0.75));
      if (e.min_modulus < 0.5) {
        core_seen = true;
        CHECK_FALSE(e.energy_small);
      }
    }
    CHECK(core_seen);
  }
  SUBCASE("ball radius below eight cells is rejected") {
    auto dom = disk(32);
    CHECK_THROWS_AS(eta_scan(init_constant(dom, 0.05, {1.0, 0.0}), 0.1, 0.05, 0.25), ConfigError);
  }
}

TEST_CASE("singular set") {
  const auto u = solved_vortex(0.1, 80);
  const auto mu = energy_measure(u);
  const auto lo = singular_set(mu, 0.1, 0.5);
  const auto hi = singular_set(mu, 0.1, 1.0);
  CHECK(std::includes(lo.cells.begin(), lo.cells.end(), hi.cells.begin(), hi.cells.end()));
  for (double d : hi.density) CHECK(d >= 1.0);
  CHECK(lo.max_density == hi.max_density);
  const std::size_t core = u.dom().grid.index(40, 40);
  CHECK(std::binary_search(lo.cells.begin(), lo.cells.end(), core));
  CHECK_THROWS_AS(singular_set(mu, 0.1, 0.0), ConfigError);
}

TEST_CASE("stationarity residual") {
  SUBCASE("zero field and linearity") {
    const auto u = solved_vortex(0.1, 64);
    const auto& dom = u.dom();
    const auto zero = make_vector_field(dom, [](const Vec3&) { return Vec3{0, 0, 0}; });
    CHECK(stationarity_residual(u, zero) == 0.0);
    // Rotations are tangent to the circle.
    const auto rot = make_vector_field(dom, [](const Vec3& x) { return Vec3{-x[1], x[0], 0}; });
    const auto rad = make_vector_field(dom, [](const Vec3& x) {
      const double q = (x[0] * x[0] + x[1] * x[1]) / 0.64;
      const double s = q < 1.0 ? std::pow(1.0 - q, 3) : 0.0;
      return Vec3{x[0] * s, x[1] * s, 0};
    });
    REQUIRE(rot.admissible());
    REQUIRE(rad.admissible());
    const double a = stationarity_residual(u, rot), b = stationarity_residual(u, rad);
    const double ab = stationarity_residual(u, combine(2.0, rot, -0.5, rad, dom));
    CHECK(std::abs(ab - (2.0 * a - 0.5 * b)) <= 1e-12 * (std::abs(a) + std::abs(b) + energy(u)));
  }
  SUBCASE("a translation is not tangent to the disk") {
    auto dom = disk(32);
    const auto tr = make_vector_field(*dom, [](const Vec3&) { return Vec3{1, 0, 0}; });
    CHECK_FALSE(tr.admissible());
    CHECK_THROWS_AS(stationarity_residual(init_constant(dom, 0.1, {1.0, 0.0}), tr), ConfigError);
  }
  SUBCASE("product plane wave is stationary along the circle") {
    const double eps = std::exp(-4.0);
    auto u = init_product_discrete(product(64), eps, 2);
    const auto ds = make_vector_field(u.dom(), [](const Vec3&) { return Vec3{1, 0, 0}; });
    REQUIRE(ds.admissible());
    CHECK(std::abs(stationarity_residual(u, ds)) <= 1e-8 * energy(u));
  }
}

TEST_CASE("first variation") {
  auto dom = disk(48);
  const double eps = 0.1;
  SUBCASE("zero field is critical") {
    const auto z = random_smooth_field(*dom, 1);
    CHECK(first_variation(init_constant(dom, eps, {0.0, 0.0}), z) == 0.0);
  }
  SUBCASE("real constant against a unit direction") {
    const double c = 0.6;
    std::vector<cplx> one(dom->size(), 0.0);
    for (std::size_t n : dom->active_nodes) one[n] = 1.0;
    const double expect = dom->volume * (c * c - 1.0) * c / (eps * eps);
    CHECK(first_variation(init_constant(dom, eps, {c, 0.0}), one) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("agrees with central differences") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      ComplexField u(dom, eps);
      const auto v = random_smooth_field(*dom, 100 + s);
      std::copy(v.begin(), v.end(), u.values.begin());
      const auto z = random_smooth_field(*dom, 200 + s);
      const double t = 1e-5;
      ComplexField up = u, um = u;
      for (std::size_t n = 0; n < u.size(); ++n) {
        up.values[n] += t * z[n];
        um.values[n] -= t * z[n];
      }
      const double fd = (energy(up) - energy(um)) / (2.0 * t);
      const double dv = first_variation(u, z);
      CHECK(std::abs(fd - dv) <= 1e-6 * std::max(1.0, std::abs(dv)));
    }
  }
}
