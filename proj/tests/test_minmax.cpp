#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gllab/error.hpp"
#include "gllab/minmax.hpp"

using namespace gllab;

namespace {

constexpr double kPi = std::numbers::pi;

DomainPtr ellipse(int nr, double l) {
  ChartParams p;
  p.elongation = l;
  const int r[2] = {nr, static_cast<int>(std::lround(2 * l * nr))};
  return build_chart(ChartId::half_ellipse_rz, r, p);
}

// Midpoint quadrature of 2π r over {r^2 + (z/l)^2 <= 1, (r-1)^2 + z^2 < rho^2}.
double tube_volume(double l, double rho, int n = 2000) {
  double v = 0.0;
  const double dr = 1.0 / n, dz = 2.0 * l / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double r = (i + 0.5) * dr, z = -l + (j + 0.5) * dz;
      if (r * r + z * z / (l * l) > 1.0) continue;
      if ((r - 1.0) * (r - 1.0) + z * z >= rho * rho) continue;
      v += 2.0 * kPi * r * dr * dz;
    }
  return v;
}

}  // namespace

TEST_CASE("reduced energy") {
  const double l = 1.5, eps = 0.2;
  auto dom = ellipse(64, l);
  CHECK(reduced_energy(init_constant(dom, eps, std::polar(1.0, 0.3))) <= 1e-14);
  // Zero field: W(0) / eps^2 over the solid ellipsoid of volume 4πl/3.
  const double expect = 4.0 * kPi * l / 3.0 / (4.0 * eps * eps);
  CHECK(std::abs(reduced_energy(init_constant(dom, eps, {0.0, 0.0})) - expect) <= 0.02 * expect);
  ChartParams p;
  p.dim = 2;
  const int r[1] = {16};
  CHECK_THROWS_AS(reduced_energy(init_constant(build_chart(ChartId::disk, r, p), eps, {1.0, 0.0})), ConfigError);
}

TEST_CASE("sweep profile") {
  const double eps = 0.1;
  SUBCASE("boundary parameters give constants") {
    for (double phi : {0.0, 1.0, 2.5}) {
      const cplx y = std::polar(1.0, phi);
      CHECK(sweep_profile({0.3, -0.2}, y, eps) == y);
      CHECK(sweep_profile({0.9, 0.4}, y, eps) == y);
    }
  }
  SUBCASE("y = 0 is a vortex at the origin") {
    CHECK(sweep_profile({0.0, 0.0}, 0.0, eps) == cplx{0.0, 0.0});
    const cplx far = sweep_profile({0.6, 0.8}, 0.0, eps);
    CHECK(std::abs(far - cplx{0.6, 0.8}) <= 1e-15);
    const cplx near = sweep_profile({0.03, 0.04}, 0.0, eps);
    CHECK(std::abs(near - cplx{0.3, 0.4}) <= 1e-15);
  }
  SUBCASE("modulus never exceeds one") {
    for (double a : {0.0, 0.3, 0.9, 0.999})
      for (double phi : {0.0, 2.0, 4.0})
        for (double x : {-0.5, 0.1, 0.7}) CHECK(std::abs(sweep_profile({x, 0.2}, std::polar(a, phi), eps)) <= 1.0 + 1e-15);
  }
  SUBCASE("full-fraction parameters centre the vortex on the boundary") {
    const double l = 3.0;
    for (double phi : {-1.2, -0.5, 0.0, 0.7, 1.4}) {
      const cplx y = sweep_parameter(1.0, phi, l);
      const cplx w = -y / (1.0 - std::abs(y));
      CHECK(std::arg(w) == doctest::Approx(phi));
      CHECK(w.real() * w.real() + w.imag() * w.imag() / (l * l) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("sweep family") {
  const int res[2] = {16, 48};
  CHECK_THROWS_AS(sweep_family(0.2, 1.5, res, 4, 16), ConfigError);
  CHECK_THROWS_AS(sweep_family(0.2, 1.5, res, 8, 8), ConfigError);
  auto fam = sweep_family(0.2, 1.5, res);
  REQUIRE(fam.members.size() == 1 + 8 * 16);
  double mx = 0.0;
  for (const auto& m : fam.members) {
    mx = std::max(mx, m.energy);
    CHECK(m.on_boundary == (std::abs(m.y) == 1.0));
    if (m.on_boundary) CHECK(m.energy <= 1e-14);
  }
  CHECK(fam.max_energy == mx);
  CHECK(fam.max_energy > 0.0);
  CHECK(std::isfinite(fam.lipschitz));
}

TEST_CASE("mountain pass bookkeeping") {
  const int res[2] = {16, 48};
  SUBCASE("no flow budget") {
    auto fam = sweep_family(0.2, 1.5, res);
    const double c0 = fam.max_energy;
    const auto rep = mountain_pass(fam, 0);
    REQUIRE(rep.c_trace.size() == 1);
    CHECK(rep.c_eps == c0);
    CHECK(rep.c_initial == c0);
    CHECK(rep.c_refined >= rep.c_eps);
  }
  SUBCASE("flowing lowers the max and keeps the boundary fixed") {
    auto fam = sweep_family(0.2, 1.5, res);
    const auto rep = mountain_pass(fam, 3);
    REQUIRE(rep.c_trace.size() == 4);
    for (std::size_t i = 1; i < rep.c_trace.size(); ++i) CHECK(rep.c_trace[i] <= rep.c_trace[i - 1] * (1.0 + 1e-12));
    CHECK(rep.c_eps == rep.c_trace.back());
    for (std::size_t k = 0; k < fam.members.size(); ++k)
      if (fam.members[k].on_boundary)
        for (double e : rep.member_energy[k]) CHECK(e <= 1e-14);
    CHECK(rep.energy_over_log_eps == doctest::Approx(rep.c_eps / std::abs(std::log(0.2))));
  }
}

TEST_CASE("equator concentration") {
  const double l = 1.5, eps = 0.05;
  auto dom = ellipse(80, l);
  SUBCASE("uniform density follows the tube volume") {
    const auto mu = energy_measure(init_constant(dom, eps, {0.0, 0.0}));
    const double radii[3] = {0.2, 0.4, 0.8};
    const auto rep = equator_concentration(mu, radii);
    const double total = tube_volume(l, 10.0);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(rep.fractions[i] - tube_volume(l, radii[i]) / total) <= 0.02);
    CHECK(rep.fractions[0] <= rep.fractions[1]);
    CHECK(rep.fractions[1] <= rep.fractions[2]);
  }
  SUBCASE("a planted ring concentrates on the equator") {
    const auto mu = energy_measure(planted_equator_ring(dom, eps));
    const double radii[1] = {8.0 * eps};
    CHECK(equator_concentration(mu, radii).fractions.front() >= 0.9);
  }
}

TEST_CASE("distance to the arc") {
  CHECK(distance_to_arc(0.0, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(distance_to_arc(2.0, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(distance_to_arc(1.0, 0.0, 3.0) <= 1e-12);
  CHECK(distance_to_arc(std::cos(0.4), 3.0 * std::sin(0.4), 3.0) <= 1e-6);
  CHECK(distance_to_arc(0.0, 0.0, 3.0) == doctest::Approx(1.0).epsilon(1e-6));
}
