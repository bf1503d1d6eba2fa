#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gllab/analysis.hpp"
#include "gllab/error.hpp"
#include "gllab/field.hpp"
#include "gllab/forms.hpp"
#include "gllab/solver.hpp"

using namespace gllab;

namespace {

DomainPtr box2(int n) {
  ChartParams p;
  p.dim = 2;
  const int r[1] = {n};
  return build_chart(ChartId::box, r, p);
}

DomainPtr product(int ns, int nr = 16, int nt = 8) {
  const int r[3] = {ns, nr, nt};
  return build_chart(ChartId::product_s1_hemisphere, r, {});
}

ComplexField unimodular_wave(DomainPtr dom, int k, double eps) {
  ComplexField u(dom, eps);
  for (std::size_t c : dom->active_nodes) u.values[c] = std::polar(1.0, k * dom->grid.center(c)[0]);
  return u;
}

ComplexField random_field(DomainPtr dom, std::uint64_t seed) {
  ComplexField u(dom, 0.1);
  const auto v = random_smooth_field(*dom, seed, 4);
  std::copy(v.begin(), v.end(), u.values.begin());
  return u;
}

}  // namespace

TEST_CASE("modified potential") {
  auto w0 = modified_potential(0.0);
  CHECK(w0.value == 0.25);
  CHECK(w0.slope == 0.0);
  auto w1 = modified_potential(1.0);
  CHECK(w1.value == 0.0);
  CHECK(w1.slope == 0.0);
  auto w2 = modified_potential(2.0);
  CHECK(w2.value == 1.0);
  CHECK(w2.slope == 2.0);
  CHECK_THROWS_AS(modified_potential(-0.1), Error);
  // C^1 across t = 1.
  const double d = 1e-7;
  CHECK(std::abs(modified_potential(1.0 + d).slope - modified_potential(1.0 - d).slope) < 1e-6);
  for (double t : {0.0, 0.3, 0.9, 1.0}) {
    CHECK(potential(Potential::quartic, t).value == doctest::Approx((t * t - 1) * (t * t - 1) / 4.0));
    CHECK(modified_potential(t).value == doctest::Approx(potential(Potential::quartic, t).value));
  }
}

TEST_CASE("energy of constants") {
  auto dom = box2(32);
  const double eps = 0.2;
  CHECK(energy(init_constant(dom, eps, {1.0, 0.0})) == 0.0);
  CHECK(energy(init_constant(dom, eps, std::polar(1.0, 0.7))) <= 1e-14);
  // Unit square: vol = 1.
  CHECK(energy(init_constant(dom, eps, {0.0, 0.0})) == doctest::Approx(1.0 / (4.0 * eps * eps)).epsilon(1e-12));
}

TEST_CASE("plane-wave energy on the product chart") {
  const int k = 2;
  const double eps = std::exp(-4.0);
  auto u = init_product_exact(product(64), eps, k);
  const double a2 = 1.0 - k * k * eps * eps;
  const double exact = 4.0 * std::numbers::pi * std::numbers::pi * (a2 * k * k / 2.0 + std::pow(k, 4) * eps * eps / 4.0);
  CHECK(std::abs(energy(u) - exact) / exact <= 0.005);
}

TEST_CASE("energy is bit-reproducible") {
  auto u = random_field(box2(48), 3);
  const double e1 = energy(u);
  par::set_threads(1);
  const double e2 = energy(u);
  par::set_threads(4);
  const double e3 = energy(u);
  CHECK(e1 == e2);
  CHECK(e1 == e3);
}

TEST_CASE("node gradient") {
  auto dom = box2(16);
  SUBCASE("constant") {
    const auto g = gradient(init_constant(dom, 0.1, {0.3, 0.4}));
    for (const auto& z : g.d) CHECK(std::abs(z) <= 1e-13);
  }
  SUBCASE("linear functions are differentiated exactly") {
    ComplexField u(dom, 0.1);
    for (std::size_t c : dom->active_nodes) u.values[c] = dom->grid.center(c)[0];
    const auto g = gradient(u);
    for (std::size_t c : dom->active_nodes) {
      CHECK(std::abs(g.at(c, 0) - 1.0) <= 1e-12);
      CHECK(std::abs(g.at(c, 1)) <= 1e-12);
    }
  }
  SUBCASE("plane wave on the product chart") {
    const int k = 3;
    auto pd = product(64);
    auto u = init_product_exact(pd, 0.001, k);
    const auto g = gradient(u);
    const double a2 = std::norm(u.values[pd->active_nodes.front()]);
    const double h = pd->grid.spacing[0];
    for (std::size_t c : pd->active_nodes) CHECK(std::abs(gradient_norm2(*pd, g, c) / a2 - k * k) <= 2.0 * k * k * k * k * h * h);
  }
}

TEST_CASE("energy decomposition is pointwise exact") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto u = random_field(box2(24), s);
    const auto d = decompose_energy(u);
    for (std::size_t c : u.dom().active_nodes) {
      const double sum = d.parts[0][c] + d.parts[1][c] + d.parts[2][c] + d.parts[3][c];
      CHECK(std::abs(sum - d.e[c]) <= 1e-10 * std::max(1.0, d.e[c]));
      // |u x ∇u|^2 <= |u|^2 |∇u|^2
      CHECK(d.parts[2][c] <= std::norm(u.values[c]) * (d.e[c] - d.parts[3][c]) * (1.0 + 1e-12) + 1e-300);
    }
  }
  SUBCASE("real fields carry no current") {
    auto u = random_field(box2(24), 9);
    for (auto& v : u.values) v = v.real();
    const auto d = decompose_energy(u);
    for (double x : d.parts[2]) CHECK(x == 0.0);
  }
  SUBCASE("unimodular plane wave keeps only the current") {
    // Parts use link midpoints, where |ū|^2 = cos^2(kh/2): the amplitude
    // part is sin^2(kh/2) of the total instead of zero.
    const int k = 2;
    auto pd = product(64);
    auto u = unimodular_wave(pd, k, 0.1);
    const auto d = decompose_energy(u);
    const double s2 = std::pow(std::sin(k * pd->grid.spacing[0] / 2.0), 2);
    for (std::size_t c : pd->active_nodes) {
      CHECK(d.parts[0][c] == doctest::Approx(s2 * d.e[c]).epsilon(1e-9));
      CHECK(std::abs(d.parts[1][c]) <= 1e-12);
      CHECK(std::abs(d.parts[3][c]) <= 1e-12);
      CHECK(d.parts[2][c] == doctest::Approx((1.0 - s2) * d.e[c]).epsilon(1e-9));
    }
  }
  SUBCASE("weighted parts sum to the total energy") {
    auto u = random_field(box2(32), 4);
    const auto d = decompose_energy(u);
    const auto& dom = u.dom();
    const double total = par::sum_of(dom.size(), [&](std::size_t c) {
      return dom.node_weight[c] * (d.parts[0][c] + d.parts[1][c] + d.parts[2][c] + d.parts[3][c]);
    });
    CHECK(std::abs(total - energy(u)) <= 1e-12 * energy(u));
  }
}

TEST_CASE("link gradient decomposition") {
  auto u = random_field(box2(24), 5);
  const auto s = gradient_decomposition(u);
  for (int a = 0; a < 2; ++a)
    for (std::size_t c : u.dom().active_nodes) {
      const double sum = s.amplitude_weighted[a][c] + s.modulus[a][c] + s.cross[a][c];
      CHECK(std::abs(sum - s.total[a][c]) <= 1e-10 * std::max(1.0, s.total[a][c]));
    }
}

TEST_CASE("polar decomposition") {
  SUBCASE("plane wave") {
    auto pd = product(32);
    auto u = unimodular_wave(pd, 2, 0.1);
    const auto pf = polar_decompose(u);
    const std::size_t c0 = pd->active_nodes.front();
    const double offset = pf.phi[c0] - 2.0 * pd->grid.center(c0)[0];
    for (std::size_t c : pd->active_nodes) {
      CHECK(pf.valid[c]);
      CHECK(std::abs(pf.rho[c] - 1.0) <= 1e-12);
      CHECK(std::abs(pf.X[c]) <= 1e-8);
      // A single global multiple of 2π; the unwrapped phase may run around the circle.
      const double m = (pf.phi[c] - 2.0 * pd->grid.center(c)[0] - offset) / (2.0 * std::numbers::pi);
      CHECK(std::abs(m - std::round(m)) <= 1e-9);
    }
  }
  SUBCASE("vortex: core excluded, reconstruction exact") {
    ChartParams p;
    p.dim = 2;
    const int r[1] = {64};
    auto dom = build_chart(ChartId::disk, r, p);
    auto u = init_vortex(dom, 0.1, {0.0, 0.0, 0.0});
    const auto pf = polar_decompose(u, 0.5);
    for (std::size_t c : dom->active_nodes) {
      const auto x = dom->grid.center(c);
      const double d = std::hypot(x[0], x[1]);
      if (std::tanh(d / 0.1) < 0.45) CHECK_FALSE(pf.valid[c]);
      if (pf.valid[c]) CHECK(std::abs(std::polar(pf.rho[c], pf.phi[c]) - u.values[c]) <= 1e-10);
    }
  }
  SUBCASE("zero field has no seed") {
    CHECK_THROWS_AS(polar_decompose(init_constant(box2(16), 0.1, {0.0, 0.0})), Error);
  }
}

TEST_CASE("phase winding") {
  ChartParams p;
  p.dim = 2;
  const int r[1] = {64};
  auto dom = build_chart(ChartId::disk, r, p);
  const double eps = 0.05;
  ComplexField u(dom, eps);
  for (std::size_t c : dom->active_nodes) {
    const auto x = dom->grid.center(c);
    u.values[c] = cplx{x[0], x[1]} / std::sqrt(x[0] * x[0] + x[1] * x[1] + eps * eps);
  }
  const std::size_t mid = dom->grid.index(32, 32);
  const auto around = square_loop(*dom, mid, 10);
  CHECK(phase_winding(u, around) == 1);
  CHECK(phase_winding(init_constant(dom, eps, {1.0, 0.0}), around) == 0);
  const auto away = square_loop(*dom, dom->grid.index(48, 32), 5);
  CHECK(phase_winding(u, away) == 0);
  ComplexField rotated = u;
  for (auto& v : rotated.values) v *= std::polar(1.0, 2.1);
  CHECK(phase_winding(rotated, around) == 1);
}

TEST_CASE("current u x du") {
  SUBCASE("real field") {
    auto u = random_field(box2(16), 1);
    for (auto& v : u.values) v = v.real();
    const auto w = u_cross_du(u);
    CHECK(norm(w) == 0.0);
  }
  SUBCASE("plane wave gives a^2 k ds") {
    const int k = 3;
    const double eps = std::exp(-9.0);
    auto pd = product(64);
    auto u = init_product_exact(pd, eps, k);
    const auto w = u_cross_du(u);
    const double a2 = 1.0 - k * k * eps * eps;
    for (std::size_t c : pd->active_nodes) {
      if (!w.has_link(0, c)) continue;
      CHECK(std::abs(w.comp[0][c] - a2 * k) <= 1e-12);
    }
  }
  SUBCASE("equals rho^2 dphi with the shared link difference") {
    auto u = random_field(box2(24), 2);
    const auto w = u_cross_du(u);
    const auto& dom = u.dom();
    for (int a = 0; a < 2; ++a)
      for (std::size_t c : dom.active_nodes) {
        const auto p = dom.plus[a][c];
        if (p < 0) continue;
        const cplx ua = u.values[c], ub = u.values[static_cast<std::size_t>(p)];
        const double expect = std::abs(ua) * std::abs(ub) * std::arg(std::conj(ua) * ub) / dom.grid.spacing[a];
        CHECK(std::abs(w.comp[a][c] - expect) <= 1e-10 * std::max(1.0, std::abs(expect)));
      }
  }
}
