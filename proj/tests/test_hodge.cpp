#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gllab/error.hpp"
#include "gllab/hodge.hpp"
#include "gllab/solver.hpp"

using namespace gllab;

namespace {

DomainPtr box2(int n) {
  ChartParams p;
  p.dim = 2;
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

DomainPtr ellipse(int nr, double l) {
  ChartParams p;
  p.elongation = l;
  const int r[2] = {nr, static_cast<int>(std::lround(2 * l * nr))};
  return build_chart(ChartId::half_ellipse_rz, r, p);
}

std::vector<double> random_scalar(const Domain& dom, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> f(dom.size(), 0.0);
  for (std::size_t c : dom.active_nodes) f[c] = nd(rng);
  return f;
}

DiscreteOneForm random_form(DomainPtr dom, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  DiscreteOneForm w(dom);
  for (int a = 0; a < dom->ndim(); ++a)
    for (std::size_t c : dom->active_nodes)
      if (w.has_link(a, c)) w.comp[a][c] = nd(rng);
  return w;
}

DiscreteOneForm ds_form(DomainPtr dom) {
  DiscreteOneForm ds(dom);
  for (std::size_t c : dom->active_nodes)
    if (ds.has_link(0, c)) ds.comp[0][c] = 1.0;
  return ds;
}

double weighted(const Domain& dom, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t c : dom.active_nodes) s += dom.node_weight[c] * a[c] * b[c];
  return s;
}

double two_form_max(const DiscreteTwoForm& f) {
  double m = 0.0;
  for (const auto& p : f.plane)
    for (double x : p) m = std::max(m, std::abs(x));
  for (double x : f.cap) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("d of d vanishes") {
  for (auto dom : {disk(32), product(16), ellipse(16, 1.5)}) {
    const auto f = random_scalar(*dom, 4);
    CHECK(two_form_max(d(exterior_derivative(dom, f))) <= 1e-10);
  }
}

TEST_CASE("d* is the adjoint of d") {
  for (auto dom : {disk(32), product(16), ellipse(16, 3.0)}) {
    const auto w = random_form(dom, 1);
    const auto f = random_scalar(*dom, 2);
    const double lhs = weighted(*dom, d_star(w), f);
    const double rhs = inner(w, exterior_derivative(dom, f));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + std::abs(rhs) + 1.0));
  }
}

TEST_CASE("closed-form d and d*") {
  SUBCASE("df of a linear function is co-closed inside") {
    auto dom = box2(16);
    std::vector<double> f(dom->size(), 0.0);
    for (std::size_t c : dom->active_nodes) f[c] = 2.0 * dom->grid.center(c)[0] - dom->grid.center(c)[1];
    const auto s = d_star(exterior_derivative(dom, f));
    for (std::size_t c : dom->active_nodes)
      if (dom->grid.mask[c] == CellKind::interior) CHECK(std::abs(s[c]) <= 1e-10);
  }
  SUBCASE("ds on the product chart is co-closed") {
    auto dom = product(16);
    for (double x : d_star(ds_form(dom))) CHECK(std::abs(x) <= 1e-12);
  }
  SUBCASE("x dy has unit curl") {
    auto dom = box2(16);
    DiscreteOneForm w(dom);
    for (std::size_t c : dom->active_nodes)
      if (w.has_link(1, c)) w.comp[1][c] = dom->grid.center(c)[0];
    const auto dw = d(w);
    for (std::size_t c : dom->active_nodes)
      if (dom->plaquette[0][c]) CHECK(std::abs(dw.plane[0][c] - 1.0) <= 1e-10);
  }
}

TEST_CASE("current of a vortex-free unimodular field is closed") {
  // Link phase differences stay below pi, so the discrete curl cancels exactly.
  for (int n : {32, 64}) {
    auto dom = box2(n);
    ComplexField u(dom, 0.1);
    for (std::size_t c : dom->active_nodes) {
      const auto x = dom->grid.center(c);
      u.values[c] = std::polar(1.0, std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]) + x[0] * x[1]);
    }
    const auto w = u_cross_du(u);
    CHECK(norm(*dom, d(w)) <= 1e-10 * norm(w));
  }
}

TEST_CASE("Hodge split of an exact Neumann form") {
  auto dom = box2(64);
  std::vector<double> f(dom->size(), 0.0);
  for (std::size_t c : dom->active_nodes) {
    const auto x = dom->grid.center(c);
    f[c] = std::cos(std::numbers::pi * x[0]) * std::cos(std::numbers::pi * x[1]);
  }
  const auto w = exterior_derivative(dom, f);
  const auto s = hodge_decompose(w);
  CHECK(norm(s.harmonic) <= 1e-6 * norm(w));
  CHECK(norm(s.exact - w) <= 1e-6 * norm(w));
}

TEST_CASE("ds is harmonic on the product chart") {
  auto dom = product(32);
  const auto ds = ds_form(dom);
  const auto s = hodge_decompose(ds);
  CHECK(norm(s.harmonic - ds) <= 1e-6 * norm(ds));
  const auto h = harmonicity(ds);
  CHECK(h.d_norm <= 1e-12);
  CHECK(h.d_star_norm <= 1e-12);
  CHECK(h.normal_norm <= 1e-12);
}

TEST_CASE("the ellipsoid chart carries no harmonic forms") {
  auto dom = ellipse(24, 3.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto w = random_form(dom, seed);
    CHECK(norm(hodge_decompose(w).harmonic) <= 1e-5 * norm(w));
  }
}

TEST_CASE("Hodge split properties") {
  for (auto dom : {disk(32), product(16)}) {
    const auto w1 = random_form(dom, 7);
    const auto w2 = random_form(dom, 8);
    const auto s1 = hodge_decompose(w1);
    const double n2 = inner(w1, w1);
    // Orthogonality and bookkeeping.
    CHECK(std::abs(inner(s1.harmonic, s1.exact)) <= 1e-8 * n2);
    CHECK(std::abs(inner(s1.harmonic, s1.coexact)) <= 1e-8 * n2);
    CHECK(std::abs(inner(s1.exact, s1.coexact)) <= 1e-8 * n2);
    const double parts = inner(s1.harmonic, s1.harmonic) + inner(s1.exact, s1.exact) + inner(s1.coexact, s1.coexact);
    CHECK(std::abs(parts - n2) <= 1e-6 * n2);
    CHECK_FALSE(s1.flagged);
    // Linearity.
    const auto s2 = hodge_decompose(w2);
    const auto s12 = hodge_decompose(2.0 * w1 - 3.0 * w2);
    const double scale = norm(2.0 * w1 - 3.0 * w2);
    CHECK(norm(s12.exact - (2.0 * s1.exact - 3.0 * s2.exact)) <= 1e-8 * scale);
    CHECK(norm(s12.coexact - (2.0 * s1.coexact - 3.0 * s2.coexact)) <= 1e-8 * scale);
    CHECK(norm(s12.harmonic - (2.0 * s1.harmonic - 3.0 * s2.harmonic)) <= 1e-8 * scale);
    // Each part decomposes to itself.
    CHECK(norm(hodge_decompose(s1.exact).exact) >= (1.0 - 1e-4) * norm(s1.exact));
    CHECK(norm(hodge_decompose(s1.coexact).coexact) >= (1.0 - 1e-4) * norm(s1.coexact));
    if (norm(s1.harmonic) > 1e-8 * norm(w1))
      CHECK(norm(hodge_decompose(s1.harmonic).harmonic) >= (1.0 - 1e-4) * norm(s1.harmonic));
  }
}

TEST_CASE("psi extraction") {
  SUBCASE("plane-wave sequence tends to ds") {
    for (int k : {2, 3}) {
      const double eps = std::exp(-static_cast<double>(k * k));
      auto u = init_product_discrete(product(64), eps, k);
      const auto e = extract_psi({u}).front();
      CHECK(e.harmonic_defect <= 1e-6);
      const auto ds = ds_form(u.domain);
      CHECK(norm(e.psi - ds) <= (2.0 * k * k * eps * eps + 1e-4) * norm(ds));
    }
  }
  SUBCASE("real fields give zero") {
    auto dom = disk(32);
    auto u = init_constant(dom, 0.1, {1.0, 0.0});
    const auto e = extract_psi({u}).front();
    CHECK(norm(e.psi) == 0.0);
  }
  SUBCASE("non-converged input is rejected") {
    auto dom = disk(32);
    CHECK_THROWS_AS(extract_psi({init_noise(dom, 0.1, 1, 0.5)}), Error);
  }
}
