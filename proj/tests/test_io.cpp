#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gllab/analysis.hpp"
#include "gllab/error.hpp"
#include "gllab/io.hpp"
#include "gllab/solver.hpp"

using namespace gllab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& leaf) {
  const auto p = fs::temp_directory_path() / "gllab_test_io" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("field dump round trip is bit exact") {
  const auto dir = scratch("field");
  ChartParams p;
  p.elongation = 1.5;
  const int r[2] = {16, 48};
  auto dom = build_chart(ChartId::half_ellipse_rz, r, p);
  ComplexField u(dom, 0.07);
  const auto v = random_smooth_field(*dom, 3);
  std::copy(v.begin(), v.end(), u.values.begin());
  io::write_field(dir, "u", u, {{"note", "x"}});
  const auto back = io::read_field(dir, "u");
  CHECK(back.epsilon == u.epsilon);
  CHECK(back.dom().grid.chart == ChartId::half_ellipse_rz);
  CHECK(back.dom().grid.params.elongation == 1.5);
  REQUIRE(back.size() == u.size());
  for (std::size_t c = 0; c < u.size(); ++c) CHECK(back.values[c] == u.values[c]);
  CHECK(io::read_json(dir / "u.json").at("metadata").at("note") == "x");
}

TEST_CASE("one-form round trip") {
  const auto dir = scratch("form");
  const int r[3] = {16, 8, 8};
  auto dom = build_chart(ChartId::product_s1_hemisphere, r, {});
  const auto w = u_cross_du(init_product_exact(dom, 0.05, 2));
  io::write_form(dir, "w", w);
  const auto back = io::read_form(dir, "w");
  for (int a = 0; a < 3; ++a) CHECK(back.comp[a] == w.comp[a]);
  CHECK_THROWS_AS(io::read_field(dir, "w"), ConfigError);
}

TEST_CASE("corrupt or missing dumps are rejected") {
  const auto dir = scratch("corrupt");
  ChartParams p;
  p.dim = 2;
  const int r[1] = {16};
  io::write_field(dir, "u", init_constant(build_chart(ChartId::disk, r, p), 0.1, {1.0, 0.0}));
  fs::resize_file(dir / "u.bin", fs::file_size(dir / "u.bin") - 8);
  CHECK_THROWS_AS(io::read_field(dir, "u"), ConfigError);
  CHECK_THROWS_AS(io::read_field(dir, "missing"), ConfigError);
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(io::read_json(dir / "bad.json"), ConfigError);
}

TEST_CASE("config hash") {
  const io::json a = {{"eps", 0.05}, {"res", {160}}};
  const io::json b = {{"res", {160}}, {"eps", 0.05}};
  CHECK(io::config_hash(a) == io::config_hash(b));
  CHECK(io::config_hash(a).size() == 16);
  CHECK(io::config_hash(a) != io::config_hash({{"eps", 0.025}, {"res", {160}}}));
  // FNV-1a of "{}".
  CHECK(io::config_hash(io::json::object()) == "08f44b07b5901a25");
}

TEST_CASE("csv writer") {
  const auto dir = scratch("csv");
  {
    io::CsvWriter csv(dir / "t.csv", {"a", "b", "c"});
    csv << 1 << 0.1 << std::string("x");
    csv.end_row();
    csv << std::size_t{2} << -2.5e-300 << std::string("y");
    csv.end_row();
    csv << 3;
    CHECK_THROWS_AS(csv.end_row(), Error);
  }
  CHECK(slurp(dir / "t.csv").rfind("a,b,c\n1,0.1,x\n2,-2.5e-300,y\n", 0) == 0);
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(std::stod(io::format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(io::format_number(std::nan("")) == "nan");
}

TEST_CASE("energy history table") {
  const auto dir = scratch("hist");
  ChartParams p;
  p.dim = 2;
  const int r[1] = {24};
  SolverConfig cfg;
  auto out = solve(init_constant(build_chart(ChartId::disk, r, p), 0.2, {0.5, 0.0}), cfg);
  io::write_energy_history(dir / "h.csv", out.report);
  std::istringstream in(slurp(dir / "h.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,energy,residual,phase");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == out.report.energy_history.size());
}
