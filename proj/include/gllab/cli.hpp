#pragma once

#include <string>
#include <vector>

#include "gllab/io.hpp"

namespace gllab::cli {

/// Flat run configuration; JSON keys mirror the flag names with '_' for '-'.
struct RunConfig {
  std::string chart = "disk";
  std::vector<int> res{160};
  int dim = 2;
  double eps = 0.05;
  std::vector<double> eps_sweep;
  double l = 3.0;
  std::string init = "vortex";
  int k = 2;
  std::uint64_t seed = 1;
  std::string out;
  int threads = 0;
  double tol = 1e-8;
  double eta = 0.05;
  double sigma = 0.25;
  double theta_min = 1.0;
  bool allow_underresolved = false;
  std::string stationarity_field = "bump";

  io::json to_json() const;
  static RunConfig from_json(const io::json& j);
};

enum class Resolution { ok, warn, underresolved, invalid };

/// eps < 2h is invalid, 2h <= eps < 4h under-resolved, 4h <= eps < 6h a
/// warning. Plane-wave inits on the product chart have no core to resolve.
Resolution classify_resolution(const RunConfig& cfg, double eps, double h);

/// Entry point; returns the process exit code (0 ok, 1 assertion failure,
/// 2 usage/config error, 3 non-convergence).
int run(int argc, char** argv);

}  // namespace gllab::cli
