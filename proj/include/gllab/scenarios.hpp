#pragma once

// Named experiment pipelines. A run writes config.json, report.json,
// metadata.json, fields/ and tables/ under <out_root>/<name>; report.json is
// a pure function of the config, while timings and the host live in
// metadata.json.

#include <filesystem>
#include <string>
#include <vector>

#include "gllab/io.hpp"

namespace gllab {

struct ScenarioInfo {
  std::string name;
  std::string description;
  io::json defaults;
};

const std::vector<ScenarioInfo>& scenario_registry();

/// Defaults merged with `overrides`; unknown keys are a ConfigError.
io::json scenario_config(const std::string& name, const io::json& overrides = io::json::object());

struct ScenarioRun {
  std::filesystem::path dir;
  io::json config;
  io::json report;
  io::json metadata;
  bool passed = false;
};

/// Throws ConfigError for unknown names. Stage failures are rethrown with the
/// stage name prefixed and their original exit-code class.
ScenarioRun run_scenario(const std::string& name, const io::json& overrides, const std::filesystem::path& out_root);

/// Looks up a check by name in a report; throws if absent.
const io::json& find_check(const io::json& report, const std::string& name);

}  // namespace gllab
