#pragma once

// Run artifacts: JSON documents, CSV tables and the raw field/form dumps
// (JSON sidecar plus little-endian float64 payload, row-major).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "gllab/field.hpp"
#include "gllab/forms.hpp"
#include "gllab/solver.hpp"

namespace gllab::io {

using nlohmann::json;
namespace fs = std::filesystem;

/// 64-bit FNV-1a of the compact serialisation, as 16 hex digits.
std::string config_hash(const json& config);

/// Pretty-printed with a trailing newline. Creates parent directories.
void write_json(const fs::path& path, const json& doc);
json read_json(const fs::path& path);

/// Locale-independent shortest round-trip formatting.
std::string format_number(double x);

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header);
  CsvWriter& operator<<(double x);
  CsvWriter& operator<<(std::int64_t x);
  CsvWriter& operator<<(std::size_t x) { return *this << static_cast<std::int64_t>(x); }
  CsvWriter& operator<<(int x) { return *this << static_cast<std::int64_t>(x); }
  CsvWriter& operator<<(const std::string& s);
  void end_row();
  ~CsvWriter();

 private:
  void sep();
  std::string buf_;
  fs::path path_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

/// Everything needed to rebuild the domain with build_chart.
json grid_header(const Domain& dom);
DomainPtr domain_from_header(const json& header);

/// `name`.json + `name`.bin holding sqrt_det followed by the diagonal
/// metric components.
void write_grid(const fs::path& dir, const std::string& name, const Domain& dom);

/// `name`.bin holds interleaved (re, im) per node.
void write_field(const fs::path& dir, const std::string& name, const ComplexField& u, const json& extra = json::object());
/// Throws ConfigError when the dump is missing, truncated or inconsistent.
ComplexField read_field(const fs::path& dir, const std::string& name);

/// One float64 array per chart axis, concatenated.
void write_form(const fs::path& dir, const std::string& name, const DiscreteOneForm& w);
DiscreteOneForm read_form(const fs::path& dir, const std::string& name);

json to_json(const SolveReport& rep);
void write_energy_history(const fs::path& path, const SolveReport& rep);

}  // namespace gllab::io
