#include "gllab/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gllab/error.hpp"

namespace gllab::io {

static_assert(std::endian::native == std::endian::little, "raw dumps assume a little-endian host");

namespace {

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void write_doubles(const fs::path& path, const std::vector<double>& v) {
  ensure_parent(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(const fs::path& path, std::size_t expected) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw ConfigError("missing dump " + path.string());
  const auto bytes = static_cast<std::size_t>(f.tellg());
  if (bytes != expected * sizeof(double))
    throw ConfigError("corrupt dump " + path.string() + ": expected " + std::to_string(expected * sizeof(double)) +
                      " bytes, found " + std::to_string(bytes));
  std::vector<double> v(expected);
  f.seekg(0);
  f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  return v;
}

json params_json(const ChartParams& p) {
  return {{"dim", p.dim}, {"side", p.side}, {"radius", p.radius}, {"elongation", p.elongation}, {"metric_amp", p.metric_amp}};
}

}  // namespace

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) buf_ += (i ? "," : "") + header[i];
  buf_ += '\n';
}

void CsvWriter::sep() {
  if (in_row_++ > 0) buf_ += ',';
}

CsvWriter& CsvWriter::operator<<(double x) {
  sep();
  buf_ += format_number(x);
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::int64_t x) {
  sep();
  buf_ += std::to_string(x);
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
  sep();
  buf_ += s;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw Error("CSV row has " + std::to_string(in_row_) + " fields, header has " + std::to_string(columns_));
  buf_ += '\n';
  in_row_ = 0;
}

CsvWriter::~CsvWriter() {
  try {
    write_text(path_, buf_);
  } catch (...) {
  }
}

json grid_header(const Domain& dom) {
  const auto& g = dom.grid;
  json res = json::array(), spacing = json::array(), origin = json::array(), periodic = json::array();
  for (int a = 0; a < g.ndim; ++a) {
    res.push_back(g.dims[a]);
    spacing.push_back(g.spacing[a]);
    origin.push_back(g.origin[a]);
    periodic.push_back(g.periodic[a]);
  }
  return {{"chart_id", to_string(g.chart)}, {"dims", res}, {"spacing", spacing}, {"origin", origin},
          {"periodic", periodic}, {"params", params_json(g.params)}};
}

DomainPtr domain_from_header(const json& header) {
  try {
    ChartParams p;
    const auto& jp = header.at("params");
    p.dim = jp.at("dim").get<int>();
    p.side = jp.at("side").get<double>();
    p.radius = jp.at("radius").get<double>();
    p.elongation = jp.at("elongation").get<double>();
    p.metric_amp = jp.at("metric_amp").get<double>();
    const auto res = header.at("dims").get<std::vector<int>>();
    return build_chart(chart_from_string(header.at("chart_id").get<std::string>()), res, p);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid grid header: ") + e.what());
  }
}

void write_grid(const fs::path& dir, const std::string& name, const Domain& dom) {
  const int n = dom.ndim();
  json h = grid_header(dom);
  h["arrays"] = json::array({"sqrt_det"});
  std::vector<double> data(dom.metric.sqrt_det.begin(), dom.metric.sqrt_det.end());
  for (int a = 0; a < n; ++a) {
    h["arrays"].push_back("g" + std::to_string(a) + std::to_string(a));
    for (std::size_t c = 0; c < dom.size(); ++c) data.push_back(dom.metric.component(c, a, a));
  }
  h["layout"] = "float64 little-endian, row-major, arrays concatenated";
  write_json(dir / (name + ".json"), h);
  write_doubles(dir / (name + ".bin"), data);
}

void write_field(const fs::path& dir, const std::string& name, const ComplexField& u, const json& extra) {
  json h = {{"grid", grid_header(u.dom())}, {"epsilon", u.epsilon}, {"kind", "complex_field"},
            {"layout", "float64 little-endian, interleaved (re, im), row-major"}, {"metadata", extra}};
  write_json(dir / (name + ".json"), h);
  std::vector<double> data(2 * u.size());
  for (std::size_t c = 0; c < u.size(); ++c) {
    data[2 * c] = u.values[c].real();
    data[2 * c + 1] = u.values[c].imag();
  }
  write_doubles(dir / (name + ".bin"), data);
}

ComplexField read_field(const fs::path& dir, const std::string& name) {
  const json h = read_json(dir / (name + ".json"));
  if (h.value("kind", "") != "complex_field") throw ConfigError(name + ".json is not a complex field dump");
  ComplexField u(domain_from_header(h.at("grid")), h.at("epsilon").get<double>());
  const auto data = read_doubles(dir / (name + ".bin"), 2 * u.size());
  for (std::size_t c = 0; c < u.size(); ++c) u.values[c] = {data[2 * c], data[2 * c + 1]};
  return u;
}

void write_form(const fs::path& dir, const std::string& name, const DiscreteOneForm& w) {
  const int n = w.dom().ndim();
  json h = {{"grid", grid_header(w.dom())}, {"kind", "one_form"}, {"components", n},
            {"layout", "float64 little-endian, one row-major array per axis, concatenated; entry c is the link c -> c+e_a"}};
  write_json(dir / (name + ".json"), h);
  std::vector<double> data;
  for (int a = 0; a < n; ++a) data.insert(data.end(), w.comp[a].begin(), w.comp[a].end());
  write_doubles(dir / (name + ".bin"), data);
}

DiscreteOneForm read_form(const fs::path& dir, const std::string& name) {
  const json h = read_json(dir / (name + ".json"));
  if (h.value("kind", "") != "one_form") throw ConfigError(name + ".json is not a one-form dump");
  DiscreteOneForm w(domain_from_header(h.at("grid")));
  const int n = w.dom().ndim();
  const std::size_t m = w.dom().size();
  const auto data = read_doubles(dir / (name + ".bin"), n * m);
  for (int a = 0; a < n; ++a) std::copy(data.begin() + a * m, data.begin() + (a + 1) * m, w.comp[a].begin());
  return w;
}

json to_json(const SolveReport& rep) {
  return {{"final_residual", rep.final_residual}, {"steps", rep.steps}, {"newton_iterations", rep.newton_iterations},
          {"linear_iterations", rep.linear_iterations}, {"converged", rep.converged}, {"aborted", rep.aborted},
          {"newton_fallback", rep.newton_fallback}, {"max_modulus", rep.max_modulus}, {"message", rep.message},
          {"final_energy", rep.energy_history.empty() ? 0.0 : rep.energy_history.back().energy}};
}

void write_energy_history(const fs::path& path, const SolveReport& rep) {
  CsvWriter csv(path, {"step", "energy", "residual", "phase"});
  for (const auto& h : rep.energy_history) {
    csv << h.step << h.energy << h.residual << std::string(h.newton ? "newton" : "flow");
    csv.end_row();
  }
}

}  // namespace gllab::io
