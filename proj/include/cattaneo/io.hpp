#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cattaneo/diagnostics.hpp"
#include "cattaneo/model.hpp"
#include "cattaneo/stationary_oracle.hpp"
#include "json.hpp"

namespace cattaneo {

using json = nlohmann::json;

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// ProblemSpec <-> JSON

inline json coefficient_to_json(const CoefficientDef& c) {
  struct {
    json operator()(const ConstantCoefficient& k) const { return k.value; }
    json operator()(const TableCoefficient& t) const {
      return {{"kind", "table"}, {"params", {{"x", t.x}, {"values", t.values}}}};
    }
    json operator()(const LinearRamp& r) const {
      return {{"kind", "linear_ramp"}, {"params", {{"a", r.a}, {"b", r.b}}}};
    }
    json operator()(const SmoothBump& b) const {
      return {{"kind", "smooth_bump"}, {"params", {{"a", b.a}, {"b", b.b}}}};
    }
  } visitor;
  return std::visit(visitor, c);
}

inline CoefficientDef coefficient_from_json(const json& j, const std::string& name) {
  if (j.is_number()) return constant(j.get<double>());
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("coefficient '" + name + "' must be a number or {kind, params}");
  const std::string kind = j.at("kind").get<std::string>();
  const json params = j.value("params", json::object());
  try {
    if (kind == "constant") return constant(params.at("value").get<double>());
    if (kind == "table") {
      TableCoefficient t{params.at("x").get<std::vector<double>>(), params.at("values").get<std::vector<double>>()};
      if (t.x.size() < 2 || t.x.size() != t.values.size())
        throw ConfigError("table coefficient '" + name + "' needs >= 2 matching x/values");
      for (std::size_t i = 1; i < t.x.size(); ++i)
        if (!(t.x[i] > t.x[i - 1])) throw ConfigError("table coefficient '" + name + "' x must increase");
      return t;
    }
    if (kind == "linear_ramp") return LinearRamp{params.at("a").get<double>(), params.at("b").get<double>()};
    if (kind == "smooth_bump") return SmoothBump{params.at("a").get<double>(), params.at("b").get<double>()};
  } catch (const json::exception& e) {
    throw ConfigError("coefficient '" + name + "': " + e.what());
  }
  throw ConfigError("coefficient '" + name + "' has unknown kind '" + kind + "'");
}

inline json spec_to_json(const ProblemSpec& s) {
  return {{"L", s.length},
          {"m", coefficient_to_json(s.m)},
          {"p", coefficient_to_json(s.p)},
          {"delta", coefficient_to_json(s.delta)},
          {"eta", s.eta},
          {"kappa", s.kappa},
          {"tau", s.tau},
          {"beta", s.beta},
          {"bc", to_string(s.bc)}};
}

inline ProblemSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("problem spec must be a JSON object");
  ProblemSpec s;
  try {
    for (const char* key : {"L", "m", "p", "delta", "eta", "kappa", "tau", "beta", "bc"})
      if (!j.contains(key)) throw ConfigError(std::string("problem spec is missing '") + key + "'");
    s.length = j.at("L").get<double>();
    s.m = coefficient_from_json(j.at("m"), "m");
    s.p = coefficient_from_json(j.at("p"), "p");
    s.delta = coefficient_from_json(j.at("delta"), "delta");
    s.eta = j.at("eta").get<double>();
    s.kappa = j.at("kappa").get<double>();
    s.tau = j.at("tau").get<double>();
    s.beta = j.at("beta").get<double>();
    s.bc = boundary_mode_from_string(j.at("bc").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("problem spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem spec: ") + e.what());
  }
  return s;
}

inline json constants_to_json(const LyapunovConstants& c) {
  return {{"mu0", c.mu0},       {"mu1", c.mu1},         {"alpha", c.alpha},    {"C1", c.C1},
          {"C2", c.C2},         {"epsilon", c.epsilon}, {"C_final", c.C_final}};
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  ProblemSpec spec;
  int cells = 64;
  double dt = 1e-3;
  double t_final = 1.0;
  int sample_stride = 10;
  std::string initial_preset = "elastic_mode_1";
  std::optional<std::filesystem::path> initial_file;
  std::uint64_t seed = 0;
  std::filesystem::path outputs = "runs";
  double lambda_max = 100.0;
  int sweep_points = 201;
  StationaryData forcing{{}, {}, {1.0}, {}};
  json source;  // normalized document, hashed for run-directory names
};

inline Polynomial polynomial_from_json(const json& j) {
  if (j.is_number()) return Polynomial{j.get<double>()};
  return Polynomial{j.get<std::vector<double>>()};
}

/// Parses and checks a run configuration document. `base` resolves relative
/// initial-data file references.
inline RunConfig config_from_json(const json& j, const std::filesystem::path& base = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  if (!j.contains("spec")) throw ConfigError("config is missing 'spec'");
  c.spec = spec_from_json(j.at("spec"));
  try {
    if (j.contains("grid")) c.cells = j.at("grid").value("N", c.cells);
    if (j.contains("time")) {
      const auto& t = j.at("time");
      c.dt = t.value("dt", c.dt);
      c.t_final = t.value("T_final", c.t_final);
      c.sample_stride = t.value("sample_stride", c.sample_stride);
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("initial")) {
      const auto& in = j.at("initial");
      if (in.is_string()) {
        c.initial_preset = in.get<std::string>();
      } else if (in.contains("file")) {
        std::filesystem::path p = in.at("file").get<std::string>();
        c.initial_file = p.is_relative() ? base / p : p;
      } else {
        c.initial_preset = in.at("preset").get<std::string>();
        if (in.contains("seed")) c.seed = in.at("seed").get<std::uint64_t>();
      }
    }
    if (j.contains("outputs")) c.outputs = j.at("outputs").get<std::string>();
    if (j.contains("sweep")) {
      c.lambda_max = j.at("sweep").value("lambda_max", c.lambda_max);
      c.sweep_points = j.at("sweep").value("points", c.sweep_points);
    }
    if (j.contains("forcing")) {
      const auto& f = j.at("forcing");
      c.forcing = StationaryData{f.contains("f1") ? polynomial_from_json(f.at("f1")) : Polynomial{},
                                 f.contains("f2") ? polynomial_from_json(f.at("f2")) : Polynomial{},
                                 f.contains("f3") ? polynomial_from_json(f.at("f3")) : Polynomial{},
                                 f.contains("f4") ? polynomial_from_json(f.at("f4")) : Polynomial{}};
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.source = j;
  return c;
}

/// Rejects configurations that cannot be run; hypothesis violations included.
inline void check_config(const RunConfig& c) {
  if (c.cells < 4) throw ConfigError("grid.N must be >= 4");
  if (!(c.dt > 0.0)) throw ConfigError("time.dt must be positive");
  if (!(c.t_final > 0.0)) throw ConfigError("time.T_final must be positive");
  if (c.sample_stride < 1) throw ConfigError("time.sample_stride must be >= 1");
  if (c.initial_file && !std::filesystem::exists(*c.initial_file))
    throw ConfigError("initial data file not found: " + c.initial_file->string());
  const auto report = validate_spec(c.spec, 4 * c.cells);
  if (!report.valid()) {
    std::string msg = "hypothesis violation:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw ConfigError(msg);
  }
}

/// Normalized document reflecting command-line overrides.
inline json config_to_json(const RunConfig& c) {
  json j = {{"spec", spec_to_json(c.spec)},
            {"grid", {{"N", c.cells}}},
            {"time", {{"dt", c.dt}, {"T_final", c.t_final}, {"sample_stride", c.sample_stride}}},
            {"seed", c.seed},
            {"sweep", {{"lambda_max", c.lambda_max}, {"points", c.sweep_points}}},
            {"forcing", {{"f1", c.forcing.f1.c}, {"f2", c.forcing.f2.c}, {"f3", c.forcing.f3.c}, {"f4", c.forcing.f4.c}}}};
  if (c.initial_file)
    j["initial"] = {{"file", c.initial_file->string()}};
  else
    j["initial"] = {{"preset", c.initial_preset}};
  return j;
}

inline InitialData initial_data_from_json(const json& j, BoundaryMode bc) {
  InitialData d;
  d.bc = bc;
  try {
    d.u0 = j.at("u0").get<std::vector<double>>();
    d.w0 = j.at("w0").get<std::vector<double>>();
    d.theta0 = j.at("theta0").get<std::vector<double>>();
    d.q0 = j.at("q0").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("initial data file: ") + e.what());
  }
  return d;
}

inline json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

inline InitialData load_initial_data(const RunConfig& c, const Grid& g) {
  InitialData d;
  try {
    d = c.initial_file ? initial_data_from_json(read_json_file(*c.initial_file), c.spec.bc)
                       : make_preset_initial(c.initial_preset, g, c.spec.bc, c.seed);
    check_initial_data(d, g);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return d;
}

// ---------------------------------------------------------------------------
// Output helpers

/// 17 significant digits, enough to round-trip a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

/// Writes via a temporary file in the same directory followed by rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Pretty-printed; nlohmann prints doubles with round-trip precision.
inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

/// FNV-1a 64-bit.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string short_config_hash(const json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config.dump())));
  return std::string(buf, 8);
}

/// run_<UTC ISO 8601 basic>_<hash>; a numeric suffix keeps names unique.
inline std::filesystem::path make_run_directory(const std::filesystem::path& root, const json& config) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  const std::string base = std::string("run_") + stamp + "_" + short_config_hash(config);
  std::filesystem::create_directories(root);
  std::filesystem::path dir = root / base;
  for (int i = 1; std::filesystem::exists(dir); ++i) dir = root / (base + "_" + std::to_string(i));
  std::filesystem::create_directory(dir);
  return dir;
}

}  // namespace cattaneo
