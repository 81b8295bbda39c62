/**
 * @file io.hpp
 * @brief Run configuration, solution files and branch output.
 *
 * Config files are JSON with a schema_version; unknown keys are errors.
 * Any key can be overridden from the environment as SOLWAVE_<KEY>, with
 * nested keys joined by a double underscore, e.g.
 *     SOLWAVE_GAMMA=-1  SOLWAVE_BASIS__N=256  SOLWAVE_CONTINUATION__MONITOR__M_MIN=0.05
 * Values are read as JSON when they parse, otherwise as strings.
 *
 * Solution files store every real as a C99 hex-float string so that a
 * write/read cycle is exact.
 */
#pragma once

#include "solwave/continuation.hpp"

#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

extern "C" char** environ;

namespace solwave {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class FileError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kSolutionFormatVersion = 1;

struct RunConfig {
  BranchConfig branch;
  std::string output_dir = "out";
  /// for randomized tests only
  std::uint64_t seed = 0;
  // subcommand inputs
  std::optional<double> alpha;
  std::optional<double> eps;
  double span = 20.0;
  double step = 1e-2;
  std::string solution;
};

namespace detail {

inline double get_real(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("config: '" + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError("config: '" + key + "' must be finite");
  return v;
}

inline int get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError("config: '" + key + "' must be an integer");
  return j.get<int>();
}

inline void reject_unknown(const json& j, const std::vector<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("config: unknown field '" + (where.empty() ? "" : where + ".") + it.key() + "'");
}

}  // namespace detail

/// Builds and validates a RunConfig; throws ConfigError.
inline RunConfig parse_config(const json& j) {
  using namespace detail;
  reject_unknown(j,
                 {"schema_version", "gamma", "eps0", "basis", "newton", "continuation", "diagnostics", "output_dir",
                  "seed", "alpha", "eps", "span", "step", "solution"},
                 "");
  if (!j.contains("schema_version")) throw ConfigError("config: missing schema_version");
  if (get_int(j.at("schema_version"), "schema_version") != kConfigSchemaVersion)
    throw ConfigError("config: unsupported schema_version (expected " + std::to_string(kConfigSchemaVersion) + ")");

  RunConfig c;
  BranchConfig& b = c.branch;
  if (j.contains("gamma")) b.gamma = get_real(j["gamma"], "gamma");
  if (j.contains("eps0")) b.eps0 = get_real(j["eps0"], "eps0");
  if (j.contains("basis")) {
    const json& x = j["basis"];
    reject_unknown(x, {"L", "N"}, "basis");
    if (x.contains("L")) b.half_period = get_real(x["L"], "basis.L");
    if (x.contains("N")) b.modes = get_int(x["N"], "basis.N");
  }
  if (j.contains("newton")) {
    const json& x = j["newton"];
    reject_unknown(x, {"tol_residual", "max_iter", "damping", "max_backtracks"}, "newton");
    if (x.contains("tol_residual")) b.newton.tol_residual = get_real(x["tol_residual"], "newton.tol_residual");
    if (x.contains("max_iter")) b.newton.max_iter = get_int(x["max_iter"], "newton.max_iter");
    if (x.contains("damping")) b.newton.damping = get_real(x["damping"], "newton.damping");
    if (x.contains("max_backtracks")) b.newton.max_backtracks = get_int(x["max_backtracks"], "newton.max_backtracks");
  }
  if (j.contains("continuation")) {
    const json& x = j["continuation"];
    reject_unknown(x,
                   {"h0", "h_min", "h_max", "max_steps", "grow", "continuity", "alpha_weight", "max_modes",
                    "tail_tol", "monitor"},
                   "continuation");
    ContinuationSettings& s = b.continuation;
    if (x.contains("h0")) s.h0 = get_real(x["h0"], "continuation.h0");
    if (x.contains("h_min")) s.h_min = get_real(x["h_min"], "continuation.h_min");
    if (x.contains("h_max")) s.h_max = get_real(x["h_max"], "continuation.h_max");
    if (x.contains("max_steps")) s.max_steps = get_int(x["max_steps"], "continuation.max_steps");
    if (x.contains("grow")) s.grow = get_real(x["grow"], "continuation.grow");
    if (x.contains("continuity")) s.continuity = get_real(x["continuity"], "continuation.continuity");
    if (x.contains("alpha_weight")) s.alpha_weight = get_real(x["alpha_weight"], "continuation.alpha_weight");
    if (x.contains("max_modes")) s.max_modes = get_int(x["max_modes"], "continuation.max_modes");
    if (x.contains("tail_tol")) s.tail_tol = get_real(x["tail_tol"], "continuation.tail_tol");
    if (x.contains("monitor")) {
      const json& m = x["monitor"];
      reject_unknown(m, {"m_min", "alpha_min", "froude_max", "grad_max"}, "continuation.monitor");
      MonitorThresholds& t = s.thresholds;
      if (m.contains("m_min")) t.m_min = get_real(m["m_min"], "continuation.monitor.m_min");
      if (m.contains("alpha_min")) t.alpha_min = get_real(m["alpha_min"], "continuation.monitor.alpha_min");
      if (m.contains("froude_max")) t.froude_max = get_real(m["froude_max"], "continuation.monitor.froude_max");
      if (m.contains("grad_max")) t.grad_max = get_real(m["grad_max"], "continuation.monitor.grad_max");
    }
  }
  if (j.contains("diagnostics")) {
    const json& x = j["diagnostics"];
    reject_unknown(x, {"stations", "scan_nx", "scan_ny", "stagnation"}, "diagnostics");
    DiagnosticsSettings& d = b.diagnostics;
    if (x.contains("stations")) d.stations = get_int(x["stations"], "diagnostics.stations");
    if (x.contains("scan_nx")) d.scan.nx = get_int(x["scan_nx"], "diagnostics.scan_nx");
    if (x.contains("scan_ny")) d.scan.ny = get_int(x["scan_ny"], "diagnostics.scan_ny");
    if (x.contains("stagnation")) {
      if (!x["stagnation"].is_boolean()) throw ConfigError("config: 'diagnostics.stagnation' must be a boolean");
      d.stagnation = x["stagnation"].get<bool>();
    }
    if (d.stations < 2) throw ConfigError("config: diagnostics.stations must be at least 2");
    if (d.scan.nx < 2 || d.scan.ny < 2) throw ConfigError("config: scan grid must be at least 2x2");
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("config: 'output_dir' must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("config: 'seed' must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("alpha")) c.alpha = get_real(j["alpha"], "alpha");
  if (j.contains("eps")) c.eps = get_real(j["eps"], "eps");
  if (j.contains("span")) c.span = get_real(j["span"], "span");
  if (j.contains("step")) c.step = get_real(j["step"], "step");
  if (j.contains("solution")) {
    if (!j["solution"].is_string()) throw ConfigError("config: 'solution' must be a string");
    c.solution = j["solution"].get<std::string>();
  }

  if (!(c.step > 0.0)) throw ConfigError("config: step must be positive");
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

/// The config as JSON, including defaults; parse_config(to_json(c)) reproduces c.
inline json to_json(const RunConfig& c) {
  const BranchConfig& b = c.branch;
  const ContinuationSettings& s = b.continuation;
  json j = {
      {"schema_version", kConfigSchemaVersion},
      {"gamma", b.gamma},
      {"eps0", b.eps0},
      {"basis", {{"L", b.half_period}, {"N", b.modes}}},
      {"newton",
       {{"tol_residual", b.newton.tol_residual},
        {"max_iter", b.newton.max_iter},
        {"damping", b.newton.damping},
        {"max_backtracks", b.newton.max_backtracks}}},
      {"continuation",
       {{"h0", s.h0},
        {"h_min", s.h_min},
        {"h_max", s.h_max},
        {"max_steps", s.max_steps},
        {"grow", s.grow},
        {"continuity", s.continuity},
        {"alpha_weight", s.alpha_weight},
        {"max_modes", s.max_modes},
        {"tail_tol", s.tail_tol},
        {"monitor",
         {{"m_min", s.thresholds.m_min},
          {"alpha_min", s.thresholds.alpha_min},
          {"froude_max", s.thresholds.froude_max},
          {"grad_max", s.thresholds.grad_max}}}}},
      {"diagnostics",
       {{"stations", b.diagnostics.stations},
        {"scan_nx", b.diagnostics.scan.nx},
        {"scan_ny", b.diagnostics.scan.ny},
        {"stagnation", b.diagnostics.stagnation}}},
      {"output_dir", c.output_dir},
      {"seed", c.seed},
      {"span", c.span},
      {"step", c.step},
  };
  if (c.alpha) j["alpha"] = *c.alpha;
  if (c.eps) j["eps"] = *c.eps;
  if (!c.solution.empty()) j["solution"] = c.solution;
  return j;
}

inline constexpr const char* kEnvPrefix = "SOLWAVE_";

/// Overlays SOLWAVE_* variables onto `j`; `env` is a list of NAME=VALUE strings.
inline void apply_env_overrides(json& j, const std::vector<std::string>& env) {
  const std::string prefix = kEnvPrefix;
  for (const std::string& entry : env) {
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(prefix.size(), eq - prefix.size());
    const std::string value = entry.substr(eq + 1);
    if (name.empty()) throw ConfigError("environment: empty key in " + entry.substr(0, eq));

    std::vector<std::string> path;
    std::size_t pos = 0;
    while (true) {
      const auto next = name.find("__", pos);
      path.push_back(name.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (next == std::string::npos) break;
      pos = next + 2;
    }
    json* node = &j;
    for (std::size_t i = 0; i < path.size(); ++i) {
      std::string key = path[i];
      if (key.empty()) throw ConfigError("environment: malformed key " + entry.substr(0, eq));
      // keys are lower case except basis.L and basis.N
      const bool basis_key = i == 1 && path[0] == "BASIS";
      if (!basis_key)
        for (char& ch : key) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      if (!node->is_object()) throw ConfigError("environment: " + entry.substr(0, eq) + " does not name a field");
      if (i + 1 == path.size()) {
        json parsed = json::parse(value, nullptr, false);
        (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      } else {
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
      }
    }
  }
}

inline std::vector<std::string> process_environment() {
  std::vector<std::string> out;
  for (char** e = environ; e && *e; ++e) out.emplace_back(*e);
  return out;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot read " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed JSON in " + path.string());
  return j;
}

// ---------------------------------------------------------------------------
// hex floats and atomic files

inline std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_hex_double(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw FileError("bad real '" + s + "'");
  return v;
}

/// Writes through a temporary file in the same directory, then renames.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw FileError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// solution files

inline json solution_to_json(const ReducedState& s) {
  json coeffs = json::array();
  for (Eigen::Index n = 0; n < s.w1.size(); ++n) coeffs.push_back(hex_double(s.w1.coeffs[n]));
  return {{"format", "solwave-solution"},
          {"version", kSolutionFormatVersion},
          {"gamma", hex_double(s.params.gamma)},
          {"alpha", hex_double(s.params.alpha)},
          {"half_period", hex_double(s.basis.half_period())},
          {"modes", s.basis.mode_count()},
          {"nodes", s.basis.node_count()},
          {"coeffs", coeffs}};
}

inline ReducedState solution_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "solwave-solution") throw FileError("not a solution file");
    if (j.at("version").get<int>() != kSolutionFormatVersion) throw FileError("unsupported solution version");
    const int N = j.at("modes").get<int>();
    const int M = j.at("nodes").get<int>();
    const ModeBasis basis(parse_hex_double(j.at("half_period").get<std::string>()), N, M);
    const json& c = j.at("coeffs");
    if (!c.is_array() || static_cast<int>(c.size()) != N + 1) throw FileError("coefficient count does not match modes");
    SurfaceTrace w1 = SurfaceTrace::zero(basis);
    for (int n = 0; n <= N; ++n) w1.coeffs[n] = parse_hex_double(c[n].get<std::string>());
    const Parameters p{parse_hex_double(j.at("gamma").get<std::string>()),
                       parse_hex_double(j.at("alpha").get<std::string>())};
    return {w1, p, basis};
  } catch (const json::exception& e) {
    throw FileError(std::string("solution file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FileError(std::string("solution file: ") + e.what());
  }
}

inline void write_solution(const std::filesystem::path& path, const ReducedState& s) {
  write_atomic(path, solution_to_json(s).dump(1) + "\n");
}

inline ReducedState read_solution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot read " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw FileError("malformed solution file " + path.string());
  return solution_from_json(j);
}

// ---------------------------------------------------------------------------
// branch output

inline constexpr const char* kBranchCsvHeader =
    "step,s,alpha,F,crest_w1,m1,m2,m3,lopatinskii,flow_force,newton_iters,nodal,overhang";

namespace detail {
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline std::string branch_csv(const Branch& b) {
  std::ostringstream out;
  out << kBranchCsvHeader << '\n';
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const BranchPoint& p = b.points[i];
    const DiagnosticsReport& d = p.diagnostics;
    using detail::fmt17;
    out << i << ',' << fmt17(p.s) << ',' << fmt17(p.state.params.alpha) << ',' << fmt17(d.monitor.froude) << ','
        << fmt17(p.state.w1.crest()) << ',' << fmt17(d.monitor.m1) << ',' << fmt17(d.monitor.m2) << ','
        << fmt17(d.monitor.m3) << ',' << fmt17(d.lopatinskii) << ',' << fmt17(d.flow_force) << ',' << p.newton_iters
        << ',' << (d.nodal ? 1 : 0) << ',' << (d.overhang ? 1 : 0) << '\n';
  }
  return out.str();
}

inline json diagnostics_to_json(const DiagnosticsReport& d) {
  json stag = json::array();
  for (const StagnationPoint& p : d.stagnation_points) stag.push_back({p.x, p.y, p.speed2});
  return {{"flow_force_values", d.flow_force_values},
          {"flow_force_spread", d.flow_force_spread},
          {"flow_force", d.flow_force},
          {"flow_force_laminar", d.flow_force_laminar},
          {"phi_identity_residual", d.phi_identity_residual},
          {"integral_identity_residual", d.integral_identity_residual},
          {"lopatinskii", d.lopatinskii},
          {"monitor",
           {{"m1", d.monitor.m1},
            {"m2", d.monitor.m2},
            {"m3", d.monitor.m3},
            {"froude", d.monitor.froude},
            {"grad_sup", d.monitor.grad_sup}}},
          {"nodal", d.nodal},
          {"nodal_strict", d.nodal_strict},
          {"overhang", d.overhang},
          {"stagnation_points", stag},
          {"critical_layer_crossings", d.critical_layer_crossings},
          {"psi_bound_ok", d.psi_bound_ok},
          {"complementing_residual", d.complementing_residual},
          {"dynamic_velocity_residual", d.dynamic_velocity_residual},
          {"kinematic_velocity_residual", d.kinematic_velocity_residual}};
}

inline std::string diagnostics_ndjson(const Branch& b) {
  std::ostringstream out;
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const BranchPoint& p = b.points[i];
    json rec = diagnostics_to_json(p.diagnostics);
    rec["step"] = i;
    rec["s"] = p.s;
    rec["alpha"] = p.state.params.alpha;
    rec["modes"] = p.state.basis.mode_count();
    rec["residual"] = p.residual;
    out << rec.dump() << '\n';
  }
  return out.str();
}

}  // namespace solwave
