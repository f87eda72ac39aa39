#pragma once

// Run configuration for the command-line front end.  One JSON document per
// run; every key is optional and falls back to the values listed in
// configs/defaults.json.  Unknown keys are rejected so that typos surface as
// configuration errors naming the field.

#include <rinv/error.hpp>
#include <rinv/local_solver.hpp>
#include <rinv/nash_moser.hpp>
#include <rinv/scale.hpp>

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rinv {

inline constexpr int kSchemaVersion = 1;

enum class Command { solve, branch, census, verify_tame, nashmoser, uniqueness };
enum class ProblemKind { example_a, nemytskii, synthetic };

inline const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::solve: return "solve";
    case Command::branch: return "branch";
    case Command::census: return "census";
    case Command::verify_tame: return "verify-tame";
    case Command::nashmoser: return "nashmoser";
    case Command::uniqueness: return "uniqueness";
  }
  return "unknown";
}

inline const char* to_string(ProblemKind k) noexcept {
  switch (k) {
    case ProblemKind::example_a: return "example_a";
    case ProblemKind::nemytskii: return "nemytskii";
    case ProblemKind::synthetic: return "synthetic";
  }
  return "unknown";
}

struct ProblemConfig {
  ProblemKind kind = ProblemKind::example_a;
  // example_a
  int n = 2;
  std::optional<double> m;  // default 2/n (example_a) or 4 (nemytskii)
  double a = 0.5;
  // nemytskii
  double amplitude = 0.45;
  int grid_size = 1024;
  double radius = 8.0;
  // synthetic
  double ell_prime = 2.0;
  double eps = 0.01;
  int neumann_terms = 40;
  double s_max = 8.0;
  long k_max = 1024;
};

struct TargetConfig {
  Complex value{1.0, 0.0};  // example_a
  int modes = 4;            // nemytskii random field
  double sup = 0.5;
  // synthetic manufactured solution: (mode, value) pairs, image taken at `oversample`
  std::vector<std::pair<long, Complex>> solution{{1, {0.1, 0.0}}, {3, {0.0, 0.05}}};
  double oversample = 4.0;
};

struct PathConfig {
  std::string shape = "circle";  // circle | straight
  double radius = 0.5;
  int samples = 256;
  int radial_steps = 16;
  Complex endpoint{0.0, 1.0};
  int steps = 64;
};

struct SweepConfig {
  std::string kind = "projectors";  // projectors | synthetic
  int trials = 10000;
  double s_max = 8.0;
  long k_max = 32;
};

struct UniquenessConfig {
  double sigma_b = 3.0;
  int levels_b = 6;
  int grid = 9;
  double amplitude = 0.02;
  int active_modes = 3;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  Command command = Command::solve;
  std::uint64_t seed = 1;
  std::string output = "out";
  ProblemConfig problem;
  DescentConfig solver;
  NashMoserConfig nash_moser;
  TargetConfig target;
  PathConfig path;
  double census_radius = 13.0 / 64.0;
  SweepConfig sweep;
  UniquenessConfig uniqueness;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void field_error(const std::string& field, const std::string& what) {
  fail(Errc::config, "config field '" + field + "': " + what);
}

inline void reject_unknown(const json& obj, const std::string& where,
                           const std::set<std::string>& known) {
  if (!obj.is_object()) field_error(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) field_error(where.empty() ? key : where + "." + key, "unknown key");
  }
}

inline std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

inline void read_number(const json& obj, const std::string& where, const char* key, double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) field_error(join(where, key), "expected a number");
  out = v.get<double>();
}

template <class Int>
void read_integer(const json& obj, const std::string& where, const char* key, Int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) field_error(join(where, key), "expected an integer");
  out = v.get<Int>();
}

inline void read_bool(const json& obj, const std::string& where, const char* key, bool& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_boolean()) field_error(join(where, key), "expected true or false");
  out = v.get<bool>();
}

inline void read_string(const json& obj, const std::string& where, const char* key,
                        std::string& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) field_error(join(where, key), "expected a string");
  out = v.get<std::string>();
}

inline Complex parse_complex(const json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  field_error(field, "expected a number or [re, im]");
}

inline void read_complex(const json& obj, const std::string& where, const char* key,
                         Complex& out) {
  if (obj.contains(key)) out = parse_complex(obj.at(key), join(where, key));
}

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) field_error(field, what);
}

inline void parse_problem(const json& j, ProblemConfig& p) {
  const std::string w = "problem";
  reject_unknown(j, w, {"kind", "n", "m", "a", "amplitude", "grid_size", "radius", "ell_prime",
                        "eps", "neumann_terms", "s_max", "k_max"});
  std::string kind = to_string(p.kind);
  read_string(j, w, "kind", kind);
  if (kind == "example_a") p.kind = ProblemKind::example_a;
  else if (kind == "nemytskii") p.kind = ProblemKind::nemytskii;
  else if (kind == "synthetic") p.kind = ProblemKind::synthetic;
  else field_error("problem.kind", "expected example_a, nemytskii or synthetic");
  read_integer(j, w, "n", p.n);
  if (j.contains("m")) {
    double m = 0.0;
    read_number(j, w, "m", m);
    p.m = m;
  }
  read_number(j, w, "a", p.a);
  read_number(j, w, "amplitude", p.amplitude);
  read_integer(j, w, "grid_size", p.grid_size);
  read_number(j, w, "radius", p.radius);
  read_number(j, w, "ell_prime", p.ell_prime);
  read_number(j, w, "eps", p.eps);
  read_integer(j, w, "neumann_terms", p.neumann_terms);
  read_number(j, w, "s_max", p.s_max);
  read_integer(j, w, "k_max", p.k_max);

  require(p.n >= 1, "problem.n", "must be >= 1");
  require(p.a >= 0.0 && p.a < 1.0, "problem.a", "must lie in [0, 1)");
  require(!p.m || *p.m > 0.0, "problem.m", "must be positive");
  require(p.amplitude >= 0.0 && p.amplitude < 1.0, "problem.amplitude", "must lie in [0, 1)");
  require(p.grid_size >= 1, "problem.grid_size", "must be >= 1");
  require(p.radius > 0.0, "problem.radius", "must be positive");
  require(p.ell_prime >= 0.0, "problem.ell_prime", "must be >= 0");
  require(p.eps >= 0.0, "problem.eps", "must be >= 0");
  require(p.neumann_terms >= 1, "problem.neumann_terms", "must be >= 1");
  require(p.s_max >= 0.0, "problem.s_max", "must be >= 0");
  require(p.k_max >= 0, "problem.k_max", "must be >= 0");
}

inline void parse_solver(const json& j, DescentConfig& d) {
  const std::string w = "solver";
  reject_unknown(j, w, {"step", "tol", "abs_tol", "max_steps", "line_search"});
  read_number(j, w, "step", d.step);
  read_number(j, w, "tol", d.tol);
  read_number(j, w, "abs_tol", d.abs_tol);
  read_integer(j, w, "max_steps", d.max_steps);
  read_bool(j, w, "line_search", d.line_search);
  require(d.step > 0.0 && d.step <= 1.0, "solver.step", "must lie in (0, 1]");
  require(d.tol > 0.0 && d.tol < 1.0, "solver.tol", "must lie in (0, 1)");
  require(d.abs_tol >= 0.0, "solver.abs_tol", "must be >= 0");
  require(d.max_steps >= 1, "solver.max_steps", "must be >= 1");
}

inline void parse_nash_moser(const json& j, NashMoserConfig& c) {
  const std::string w = "nash_moser";
  reject_unknown(j, w, {"s0", "s1", "delta", "lambda0", "sigma", "levels", "r", "inner_radius",
                        "inner_a", "inner_m_factor", "inner_tol", "inner_abs_tol",
                        "inner_max_steps", "inner_samples"});
  read_number(j, w, "s0", c.s0);
  read_number(j, w, "s1", c.s1);
  read_number(j, w, "delta", c.delta);
  read_number(j, w, "lambda0", c.lambda0);
  read_number(j, w, "sigma", c.sigma);
  read_integer(j, w, "levels", c.levels);
  read_number(j, w, "r", c.r);
  read_number(j, w, "inner_radius", c.inner_radius);
  read_number(j, w, "inner_a", c.inner_a);
  read_number(j, w, "inner_m_factor", c.inner_m_factor);
  read_number(j, w, "inner_tol", c.inner_tol);
  read_number(j, w, "inner_abs_tol", c.inner_abs_tol);
  read_integer(j, w, "inner_max_steps", c.inner_max_steps);
  read_integer(j, w, "inner_samples", c.inner_samples);
  require(c.inner_radius > 0.0, "nash_moser.inner_radius", "must be positive");
  require(c.inner_tol > 0.0 && c.inner_tol < 1.0, "nash_moser.inner_tol", "must lie in (0, 1)");
  require(c.inner_abs_tol >= 0.0, "nash_moser.inner_abs_tol", "must be >= 0");
  require(c.inner_max_steps >= 1, "nash_moser.inner_max_steps", "must be >= 1");
  require(c.inner_samples >= 0, "nash_moser.inner_samples", "must be >= 0");
}

inline void parse_target(const json& j, TargetConfig& t) {
  const std::string w = "target";
  reject_unknown(j, w, {"value", "modes", "sup", "solution", "oversample"});
  read_complex(j, w, "value", t.value);
  read_integer(j, w, "modes", t.modes);
  read_number(j, w, "sup", t.sup);
  read_number(j, w, "oversample", t.oversample);
  if (j.contains("solution")) {
    const json& s = j.at("solution");
    if (!s.is_array()) field_error("target.solution", "expected an array of [mode, re, im]");
    t.solution.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const json& e = s[i];
      const std::string f = "target.solution[" + std::to_string(i) + "]";
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number() ||
          !e[2].is_number()) {
        field_error(f, "expected [mode, re, im]");
      }
      t.solution.emplace_back(e[0].get<long>(), Complex(e[1].get<double>(), e[2].get<double>()));
    }
  }
  require(t.modes >= 0, "target.modes", "must be >= 0");
  require(t.sup >= 0.0, "target.sup", "must be >= 0");
  require(t.oversample >= 2.0, "target.oversample", "must be >= 2");
}

inline void parse_path(const json& j, PathConfig& p) {
  const std::string w = "path";
  reject_unknown(j, w, {"shape", "radius", "samples", "radial_steps", "endpoint", "steps"});
  read_string(j, w, "shape", p.shape);
  read_number(j, w, "radius", p.radius);
  read_integer(j, w, "samples", p.samples);
  read_integer(j, w, "radial_steps", p.radial_steps);
  read_complex(j, w, "endpoint", p.endpoint);
  read_integer(j, w, "steps", p.steps);
  require(p.shape == "circle" || p.shape == "straight", "path.shape",
          "expected circle or straight");
  require(p.radius > 0.0, "path.radius", "must be positive");
  require(p.samples >= 3, "path.samples", "must be >= 3");
  require(p.radial_steps >= 1, "path.radial_steps", "must be >= 1");
  require(p.steps >= 1, "path.steps", "must be >= 1");
}

inline void parse_sweep(const json& j, SweepConfig& s) {
  const std::string w = "sweep";
  reject_unknown(j, w, {"kind", "trials", "s_max", "k_max"});
  read_string(j, w, "kind", s.kind);
  read_integer(j, w, "trials", s.trials);
  read_number(j, w, "s_max", s.s_max);
  read_integer(j, w, "k_max", s.k_max);
  require(s.kind == "projectors" || s.kind == "synthetic", "sweep.kind",
          "expected projectors or synthetic");
  require(s.trials >= 1, "sweep.trials", "must be >= 1");
  require(s.s_max > 0.0, "sweep.s_max", "must be positive");
  require(s.k_max >= 1, "sweep.k_max", "must be >= 1");
}

inline void parse_uniqueness(const json& j, UniquenessConfig& u) {
  const std::string w = "uniqueness";
  reject_unknown(j, w, {"sigma_b", "levels_b", "grid", "amplitude", "active_modes"});
  read_number(j, w, "sigma_b", u.sigma_b);
  read_integer(j, w, "levels_b", u.levels_b);
  read_integer(j, w, "grid", u.grid);
  read_number(j, w, "amplitude", u.amplitude);
  read_integer(j, w, "active_modes", u.active_modes);
  require(u.grid >= 1, "uniqueness.grid", "must be >= 1");
  require(u.amplitude >= 0.0, "uniqueness.amplitude", "must be >= 0");
  require(u.active_modes >= 0, "uniqueness.active_modes", "must be >= 0");
}

}  // namespace detail

inline Command parse_command(const std::string& name) {
  for (Command c : {Command::solve, Command::branch, Command::census, Command::verify_tame,
                    Command::nashmoser, Command::uniqueness}) {
    if (name == to_string(c)) return c;
  }
  detail::field_error("command",
                      "expected solve, branch, census, verify-tame, nashmoser or uniqueness");
}

/// Parses and validates a configuration document.
inline RunConfig parse_run_config(const nlohmann::json& j) {
  using namespace detail;
  reject_unknown(j, "", {"schema_version", "command", "seed", "output", "problem", "solver",
                         "nash_moser", "target", "path", "census_radius", "sweep",
                         "uniqueness"});
  RunConfig cfg;
  read_integer(j, "", "schema_version", cfg.schema_version);
  if (cfg.schema_version != kSchemaVersion) {
    field_error("schema_version", "unsupported version " + std::to_string(cfg.schema_version) +
                                      " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (j.contains("command")) {
    std::string name;
    read_string(j, "", "command", name);
    cfg.command = parse_command(name);
  }
  read_integer(j, "", "seed", cfg.seed);
  read_string(j, "", "output", cfg.output);
  if (j.contains("problem")) parse_problem(j.at("problem"), cfg.problem);
  if (j.contains("solver")) parse_solver(j.at("solver"), cfg.solver);
  if (j.contains("nash_moser")) parse_nash_moser(j.at("nash_moser"), cfg.nash_moser);
  if (j.contains("target")) parse_target(j.at("target"), cfg.target);
  if (j.contains("path")) parse_path(j.at("path"), cfg.path);
  read_number(j, "", "census_radius", cfg.census_radius);
  require(cfg.census_radius > 0.0, "census_radius", "must be positive");
  if (j.contains("sweep")) parse_sweep(j.at("sweep"), cfg.sweep);
  if (j.contains("uniqueness")) parse_uniqueness(j.at("uniqueness"), cfg.uniqueness);
  cfg.nash_moser.seed = cfg.seed;
  return cfg;
}

inline RunConfig parse_run_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::config, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::config, "cannot open config file '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_run_config_text(text);
}

/// Process exit status for an error category.
inline int exit_code(Errc code) noexcept {
  switch (code) {
    case Errc::config:
    case Errc::domain:
    case Errc::inadmissible:
      return 2;
    case Errc::out_of_radius:
    case Errc::path_refinement:
      return 3;
    case Errc::non_convergence:
    case Errc::radius_breach:
      return 4;
    case Errc::oracle_failure:
      return 5;
  }
  return 1;
}

}  // namespace rinv
