#pragma once

// Run configuration: line-oriented `section.key = value` text, `#` comments.
//
//   grid.L, grid.n                      required
//   grid.staggered                      true
//   potential.kind                      required: constant | coulomb | composite | tabulated
//   potential.V1                        required unless tabulated
//   potential.lambda                    0
//   potential.alpha                     1 (1 or 2)
//   potential.width                     1 (Gaussian well width, composite)
//   potential.table_path                field dump (tabulated)
//   solver.p                            required, in (3, 5)
//   solver.step 1, solver.tol 1e-7, solver.max_iters 2000, solver.seed 1
//   solver.init                         blob | file
//   solver.init_width                   L/6 when unset
//   solver.init_center                  0,0,0
//   solver.init_path                    field dump (init = file)
//   solver.starts 1, solver.allow_noncoercive false
//   run.mode                            solve | sweep-lambda | compare-vinf | validate | radial-crosscheck
//   run.output_dir runs, run.jobs 1
//   sweep.lambdas                       1,2,4
//   radial.r_max 30, radial.n_r 2048
//
// Every error names the offending key.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spgs/error.hpp"
#include "spgs/grid.hpp"
#include "spgs/io.hpp"
#include "spgs/minimize.hpp"
#include "spgs/potential.hpp"

namespace spgs {

enum class RunMode { solve, sweep_lambda, compare_vinf, validate, radial_crosscheck };

inline std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::solve: return "solve";
    case RunMode::sweep_lambda: return "sweep-lambda";
    case RunMode::compare_vinf: return "compare-vinf";
    case RunMode::validate: return "validate";
    case RunMode::radial_crosscheck: return "radial-crosscheck";
  }
  return "unknown";
}

struct GridConfig {
  double L = 0.0;
  std::size_t n = 0;
  bool staggered = true;
  bool operator==(const GridConfig&) const = default;
};

struct PotentialConfig {
  std::string kind;
  double V1 = 0.0;
  double lambda = 0.0;
  int alpha = 1;
  double width = 1.0;
  std::string table_path;
  bool operator==(const PotentialConfig&) const = default;
};

struct SolverSection {
  double p = 0.0;
  double step = 1.0;
  double tol = 1e-7;
  std::size_t max_iters = 2000;
  std::uint64_t seed = 1;
  std::string init = "blob";
  std::optional<double> init_width;
  std::array<double, 3> init_center{0.0, 0.0, 0.0};
  std::string init_path;
  std::size_t starts = 1;
  bool allow_noncoercive = false;
  bool operator==(const SolverSection&) const = default;
};

struct RunConfig {
  GridConfig grid;
  PotentialConfig potential;
  SolverSection solver;
  RunMode mode = RunMode::solve;
  std::string output_dir = "runs";
  std::size_t jobs = 1;
  std::vector<double> sweep_lambdas{1.0, 2.0, 4.0};
  double radial_r_max = 30.0;
  std::size_t radial_n_r = 2048;
  bool operator==(const RunConfig&) const = default;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] inline void config_error(const std::string& key, const std::string& message) {
  throw Error(ErrorCode::config, key + ": " + message, key);
}

inline double parse_real(const std::string& key, std::string_view v) {
  try {
    const double x = parse_decimal(v);
    if (!std::isfinite(x)) config_error(key, "value must be finite");
    return x;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    config_error(key, "expected a number, got '" + std::string(v) + "'");
  }
}

template <class Int>
Int parse_integer(const std::string& key, std::string_view v) {
  Int out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    config_error(key, "expected a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  config_error(key, "expected true or false, got '" + std::string(v) + "'");
}

inline std::vector<double> parse_list(const std::string& key, std::string_view v) {
  std::vector<double> out;
  while (true) {
    const auto comma = v.find(',');
    out.push_back(parse_real(key, trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

inline std::string format_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_decimal(xs[i]);
  }
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "grid.L",           "grid.n",          "grid.staggered",   "potential.kind",     "potential.V1",
      "potential.lambda", "potential.alpha", "potential.width",  "potential.table_path", "solver.p",
      "solver.step",      "solver.tol",      "solver.max_iters", "solver.seed",        "solver.init",
      "solver.init_width", "solver.init_center", "solver.init_path", "solver.starts", "solver.allow_noncoercive",
      "run.mode",         "run.output_dir",  "run.jobs",         "sweep.lambdas",      "radial.r_max",
      "radial.n_r"};
  return keys;
}

/// Parses config text, then applies `overrides` (which win). Unknown and
/// repeated keys are errors; a missing required key lists all missing ones.
inline RunConfig parse_config(std::string_view text, const Overrides& overrides = {}) {
  std::map<std::string, std::string> values;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = detail::trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::config, "line " + std::to_string(line_no) + ": expected 'section.key = value'");
    }
    const std::string key(detail::trim(body.substr(0, eq)));
    const std::string value(detail::trim(body.substr(eq + 1)));
    if (key.empty()) throw Error(ErrorCode::config, "line " + std::to_string(line_no) + ": empty key");
    if (!values.emplace(key, value).second)
      detail::config_error(key, "repeated on line " + std::to_string(line_no));
  }
  for (const auto& [key, value] : overrides) values[key] = value;

  const auto& known = config_keys();
  for (const auto& [key, value] : values) {
    if (std::find(known.begin(), known.end(), key) == known.end()) detail::config_error(key, "unknown key");
  }

  std::vector<std::string> required{"grid.L", "grid.n", "potential.kind", "solver.p"};
  if (!values.count("potential.kind") || values.at("potential.kind") != "tabulated")
    required.insert(required.begin() + 3, "potential.V1");
  std::string missing;
  for (const auto& key : required) {
    if (!values.count(key)) missing += (missing.empty() ? "" : ", ") + key;
  }
  if (!missing.empty()) throw Error(ErrorCode::config, "missing required keys: " + missing, missing);

  RunConfig c;
  auto get = [&](const char* key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };
  using detail::config_error;
  using detail::parse_bool;
  using detail::parse_real;

  c.grid.L = parse_real("grid.L", *get("grid.L"));
  if (!(c.grid.L > 0.0)) config_error("grid.L", "must be positive");
  c.grid.n = detail::parse_integer<std::size_t>("grid.n", *get("grid.n"));
  if (const auto* v = get("grid.staggered")) c.grid.staggered = parse_bool("grid.staggered", *v);
  if (c.grid.n < 8) config_error("grid.n", "must be at least 8");
  if (c.grid.staggered && c.grid.n % 2 != 0) config_error("grid.n", "must be even on a staggered grid");

  c.potential.kind = *get("potential.kind");
  const std::string& kind = c.potential.kind;
  if (kind != "constant" && kind != "coulomb" && kind != "composite" && kind != "tabulated")
    config_error("potential.kind", "must be constant, coulomb, composite or tabulated, got '" + kind + "'");
  if (const auto* v = get("potential.V1")) c.potential.V1 = parse_real("potential.V1", *v);
  if (const auto* v = get("potential.lambda")) c.potential.lambda = parse_real("potential.lambda", *v);
  if (c.potential.lambda < 0.0) config_error("potential.lambda", "must be >= 0");
  if (const auto* v = get("potential.alpha")) {
    const auto a = detail::parse_integer<int>("potential.alpha", *v);
    if (a != 1 && a != 2) config_error("potential.alpha", "must be 1 or 2, got " + *v);
    c.potential.alpha = a;
  }
  if (const auto* v = get("potential.width")) c.potential.width = parse_real("potential.width", *v);
  if (!(c.potential.width > 0.0)) config_error("potential.width", "must be positive");
  if (const auto* v = get("potential.table_path")) c.potential.table_path = *v;
  if (kind == "tabulated" && c.potential.table_path.empty())
    config_error("potential.table_path", "required for a tabulated potential");

  c.solver.p = parse_real("solver.p", *get("solver.p"));
  if (!(c.solver.p > 3.0 && c.solver.p < 5.0)) config_error("solver.p", "must lie in (3, 5)");
  if (const auto* v = get("solver.step")) c.solver.step = parse_real("solver.step", *v);
  if (!(c.solver.step > 0.0)) config_error("solver.step", "must be positive");
  if (const auto* v = get("solver.tol")) c.solver.tol = parse_real("solver.tol", *v);
  if (!(c.solver.tol > 0.0)) config_error("solver.tol", "must be positive");
  if (const auto* v = get("solver.max_iters"))
    c.solver.max_iters = detail::parse_integer<std::size_t>("solver.max_iters", *v);
  if (c.solver.max_iters < 1) config_error("solver.max_iters", "must be at least 1");
  if (const auto* v = get("solver.seed")) c.solver.seed = detail::parse_integer<std::uint64_t>("solver.seed", *v);
  if (const auto* v = get("solver.init")) c.solver.init = *v;
  if (c.solver.init != "blob" && c.solver.init != "file")
    config_error("solver.init", "must be blob or file, got '" + c.solver.init + "'");
  if (const auto* v = get("solver.init_width")) {
    c.solver.init_width = parse_real("solver.init_width", *v);
    if (!(*c.solver.init_width > 0.0)) config_error("solver.init_width", "must be positive");
  }
  if (const auto* v = get("solver.init_center")) {
    const auto xs = detail::parse_list("solver.init_center", *v);
    if (xs.size() != 3) config_error("solver.init_center", "expected three comma-separated numbers");
    c.solver.init_center = {xs[0], xs[1], xs[2]};
  }
  if (const auto* v = get("solver.init_path")) c.solver.init_path = *v;
  if (c.solver.init == "file" && c.solver.init_path.empty())
    config_error("solver.init_path", "required when solver.init = file");
  if (const auto* v = get("solver.starts")) c.solver.starts = detail::parse_integer<std::size_t>("solver.starts", *v);
  if (c.solver.starts < 1) config_error("solver.starts", "must be at least 1");
  if (const auto* v = get("solver.allow_noncoercive"))
    c.solver.allow_noncoercive = parse_bool("solver.allow_noncoercive", *v);

  if (const auto* v = get("run.mode")) {
    bool found = false;
    for (RunMode m : {RunMode::solve, RunMode::sweep_lambda, RunMode::compare_vinf, RunMode::validate,
                      RunMode::radial_crosscheck}) {
      if (*v == to_string(m)) {
        c.mode = m;
        found = true;
      }
    }
    if (!found) config_error("run.mode", "unknown mode '" + *v + "'");
  }
  if (const auto* v = get("run.output_dir")) c.output_dir = *v;
  if (c.output_dir.empty()) config_error("run.output_dir", "must not be empty");
  if (const auto* v = get("run.jobs")) c.jobs = detail::parse_integer<std::size_t>("run.jobs", *v);
  if (c.jobs < 1) config_error("run.jobs", "must be at least 1");
  if (const auto* v = get("sweep.lambdas")) c.sweep_lambdas = detail::parse_list("sweep.lambdas", *v);
  for (double l : c.sweep_lambdas) {
    if (!(l > 0.0)) config_error("sweep.lambdas", "every lambda must be positive");
  }
  if (const auto* v = get("radial.r_max")) c.radial_r_max = parse_real("radial.r_max", *v);
  if (!(c.radial_r_max > 0.0)) config_error("radial.r_max", "must be positive");
  if (const auto* v = get("radial.n_r")) c.radial_n_r = detail::parse_integer<std::size_t>("radial.n_r", *v);
  if (c.radial_n_r < 2) config_error("radial.n_r", "must be at least 2");
  return c;
}

/// Canonical text: every key, fixed order, shortest round-trip numbers.
inline std::string emit_config(const RunConfig& c) {
  std::ostringstream os;
  auto line = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
  auto num = [](double v) { return format_decimal(v); };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  line("grid.L", num(c.grid.L));
  line("grid.n", std::to_string(c.grid.n));
  line("grid.staggered", flag(c.grid.staggered));
  line("potential.kind", c.potential.kind);
  line("potential.V1", num(c.potential.V1));
  line("potential.lambda", num(c.potential.lambda));
  line("potential.alpha", std::to_string(c.potential.alpha));
  line("potential.width", num(c.potential.width));
  if (!c.potential.table_path.empty()) line("potential.table_path", c.potential.table_path);
  line("solver.p", num(c.solver.p));
  line("solver.step", num(c.solver.step));
  line("solver.tol", num(c.solver.tol));
  line("solver.max_iters", std::to_string(c.solver.max_iters));
  line("solver.seed", std::to_string(c.solver.seed));
  line("solver.init", c.solver.init);
  if (c.solver.init_width) line("solver.init_width", num(*c.solver.init_width));
  line("solver.init_center", detail::format_list({c.solver.init_center.begin(), c.solver.init_center.end()}));
  if (!c.solver.init_path.empty()) line("solver.init_path", c.solver.init_path);
  line("solver.starts", std::to_string(c.solver.starts));
  line("solver.allow_noncoercive", flag(c.solver.allow_noncoercive));
  line("run.mode", to_string(c.mode));
  line("run.output_dir", c.output_dir);
  line("run.jobs", std::to_string(c.jobs));
  line("sweep.lambdas", detail::format_list(c.sweep_lambdas));
  line("radial.r_max", num(c.radial_r_max));
  line("radial.n_r", std::to_string(c.radial_n_r));
  return os.str();
}

inline GridSpec make_grid(const RunConfig& c) { return GridSpec(c.grid.L, c.grid.n, c.grid.staggered); }

/// Builds V; a tabulated table is read from its dump and must match the grid.
inline Potential make_potential(const RunConfig& c, const GridSpec& g) {
  const auto& pc = c.potential;
  try {
    if (pc.kind == "constant") return Potential::constant(pc.V1);
    if (pc.kind == "coulomb") return Potential::coulomb(pc.V1, pc.lambda, pc.alpha);
    if (pc.kind == "composite")
      return Potential::composite(Potential::constant(pc.V1), pc.lambda, GaussianProfile{pc.width});
    ScalarField table = load_field(pc.table_path);
    if (!(table.grid() == g)) detail::config_error("potential.table_path", "table grid does not match grid.L/grid.n");
    return Potential::tabulated(std::move(table));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    detail::config_error(pc.kind == "tabulated" ? "potential.table_path" : "potential.kind", e.what());
  }
}

inline SolverConfig make_solver_config(const RunConfig& c, const GridSpec& g) {
  SolverConfig s;
  s.p = c.solver.p;
  s.step = c.solver.step;
  s.tol = c.solver.tol;
  s.max_iters = c.solver.max_iters;
  s.seed = c.solver.seed;
  s.starts = c.solver.starts;
  s.allow_noncoercive = c.solver.allow_noncoercive;
  if (c.solver.init == "file") {
    try {
      ScalarField f = load_field(c.solver.init_path);
      if (!(f.grid() == g)) detail::config_error("solver.init_path", "field grid does not match grid.L/grid.n");
      s.init = std::move(f);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::config) throw;
      detail::config_error("solver.init_path", e.what());
    }
  } else {
    GaussianBlob blob;
    blob.center = c.solver.init_center;
    blob.width = c.solver.init_width;
    s.init = blob;
  }
  return s;
}

}  // namespace spgs
