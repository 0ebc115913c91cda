// spgs: ground states of the Schrodinger-Poisson system on a truncated box.
//
// Exit status: 0 ok, 2 configuration error, 3 solver error, 4 validation
// failure. Errors are reported on stderr as one line
//   error code=<code> key=<dotted key or -> message="<text>"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spgs/config.hpp"
#include "spgs/io.hpp"
#include "spgs/minimize.hpp"
#include "spgs/radial.hpp"
#include "spgs/report.hpp"
#include "spgs/validation.hpp"

namespace fs = std::filesystem;
using namespace spgs;

namespace {

constexpr int exit_config = 2;
constexpr int exit_solver = 3;
constexpr int exit_validation = 4;

const char* const config_help = R"(Config file: one `section.key = value` per line, `#` starts a comment.
  grid.L              half width of the box [-L, L]^3 (required)
  grid.n              points per axis, even when staggered (required)
  grid.staggered      true
  potential.kind      constant | coulomb | composite | tabulated (required)
  potential.V1        constant level, or the base of coulomb/composite (required unless tabulated)
  potential.lambda    0; coulomb: V1 - lambda/|x|^alpha, composite: V1 - lambda exp(-|x|^2/width^2)
  potential.alpha     1 (1 or 2)
  potential.width     1
  potential.table_path  field dump with V on the grid (tabulated)
  solver.p            nonlinearity exponent in (3, 5) (required)
  solver.step         1
  solver.tol          1e-7, on ||residual|| / ||u||
  solver.max_iters    2000
  solver.seed         1
  solver.init         blob | file (blob)
  solver.init_width   L/6
  solver.init_center  0,0,0
  solver.init_path    field dump (init = file)
  solver.starts       1; extra starts are seeded random blobs, best level wins
  solver.allow_noncoercive  false
  run.mode            solve | sweep-lambda | compare-vinf | validate | radial-crosscheck (solve)
  run.output_dir      runs
  run.jobs            1 (sweep-lambda points run concurrently)
  sweep.lambdas       1,2,4
  radial.r_max        30
  radial.n_r          2048
Flags override the file; --set key=value may be repeated.)";

void report_error(const std::string& code, const std::string& key, const std::string& message) {
  std::string escaped;
  for (char ch : message) escaped += ch == '"' ? '\'' : ch;
  std::cerr << "error code=" << code << " key=" << (key.empty() ? "-" : key) << " message=\"" << escaped << "\"\n";
}

fs::path make_run_dir(const std::string& root, RunMode mode) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%S", &tm);
  const fs::path base = fs::path(root) / (to_string(mode) + "-" + stamp);
  fs::create_directories(base.parent_path());
  fs::path dir = base;
  for (int suffix = 1; !fs::create_directory(dir); ++suffix) dir = base.string() + "-" + std::to_string(suffix);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  return os;
}

void emit_solve_outputs(const fs::path& dir, const GroundStateResult& r) {
  auto trace = open_out(dir / "trace.csv");
  write_trace_csv(trace, r.trace);
  auto annulus = open_out(dir / "annulus.csv");
  write_annulus_csv(annulus, r.annulus_profile);
  save_field((dir / "u.field").string(), r.u);
  save_field((dir / "phi.field").string(), r.phi);
}

int run_solve(const RunConfig& c, const fs::path& dir) {
  const GridSpec g = make_grid(c);
  const Potential V = make_potential(c, g);
  const SolverConfig s = make_solver_config(c, g);
  const GroundStateResult r = find_ground_state(V, s, g);
  emit_solve_outputs(dir, r);
  auto summary = open_out(dir / "summary.csv");
  summary << summary_header << '\n';
  write_summary_row(summary, c, c.potential, r);
  std::cout << "c_estimate " << format_decimal(r.c_estimate) << " residual " << format_decimal(r.residual_norm)
            << " iterations " << r.iterations << " status " << to_string(r.status) << '\n';
  return 0;
}

int run_sweep(const RunConfig& c, const fs::path& dir) {
  const GridSpec g = make_grid(c);
  const SolverConfig s = make_solver_config(c, g);
  std::vector<double> lambdas = c.sweep_lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  std::vector<std::optional<GroundStateResult>> results(lambdas.size());
  std::vector<std::exception_ptr> errors(lambdas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < lambdas.size(); k = next++) {
      try {
        results[k] = find_ground_state(Potential::constant(lambdas[k]), s, g);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(c.jobs, lambdas.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  auto sweep = open_out(dir / "sweep.csv");
  auto summary = open_out(dir / "summary.csv");
  sweep << "lambda,c\n";
  summary << summary_header << '\n';
  bool increasing = true;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const GroundStateResult& r = *results[k];
    sweep << format_decimal(lambdas[k]) << ',' << format_decimal(r.c_estimate) << '\n';
    PotentialConfig pc{"constant", lambdas[k], 0.0, 1, 1.0, {}};
    write_summary_row(summary, c, pc, r);
    auto trace = open_out(dir / ("trace-" + std::to_string(k) + ".csv"));
    write_trace_csv(trace, r.trace);
    if (k > 0 && !(r.c_estimate > results[k - 1]->c_estimate)) increasing = false;
    std::cout << "lambda " << format_decimal(lambdas[k]) << " c " << format_decimal(r.c_estimate) << '\n';
  }
  if (!increasing) {
    report_error("validation", "sweep.lambdas", "c(lambda) is not strictly increasing");
    return exit_validation;
  }
  return 0;
}

int run_compare(const RunConfig& c, const fs::path& dir) {
  const GridSpec g = make_grid(c);
  const Potential V = make_potential(c, g);
  const VinfComparison r = compare_with_vinf(V, make_solver_config(c, g), g);
  auto out = open_out(dir / "compare.csv");
  out << "c,c_inf,strict\n"
      << format_decimal(r.c) << ',' << format_decimal(r.c_inf) << ',' << (r.strict ? "true" : "false") << '\n';
  auto detail_out = open_out(dir / "compare-detail.csv");
  detail_out << "c,c_inf,c_refined,c_inf_refined,margin,strict\n"
             << format_decimal(r.c) << ',' << format_decimal(r.c_inf) << ',' << format_decimal(r.c_refined) << ','
             << format_decimal(r.c_inf_refined) << ',' << format_decimal(r.margin) << ','
             << (r.strict ? "true" : "false") << '\n';
  std::cout << "c " << format_decimal(r.c) << " c_inf " << format_decimal(r.c_inf) << " margin "
            << format_decimal(r.margin) << " strict " << (r.strict ? "true" : "false") << '\n';
  return 0;
}

int run_validate(const RunConfig& c, const fs::path& dir) {
  const GridSpec g = make_grid(c);
  const Potential V = make_potential(c, g);
  const auto checks = run_invariant_suite(V, g, c.solver.p, c.solver.seed);
  auto out = open_out(dir / "validation.csv");
  write_checks_csv(out, checks);
  const auto failures = std::count_if(checks.begin(), checks.end(), [](const CheckResult& r) { return !r.passed; });
  for (const auto& r : checks) std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << '\n';
  std::cout << failures << " failures\n";
  return failures == 0 ? 0 : exit_validation;
}

int run_crosscheck(const RunConfig& c, const fs::path& dir) {
  const GridSpec g = make_grid(c);
  const Potential V = make_potential(c, g);
  if (!V.is_radial()) throw Error(ErrorCode::config, "potential.kind: radial-crosscheck needs constant or coulomb",
                                  "potential.kind");
  const SolverConfig s = make_solver_config(c, g);
  const GroundStateResult r3 = find_ground_state(V, s, g);
  const RadialGroundState rr = radial_ground_state(V, s, c.radial_r_max, c.radial_n_r);
  emit_solve_outputs(dir, r3);
  auto radial = open_out(dir / "radial.csv");
  write_radial_csv(radial, rr.u, rr.phi);
  auto rtrace = open_out(dir / "radial-trace.csv");
  write_trace_csv(rtrace, rr.trace);
  const double gap = std::abs(r3.c_estimate - rr.c_radial) / rr.c_radial;
  auto out = open_out(dir / "crosscheck.csv");
  out << "c_3d,c_radial,relative_gap,radial_tail_mass\n"
      << format_decimal(r3.c_estimate) << ',' << format_decimal(rr.c_radial) << ',' << format_decimal(gap) << ','
      << format_decimal(rr.tail_mass) << '\n';
  std::cout << "c_3d " << format_decimal(r3.c_estimate) << " c_radial " << format_decimal(rr.c_radial)
            << " relative_gap " << format_decimal(gap) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states of the Schrodinger-Poisson system via the Nehari manifold"};
  app.footer(config_help);
  std::string config_path, mode, output;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  app.add_option("--mode,mode", mode, "solve | sweep-lambda | compare-vinf | validate | radial-crosscheck");
  app.add_option("--config", config_path, "config file");
  app.add_option("--jobs", jobs, "concurrent sweep points")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "solver seed");
  app.add_option("--output", output, "output root directory");
  app.add_option("--set", sets, "override a config key, e.g. --set solver.p=3.5");
  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error(ErrorCode::config, "cannot read config file " + config_path);
      text.assign(std::istreambuf_iterator<char>(in), {});
    }
    Overrides overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::config, "--set expects key=value, got '" + s + "'");
      overrides.emplace_back(std::string(detail::trim(s.substr(0, eq))), std::string(detail::trim(s.substr(eq + 1))));
    }
    if (!mode.empty()) overrides.emplace_back("run.mode", mode);
    if (jobs) overrides.emplace_back("run.jobs", std::to_string(*jobs));
    if (seed) overrides.emplace_back("solver.seed", std::to_string(*seed));
    if (!output.empty()) overrides.emplace_back("run.output_dir", output);
    cfg = parse_config(text, overrides);
  } catch (const Error& e) {
    report_error(std::string(to_string(e.code())), e.key(), e.what());
    return exit_config;
  }

  try {
    const fs::path dir = make_run_dir(cfg.output_dir, cfg.mode);
    {
      auto echo = open_out(dir / "config.txt");
      echo << emit_config(cfg);
    }
    std::cout << "output " << dir.string() << '\n';
    switch (cfg.mode) {
      case RunMode::solve: return run_solve(cfg, dir);
      case RunMode::sweep_lambda: return run_sweep(cfg, dir);
      case RunMode::compare_vinf: return run_compare(cfg, dir);
      case RunMode::validate: return run_validate(cfg, dir);
      case RunMode::radial_crosscheck: return run_crosscheck(cfg, dir);
    }
  } catch (const Error& e) {
    report_error(std::string(to_string(e.code())), e.key(), e.what());
    return e.code() == ErrorCode::config ? exit_config : exit_solver;
  } catch (const std::exception& e) {
    report_error("internal", "", e.what());
    return exit_solver;
  }
  return exit_solver;
}
