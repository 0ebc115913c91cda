#pragma once

// Ground level c = inf_N I by preconditioned gradient descent with Nehari
// re-projection after every step, and the experiments built on it.
//
// One iteration from u on N with residual r:
//   d = (-laplacian + 1)^{-1} r
//   trial = project(u - step d); halve step until I(trial) < I(u)
//   accept, grow step by 1.5
// Near convergence the energy decrease drops below rounding in I; a trial
// whose I is within rounding of I(u) is then accepted when it lowers the
// residual, so the trace is non-increasing up to a few ulps of I.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spgs/error.hpp"
#include "spgs/functional.hpp"
#include "spgs/grid.hpp"
#include "spgs/nehari.hpp"
#include "spgs/potential.hpp"
#include "spgs/random_fields.hpp"

namespace spgs {

/// amplitude * exp(-|x - center|^2 / width^2). Unset width means L/6; unset
/// amplitude means unit L2 mass.
struct GaussianBlob {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  std::optional<double> width;
  std::optional<double> amplitude;
};

using InitialGuess = std::variant<GaussianBlob, ScalarField>;

struct SolverConfig {
  double p = 4.0;
  double step = 1.0;
  double tol = 1e-7;  // on ||r|| / ||u||
  std::size_t max_iters = 2000;
  InitialGuess init = GaussianBlob{};
  std::uint64_t seed = 1;
  std::size_t starts = 1;  // starts beyond the first are seeded random blobs
  bool allow_noncoercive = false;
  std::size_t coercivity_trials = 32;

  void validate() const {
    check_exponent(p);
    detail::require(std::isfinite(step) && step > 0.0, "solver step must be positive");
    detail::require(std::isfinite(tol) && tol > 0.0, "solver tolerance must be positive");
    detail::require(max_iters >= 1, "max_iters must be at least 1");
    detail::require(starts >= 1, "starts must be at least 1");
  }
};

enum class SolveStatus { converged, max_iters, no_descent };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::no_descent: return "no_descent";
  }
  return "unknown";
}

struct TraceRow {
  std::size_t iter;
  EnergyBreakdown breakdown;
  double residual_l2;  // relative, ||r|| / ||u||
  double step;         // step that produced this iterate; 0 for the start
};

struct AnnulusShell {
  double r;
  double mass;
};

struct GroundStateResult {
  ScalarField u;
  ScalarField phi;
  EnergyBreakdown breakdown;
  double c_estimate;
  double residual_norm;  // relative
  std::size_t iterations;
  SolveStatus status;
  std::size_t start;  // which start produced the result
  std::vector<TraceRow> trace;
  std::vector<AnnulusShell> annulus_profile;
};

/// Shell masses of |grad u|^2 + u^2 + phi u^2 over r <= |x| <= r + 1 for
/// r = 0 .. floor(L) - 1.
inline std::vector<AnnulusShell> annulus_mass_profile(const ScalarField& u, const ScalarField& phi) {
  detail::require(u.grid() == phi.grid(), "u and phi live on different grids");
  ScalarField density = gradient_density(u);
  for (std::size_t i = 0; i < u.size(); ++i) density[i] += u[i] * u[i] * (1.0 + phi[i]);
  std::vector<AnnulusShell> out;
  const auto shells = static_cast<std::size_t>(std::floor(u.grid().half_width()));
  for (std::size_t r = 0; r < shells; ++r) {
    const double rd = static_cast<double>(r);
    out.push_back({rd, annulus_integral(density, rd)});
  }
  return out;
}

/// Largest mass[r+1] / mass[r] over shells with r > L/2; 0 if no shell qualifies.
inline double worst_outer_decay(const std::vector<AnnulusShell>& profile, double half_width) {
  double worst = 0.0;
  for (std::size_t r = 0; r + 1 < profile.size(); ++r) {
    if (profile[r + 1].r <= 0.5 * half_width) continue;
    const double ratio = profile[r].mass > 0.0 ? profile[r + 1].mass / profile[r].mass : 0.0;
    worst = std::max(worst, ratio);
  }
  return worst;
}

namespace detail {

inline ScalarField initial_field(const InitialGuess& init, const GridSpec& g) {
  if (const auto* field = std::get_if<ScalarField>(&init)) {
    require(field->grid() == g, "initial field lives on a different grid");
    return *field;
  }
  const auto& blob = std::get<GaussianBlob>(init);
  const double w = blob.width.value_or(g.half_width() / 6.0);
  require(std::isfinite(w) && w > 0.0, "initial blob width must be positive");
  const auto [cx, cy, cz] = blob.center;
  ScalarField u = ScalarField::sample(g, [&](double x, double y, double z) {
    const double dx = x - cx, dy = y - cy, dz = z - cz;
    return std::exp(-(dx * dx + dy * dy + dz * dz) / (w * w));
  });
  if (blob.amplitude) {
    u *= *blob.amplitude;
  } else {
    const double norm = l2_norm(u);
    if (norm > 0.0) u *= 1.0 / norm;
  }
  return u;
}

struct Iterate {
  ScalarField u;
  ScalarField phi;
  EnergyBreakdown breakdown;
  ScalarField r;
  double residual;  // relative
};

inline Iterate make_iterate(FiberScaling&& fs, const ReducedFunctional& F) {
  Residual res = F.residual(fs.field, fs.phi);
  const double unorm = l2_norm(fs.field);
  return {std::move(fs.field), std::move(fs.phi), fs.scaled_breakdown, std::move(res.r), res.norm / unorm};
}

inline GroundStateResult descend(ScalarField start, const ReducedFunctional& F, const SolverConfig& cfg,
                                 std::size_t start_index) {
  Iterate cur = make_iterate(nehari_project(start, F), F);
  std::vector<TraceRow> trace{{0, cur.breakdown, cur.residual, 0.0}};
  const double floor = 1e-12 * cfg.step;
  const double max_step = 64.0 * cfg.step;
  double step = cfg.step;
  SolveStatus status = SolveStatus::max_iters;
  std::size_t iter = 0;

  while (true) {
    if (cur.residual <= cfg.tol) {
      status = SolveStatus::converged;
      break;
    }
    if (iter >= cfg.max_iters) break;
    const ScalarField d = precondition(cur.r);
    bool accepted = false;
    while (step >= floor) {
      ScalarField trial = cur.u;
      trial.axpy(-step, d);
      Iterate next = make_iterate(nehari_project(trial, F), F);
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * cur.breakdown.scale();
      const bool lower = next.breakdown.I < cur.breakdown.I;
      const bool level = next.breakdown.I <= cur.breakdown.I + noise && next.residual < cur.residual;
      if (lower || level) {
        cur = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      status = SolveStatus::no_descent;
      break;
    }
    ++iter;
    trace.push_back({iter, cur.breakdown, cur.residual, step});
    step = std::min(1.5 * step, max_step);
  }

  GroundStateResult out{std::move(cur.u), std::move(cur.phi), cur.breakdown, cur.breakdown.I, cur.residual,
                        iter,            status,             start_index,   std::move(trace), {}};
  out.annulus_profile = annulus_mass_profile(out.u, out.phi);
  return out;
}

}  // namespace detail

/// Descent to the ground state of V on g. Throws NonCoercive when the
/// coercivity estimate is not positive (unless overridden) and ZeroField for a
/// zero initial guess. Stalls and iteration limits are reported in `status`.
/// With several starts the lowest level wins.
inline GroundStateResult find_ground_state(const Potential& V, const SolverConfig& cfg, const GridSpec& g) {
  cfg.validate();
  if (!cfg.allow_noncoercive) {
    const CoercivityEstimate est = coercivity_check(V, g, std::max<std::size_t>(cfg.coercivity_trials, 1), cfg.seed);
    if (!est.ok) {
      throw Error(ErrorCode::non_coercive,
                  "coercivity estimate " + std::to_string(est.bound) + " is not positive; refusing to start");
    }
  }
  const ReducedFunctional F(V, g, cfg.p);
  std::optional<GroundStateResult> best;
  RandomFieldFamily family(cfg.seed);
  for (std::size_t s = 0; s < cfg.starts; ++s) {
    ScalarField start = s == 0 ? detail::initial_field(cfg.init, g) : family.blobs(g);
    GroundStateResult run = detail::descend(std::move(start), F, cfg, s);
    if (!best || run.c_estimate < best->c_estimate) best = std::move(run);
  }
  return std::move(*best);
}

/// c(lambda) for the constant potential V = lambda.
inline double ground_level_constant(double lambda, const SolverConfig& cfg, const GridSpec& g) {
  detail::require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive");
  return find_ground_state(Potential::constant(lambda), cfg, g).c_estimate;
}

/// Next even resolution at about 3n/2.
inline GridSpec refined_grid(const GridSpec& g) {
  std::size_t n = (3 * g.points() + 1) / 2;
  if (g.staggered() && n % 2 == 1) ++n;
  return GridSpec(g.half_width(), n, g.staggered());
}

struct VinfComparison {
  double c;
  double c_inf;
  bool strict;
  double margin;  // 3 * |gap(refined) - gap|
  double c_refined;
  double c_inf_refined;
};

/// c = c(V) against c_inf = c(V_inf). The gap c_inf - c counts as strict only
/// beyond three times its change under refinement n -> 3n/2.
inline VinfComparison compare_with_vinf(const Potential& V, const SolverConfig& cfg, const GridSpec& g) {
  const AsymptoticLevel level = asymptotic_level(V);
  detail::require(level.value > 0.0, "compare_with_vinf needs V_inf > 0");
  const GridSpec fine = refined_grid(g);
  const Potential limit = Potential::constant(level.value);
  VinfComparison out{};
  out.c = find_ground_state(V, cfg, g).c_estimate;
  out.c_inf = find_ground_state(limit, cfg, g).c_estimate;
  out.c_refined = find_ground_state(V, cfg, fine).c_estimate;
  out.c_inf_refined = find_ground_state(limit, cfg, fine).c_estimate;
  const double delta = std::abs((out.c_inf_refined - out.c_refined) - (out.c_inf - out.c));
  out.margin = 3.0 * delta;
  out.strict = out.c < out.c_inf - out.margin;
  return out;
}

struct MountainPass {
  double c_nehari;
  double c_ray;         // over random fields and the minimizer
  double c_ray_random;  // over random fields only
};

/// Ray maxima max_t I(t u) = I(t_bar u) over random fields and the minimizer.
inline MountainPass mountain_pass_crosscheck(const Potential& V, const SolverConfig& cfg, const GridSpec& g,
                                             std::size_t trials, std::uint64_t seed) {
  detail::require(trials >= 10, "mountain_pass_crosscheck needs at least 10 trials");
  const GroundStateResult gs = find_ground_state(V, cfg, g);
  const ReducedFunctional F(V, g, cfg.p);
  RandomFieldFamily family(seed);
  double random_min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t)
    random_min = std::min(random_min, nehari_project(family.next(g), F).scaled_breakdown.I);
  const double at_minimizer = nehari_project(gs.u, F).scaled_breakdown.I;
  return {gs.c_estimate, std::min(random_min, at_minimizer), random_min};
}

/// Centre of mass of u^2.
inline std::array<double, 3> centroid(const ScalarField& u) {
  const GridSpec& g = u.grid();
  detail::CompensatedSum m, x, y, z;
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    const double w = u[idx] * u[idx];
    m.add(w);
    x.add(w * g.coordinate(i));
    y.add(w * g.coordinate(j));
    z.add(w * g.coordinate(k));
  });
  detail::require(m.value() > 0.0, "centroid of the zero field");
  return {x.value() / m.value(), y.value() / m.value(), z.value() / m.value()};
}

/// Spherical average of u about its centroid: shell means on bins of width
/// bin_fraction * h, linearly interpolated back to the nodes.
inline ScalarField radialize(const ScalarField& u, double bin_fraction = 0.25) {
  const GridSpec& g = u.grid();
  const auto c = centroid(u);
  const double bin = bin_fraction * g.spacing();
  auto dist = [&](std::size_t i, std::size_t j, std::size_t k) {
    const double dx = g.coordinate(i) - c[0], dy = g.coordinate(j) - c[1], dz = g.coordinate(k) - c[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  };
  const std::size_t bins = static_cast<std::size_t>(4.0 * g.half_width() / bin) + 2;
  std::vector<double> sum(bins, 0.0), rsum(bins, 0.0), count(bins, 0.0);
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    const double r = dist(i, j, k);
    const auto b = static_cast<std::size_t>(r / bin);
    sum[b] += u[idx];
    rsum[b] += r;
    count[b] += 1.0;
  });
  std::vector<double> rs, means;
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0.0) continue;
    rs.push_back(rsum[b] / count[b]);
    means.push_back(sum[b] / count[b]);
  }
  ScalarField out(g);
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    const double r = dist(i, j, k);
    const auto it = std::lower_bound(rs.begin(), rs.end(), r);
    if (it == rs.begin()) {
      out[idx] = means.front();
    } else if (it == rs.end()) {
      out[idx] = means.back();
    } else {
      const std::size_t hi = static_cast<std::size_t>(it - rs.begin());
      const double t = (r - rs[hi - 1]) / (rs[hi] - rs[hi - 1]);
      out[idx] = (1.0 - t) * means[hi - 1] + t * means[hi];
    }
  });
  return out;
}

/// ||u - radialize(u)|| / ||u||.
inline double radial_asymmetry(const ScalarField& u) {
  ScalarField diff = u;
  diff -= radialize(u);
  return l2_norm(diff) / l2_norm(u);
}

}  // namespace spgs
