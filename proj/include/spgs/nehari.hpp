#pragma once

// Nehari manifold N = {u != 0 : G(u) = 0} and the fibering map.
//
// Along the ray t u the Nehari function is
//
//   G(t u) = t^2 A1 + t^4 B - t^{p+1} C = t^2 q(t^2),
//   q(s)   = A1 + s B - s^{(p-1)/2} C.
//
// For A1 > 0, C > 0 and 3 < p < 5 the exponent (p-1)/2 lies in (1, 2), so q
// is positive at 0, concave, and tends to -inf: it has exactly one positive
// root s*, and t_bar = sqrt(s*) is where I(t u) peaks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>

#include "spgs/error.hpp"
#include "spgs/functional.hpp"
#include "spgs/grid.hpp"
#include "spgs/random_fields.hpp"

namespace spgs {

/// Root of q in s = t^2.
struct FiberRoot {
  double t_bar;
  std::pair<double, double> bracket;  // final t interval around t_bar
  int iterations;
};

inline constexpr double fiber_tolerance = 1e-13;
inline constexpr double nehari_tolerance = 1e-10;

/// Unique t > 0 with A1 + t^2 B = t^{p-1} C. Safeguarded Newton on q(s) with
/// bisection fallback; the bracket is grown by doubling (or halving) from s = 1.
inline FiberRoot solve_fiber(double A1, double B, double C, double p) {
  check_exponent(p);
  if (!(C > 0.0)) throw Error(ErrorCode::zero_field, "cannot project the zero field onto the Nehari manifold");
  if (!(A1 > 0.0)) throw Error(ErrorCode::non_coercive, "quadratic part A1 <= 0; coercivity fails at this field");

  const double e = 0.5 * (p - 1.0);
  auto q = [&](double s) { return A1 + s * B - std::pow(s, e) * C; };
  auto dq = [&](double s) { return B - e * std::pow(s, e - 1.0) * C; };

  double lo = 1.0, hi = 1.0;
  if (q(1.0) > 0.0) {
    while (q(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
    }
  } else {
    while (q(lo) <= 0.0) {
      hi = lo;
      lo *= 0.5;
    }
  }

  double s = 0.5 * (lo + hi);
  int iterations = 0;
  for (; iterations < 200; ++iterations) {
    const double value = q(s);
    if (value > 0.0) {
      lo = s;
    } else if (value < 0.0) {
      hi = s;
    } else {
      lo = hi = s;
      break;
    }
    const double slope = dq(s);
    double next = slope < 0.0 ? s - value / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double change = std::abs(next - s);
    s = next;
    if (change <= fiber_tolerance * s || hi - lo <= fiber_tolerance * s) {
      ++iterations;
      break;
    }
  }
  return {std::sqrt(s), {std::sqrt(lo), std::sqrt(hi)}, iterations};
}

/// Output of the Nehari projection of u.
struct FiberScaling {
  double t_bar;
  EnergyBreakdown scaled_breakdown;  // freshly evaluated at t_bar * u
  std::pair<double, double> bracket;
  int iterations;
  ScalarField field;  // t_bar * u
  ScalarField phi;    // phi of t_bar * u
};

/// Projects u onto N. The scaled field is re-evaluated from scratch and, if
/// rounding leaves |G| above tolerance, the root is polished on that fresh
/// breakdown (at most three times).
inline FiberScaling nehari_project(const ScalarField& u, const ReducedFunctional& functional) {
  const EnergyBreakdown base = functional.breakdown(u);
  FiberRoot root = solve_fiber(base.A1, base.B, base.C, functional.exponent());
  double t_bar = root.t_bar;
  int iterations = root.iterations;

  ScalarField scaled = t_bar * u;
  Evaluation eval = functional.evaluate(scaled);
  for (int polish = 0; polish < 3 && std::abs(eval.breakdown.G) > nehari_tolerance * eval.breakdown.scale();
       ++polish) {
    const FiberRoot fix = solve_fiber(eval.breakdown.A1, eval.breakdown.B, eval.breakdown.C, functional.exponent());
    t_bar *= fix.t_bar;
    iterations += fix.iterations;
    scaled = t_bar * u;
    eval = functional.evaluate(scaled);
  }
  return {t_bar, eval.breakdown, root.bracket, iterations, std::move(scaled), std::move(eval.phi)};
}

inline FiberScaling nehari_project(const ScalarField& u, const Potential& V, double p) {
  return nehari_project(u, ReducedFunctional(V, u.grid(), p));
}

/// Checks that t_bar maximises I(t u): I is evaluated afresh at `samples`
/// log-spaced t in [t_bar/10, 10 t_bar] and must not exceed I(t_bar u) by
/// more than 1e-12 relative. An odd sample count includes t_bar itself.
inline bool ray_max_check(const ScalarField& u, double t_bar, const ReducedFunctional& functional,
                          std::size_t samples) {
  detail::require(samples >= 2, "ray_max_check needs at least two samples");
  const double peak = functional.breakdown(t_bar * u).I;
  const double slack = 1e-12 * std::abs(peak);
  for (std::size_t k = 0; k < samples; ++k) {
    const double exponent = 2.0 * static_cast<double>(k) / static_cast<double>(samples - 1) - 1.0;
    const double t = t_bar * std::pow(10.0, exponent);
    if (functional.breakdown(t * u).I > peak + slack) return false;
  }
  return true;
}

inline bool ray_max_check(const ScalarField& u, const FiberScaling& fs, const ReducedFunctional& functional,
                          std::size_t samples) {
  return ray_max_check(u, fs.t_bar, functional, samples);
}

/// Smallest ||t_bar u||_{p+1} over `trials` projected random fields; an
/// empirical floor for the manifold's distance from the origin.
inline double manifold_floor_check(const ReducedFunctional& functional, std::size_t trials, std::uint64_t seed) {
  detail::require(trials >= 10, "manifold_floor_check needs at least 10 trials");
  RandomFieldFamily family(seed);
  double floor = std::numeric_limits<double>::infinity();
  const double p = functional.exponent();
  for (std::size_t t = 0; t < trials; ++t) {
    const FiberScaling fs = nehari_project(family.next(functional.grid()), functional);
    floor = std::min(floor, std::pow(fs.scaled_breakdown.C, 1.0 / (p + 1.0)));
  }
  return floor;
}

inline double manifold_floor_check(const Potential& V, const GridSpec& g, double p, std::size_t trials,
                                   std::uint64_t seed) {
  return manifold_floor_check(ReducedFunctional(V, g, p), trials, seed);
}

}  // namespace spgs
