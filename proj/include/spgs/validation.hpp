#pragma once

// Invariant suite over seeded random fields: the checks behind `validate`.
// Each check reports its worst observed value next to its threshold.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "spgs/functional.hpp"
#include "spgs/grid.hpp"
#include "spgs/io.hpp"
#include "spgs/nehari.hpp"
#include "spgs/poisson.hpp"
#include "spgs/potential.hpp"
#include "spgs/random_fields.hpp"

namespace spgs {

/// Blob width in cells for comparisons against the Coulomb double sum.
inline constexpr double oracle_width_cells = 4.0;

struct CheckResult {
  std::string name;
  bool passed;
  double worst;
  double threshold;
};

namespace detail {

inline double max_rel_diff(const ScalarField& a, const ScalarField& b) {
  const double scale = std::max(a.max_abs(), b.max_abs());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return scale > 0.0 ? worst / scale : worst;
}

inline CheckResult below(std::string name, double worst, double threshold) {
  return {std::move(name), worst <= threshold, worst, threshold};
}

}  // namespace detail

/// Central difference of I along v against <r, v>, relative to |<r, v>|.
inline double gradient_mismatch(const ReducedFunctional& F, const ScalarField& u, const ScalarField& v) {
  const double eps = 1e-4 * l2_norm(u) / l2_norm(v);
  ScalarField plus = u, minus = u;
  plus.axpy(eps, v);
  minus.axpy(-eps, v);
  const double fd = (F.breakdown(plus).I - F.breakdown(minus).I) / (2.0 * eps);
  const double exact = inner_product(F.residual(u).r, v);
  return std::abs(fd - exact) / std::abs(exact);
}

/// Number of + to - sign changes of q(s) on 64 log-spaced s in
/// [s*/100, 100 s*]; one for every admissible field.
inline int fiber_sign_changes(const EnergyBreakdown& e, double s_star) {
  const double ex = 0.5 * (e.p - 1.0);
  int changes = 0;
  double prev = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double s = s_star * std::pow(10.0, -2.0 + 4.0 * k / 63.0);
    const double q = e.A1 + s * e.B - std::pow(s, ex) * e.C;
    if (k > 0 && prev > 0.0 && q <= 0.0) ++changes;
    if (k > 0 && prev <= 0.0 && q > 0.0) changes += 100;  // - to + is impossible
    prev = q;
  }
  return changes;
}

/// Runs the poisson, functional and nehari invariants on `trials` fields
/// drawn from RandomFieldFamily(seed) on g. The oracle comparison uses a
/// 16^3 grid with the same L and blobs at least four cells wide, where the
/// two discretizations are within about 1% of each other.
inline std::vector<CheckResult> run_invariant_suite(const Potential& V, const GridSpec& g, double p,
                                                    std::uint64_t seed, std::size_t trials = 10) {
  detail::require(trials >= 1, "invariant suite needs at least one trial");
  const ReducedFunctional F(V, g, p);
  RandomFieldFamily family(seed);

  double quad = 0.0, negativity = 0.0, pres = 0.0, identity = 0.0, on_manifold = 0.0, grad = 0.0;
  double scaling = 0.0, fixed = 0.0, nehari_g = 0.0;
  int bad_roots = 0, ray_failures = 0;

  for (std::size_t t = 0; t < trials; ++t) {
    const ScalarField u = family.next(g);
    const ScalarField v = family.next(g);

    const NonlocalSolve s1 = solve_phi(u);
    const NonlocalSolve s2 = solve_phi(2.0 * u);
    quad = std::max(quad, detail::max_rel_diff(s2.phi, 4.0 * s1.phi));
    double lo = 0.0, hi = 0.0;
    for (double x : s1.phi.values()) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    negativity = std::max(negativity, hi > 0.0 ? -lo / hi : 0.0);
    pres = std::max(pres, poisson_residual(u, s1.phi));

    const EnergyBreakdown e = F.breakdown(u);
    identity = std::max(identity, std::abs((e.I - e.J) - e.G / (p + 1.0)) / e.scale());
    grad = std::max(grad, gradient_mismatch(F, u, v));

    const FiberScaling fs = nehari_project(u, F);
    nehari_g = std::max(nehari_g, std::abs(fs.scaled_breakdown.G) / fs.scaled_breakdown.scale());
    on_manifold = std::max(on_manifold, std::abs(fs.scaled_breakdown.I - fs.scaled_breakdown.J) /
                                            std::abs(fs.scaled_breakdown.I));
    if (fiber_sign_changes(e, fs.t_bar * fs.t_bar) != 1) ++bad_roots;
    if (!ray_max_check(u, fs, F, 41)) ++ray_failures;
    const FiberScaling scaled = nehari_project(3.0 * u, F);
    scaling = std::max(scaling, std::abs(scaled.t_bar * 3.0 - fs.t_bar) / fs.t_bar);
    fixed = std::max(fixed, std::abs(nehari_project(fs.field, F).t_bar - 1.0));
  }

  const GridSpec coarse(g.half_width(), 16, g.staggered());
  RandomFieldFamily oracle_family(seed + 1, oracle_width_cells);
  double oracle = 0.0;
  for (std::size_t t = 0; t < std::min<std::size_t>(trials, 5); ++t) {
    const ScalarField u = oracle_family.blobs(coarse);
    const double b = nonlocal_energy(u, solve_phi(u).phi);
    const double ref = NonlocalSolve::kernel_constant * double_integral_oracle(u);
    oracle = std::max(oracle, std::abs(b - ref) / ref);
  }

  return {
      detail::below("poisson.quadratic_map", quad, 1e-12),
      detail::below("poisson.positivity", negativity, 1e-10),
      detail::below("poisson.residual", pres, poisson_tolerance),
      detail::below("poisson.double_integral_oracle", oracle, 0.02),
      detail::below("functional.identity_I_minus_J", identity, 1e-12),
      detail::below("functional.gradient", grad, 1e-6),
      detail::below("nehari.G_at_projection", nehari_g, nehari_tolerance),
      detail::below("nehari.I_equals_J_on_manifold", on_manifold, 1e-9),
      detail::below("nehari.unique_root", bad_roots, 0),
      detail::below("nehari.ray_maximum", ray_failures, 0),
      detail::below("nehari.scaling_consistency", scaling, 1e-10),
      detail::below("nehari.fixed_point", fixed, 1e-10),
  };
}

/// CSV with header check,passed,worst,threshold.
inline void write_checks_csv(std::ostream& os, const std::vector<CheckResult>& checks) {
  os << "check,passed,worst,threshold\n";
  for (const auto& c : checks)
    os << c.name << ',' << (c.passed ? "true" : "false") << ',' << format_decimal(c.worst) << ','
       << format_decimal(c.threshold) << '\n';
}

}  // namespace spgs
