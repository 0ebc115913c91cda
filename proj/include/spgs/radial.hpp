#pragma once

// Radial oracle: the same problem restricted to u = u(|x|), discretized on
// its own 1-D grid r_j = (j + 1/2) dr, j = 0 .. n_r - 1, dr = r_max / n_r.
// Nothing here reuses the 3-D discretization.
//
// Node weights w_j = 4 pi r_j^2 dr. Energies
//
//   A1 = 4 pi sum_{j<n_r} r_{j+1/2}^2 (u_{j+1} - u_j)^2 / dr + sum_j w_j V_j u_j^2
//   B  = sum_j w_j phi_j u_j^2         C = sum_j w_j |u_j|^{p+1}
//
// with the ghost u_{n_r} = -u_{n_r - 1} placing the zero of u at r_max; the
// flux through r = 0 vanishes. The Laplacian below is exactly the
// w-weighted gradient of the first sum, so residual and energy agree.
//
// phi_i = sum_j r_j^2 u_j^2 dr / max(r_i, r_j), Newton's shell theorem with
// midpoint shells; w_i K_ij is symmetric, which keeps B's gradient 4 phi u.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <ostream>
#include <utility>
#include <vector>

#include "spgs/error.hpp"
#include "spgs/functional.hpp"
#include "spgs/io.hpp"
#include "spgs/minimize.hpp"
#include "spgs/nehari.hpp"
#include "spgs/potential.hpp"

namespace spgs {

class RadialProfile {
 public:
  RadialProfile(double r_max, std::size_t n_r) : r_max_(r_max), values_(n_r, 0.0) { check(); }

  RadialProfile(double r_max, std::vector<double> values) : r_max_(r_max), values_(std::move(values)) {
    check();
    for (double v : values_) detail::require(std::isfinite(v), "radial profile values must be finite");
  }

  template <class F>
  static RadialProfile sample(double r_max, std::size_t n_r, F&& f) {
    RadialProfile out(r_max, n_r);
    for (std::size_t j = 0; j < n_r; ++j) out.values_[j] = f(out.radius(j));
    return out;
  }

  double r_max() const noexcept { return r_max_; }
  std::size_t size() const noexcept { return values_.size(); }
  double spacing() const noexcept { return r_max_ / static_cast<double>(values_.size()); }
  double radius(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * spacing(); }
  /// 4 pi r_j^2 dr.
  double weight(std::size_t j) const noexcept {
    const double r = radius(j);
    return 4.0 * std::numbers::pi * r * r * spacing();
  }

  double& operator[](std::size_t j) noexcept { return values_[j]; }
  double operator[](std::size_t j) const noexcept { return values_[j]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  void check() const {
    detail::require(std::isfinite(r_max_) && r_max_ > 0.0, "r_max must be positive");
    detail::require(values_.size() >= 2, "radial profile needs at least two nodes");
  }

  double r_max_;
  std::vector<double> values_;
};

/// Potential of the charge u^2 by shell sums; O(n_r).
inline RadialProfile radial_solve_phi(const RadialProfile& u) {
  const std::size_t n = u.size();
  const double dr = u.spacing();
  std::vector<double> inner(n), outer(n);
  // inner[i] = sum_{j<i} r_j^2 u_j^2 dr, outer[i] = sum_{j>i} r_j u_j^2 dr
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inner[i] = acc;
    const double r = u.radius(i);
    acc += r * r * u[i] * u[i] * dr;
  }
  acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    outer[i] = acc;
    acc += u.radius(i) * u[i] * u[i] * dr;
  }
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = u.radius(i);
    phi[i] = inner[i] / r + r * u[i] * u[i] * dr + outer[i];
  }
  return RadialProfile(u.r_max(), std::move(phi));
}

/// phi(0) = sum_j r_j u_j^2 dr.
inline double radial_phi_at_origin(const RadialProfile& u) {
  double acc = 0.0;
  for (std::size_t j = u.size(); j-- > 0;) acc += u.radius(j) * u[j] * u[j] * u.spacing();
  return acc;
}

/// sum_j w_j f_j.
inline double radial_integrate(const RadialProfile& f) {
  detail::CompensatedSum acc;
  for (std::size_t j = 0; j < f.size(); ++j) acc.add(f.weight(j) * f[j]);
  return acc.value();
}

/// u'' + (2/r) u' in conservative form.
inline RadialProfile radial_laplacian(const RadialProfile& u) {
  const std::size_t n = u.size();
  const double dr = u.spacing();
  RadialProfile out(u.r_max(), n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = u.radius(j);
    const double right = r + 0.5 * dr;
    const double left = r - 0.5 * dr;
    const double next = j + 1 < n ? u[j + 1] : -u[j];
    const double prev = j > 0 ? u[j - 1] : u[j];
    out[j] = (right * right * (next - u[j]) - left * left * (u[j] - prev)) / (r * r * dr * dr);
  }
  return out;
}

/// 4 pi int u'^2 r^2 dr, consistent with radial_laplacian.
inline double radial_dirichlet_energy(const RadialProfile& u) {
  const std::size_t n = u.size();
  const double dr = u.spacing();
  detail::CompensatedSum acc;
  for (std::size_t j = 0; j < n; ++j) {
    const double right = u.radius(j) + 0.5 * dr;
    const double next = j + 1 < n ? u[j + 1] : -u[j];
    const double d = next - u[j];
    acc.add(right * right * d * d / dr);
  }
  return 4.0 * std::numbers::pi * acc.value();
}

class RadialFunctional {
 public:
  RadialFunctional(const Potential& V, double r_max, std::size_t n_r, double p) : p_(p), potential_(r_max, n_r) {
    check_exponent(p);
    detail::require(V.is_radial(), "radial oracle needs a constant or Coulomb potential");
    for (std::size_t j = 0; j < n_r; ++j) potential_[j] = V.radial_value(potential_.radius(j));
  }

  double exponent() const noexcept { return p_; }
  const RadialProfile& potential_values() const noexcept { return potential_; }

  struct Evaluation {
    EnergyBreakdown breakdown;
    RadialProfile phi;
  };

  Evaluation evaluate(const RadialProfile& u) const {
    check_match(u);
    RadialProfile phi = radial_solve_phi(u);
    detail::CompensatedSum pot, nonlocal, nonlinear;
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double w = u.weight(j);
      const double u2 = u[j] * u[j];
      pot.add(w * potential_[j] * u2);
      nonlocal.add(w * phi[j] * u2);
      nonlinear.add(w * detail::abs_pow(u[j], p_ + 1.0));
    }
    const double A1 = radial_dirichlet_energy(u) + pot.value();
    return {EnergyBreakdown::from_terms(A1, nonlocal.value(), nonlinear.value(), p_), std::move(phi)};
  }

  /// -u'' - (2/r) u' + V u + phi u - |u|^{p-1} u.
  RadialProfile residual(const RadialProfile& u, const RadialProfile& phi) const {
    check_match(u);
    RadialProfile r = radial_laplacian(u);
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double v = u[j];
      r[j] = -r[j] + (potential_[j] + phi[j]) * v - std::copysign(detail::abs_pow(v, p_), v);
    }
    return r;
  }

 private:
  void check_match(const RadialProfile& u) const {
    detail::require(u.size() == potential_.size() && u.r_max() == potential_.r_max(),
                    "radial profile and functional use different grids");
  }

  double p_;
  RadialProfile potential_;
};

/// sqrt(sum_j w_j f_j^2).
inline double radial_l2_norm(const RadialProfile& f) {
  detail::CompensatedSum acc;
  for (std::size_t j = 0; j < f.size(); ++j) acc.add(f.weight(j) * f[j] * f[j]);
  return std::sqrt(acc.value());
}

/// (-radial_laplacian + 1)^{-1} r by the Thomas algorithm on the symmetric
/// form (K + W) x = W r.
inline RadialProfile radial_precondition(const RadialProfile& r) {
  const std::size_t n = r.size();
  const double dr = r.spacing();
  std::vector<double> diag(n), upper(n, 0.0), rhs(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double rj = r.radius(j);
    const double right = (rj + 0.5 * dr) * (rj + 0.5 * dr) / dr;
    const double left = j > 0 ? (rj - 0.5 * dr) * (rj - 0.5 * dr) / dr : 0.0;
    const double w = rj * rj * dr;
    diag[j] = left + (j + 1 < n ? right : 2.0 * right) + w;
    if (j + 1 < n) upper[j] = -right;
    rhs[j] = w * r[j];
  }
  for (std::size_t j = 1; j < n; ++j) {
    const double m = upper[j - 1] / diag[j - 1];
    diag[j] -= m * upper[j - 1];
    rhs[j] -= m * rhs[j - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t j = n - 1; j-- > 0;) x[j] = (rhs[j] - upper[j] * x[j + 1]) / diag[j];
  return RadialProfile(r.r_max(), std::move(x));
}

struct RadialGroundState {
  RadialProfile u;
  RadialProfile phi;
  EnergyBreakdown breakdown;
  double c_radial;
  double residual_norm;  // relative
  std::size_t iterations;
  SolveStatus status;
  double tail_mass;  // share of int u^2 beyond 0.9 r_max
  std::vector<TraceRow> trace;
};

inline constexpr double radial_tail_tolerance = 1e-10;

/// Share of the mass int u^2 carried by r > 0.9 r_max.
inline double radial_tail_mass(const RadialProfile& u) {
  detail::CompensatedSum all, tail;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double m = u.weight(j) * u[j] * u[j];
    all.add(m);
    if (u.radius(j) > 0.9 * u.r_max()) tail.add(m);
  }
  return all.value() > 0.0 ? tail.value() / all.value() : 0.0;
}

/// Radial ground state by the same projected descent as the 3-D solver. The
/// start is a Gaussian of width `init_width` (default r_max / 12) at the
/// origin; only cfg.p, step, tol and max_iters are used.
inline RadialGroundState radial_ground_state(const Potential& V, const SolverConfig& cfg, double r_max,
                                             std::size_t n_r, std::optional<double> init_width = {}) {
  cfg.validate();
  const RadialFunctional F(V, r_max, n_r, cfg.p);
  const double w = init_width.value_or(r_max / 12.0);
  detail::require(std::isfinite(w) && w > 0.0, "initial width must be positive");

  struct State {
    RadialProfile u;
    RadialProfile phi;
    EnergyBreakdown e;
    RadialProfile r;
    double residual;
  };
  auto project = [&](const RadialProfile& v) {
    const auto base = F.evaluate(v).breakdown;
    double t = solve_fiber(base.A1, base.B, base.C, cfg.p).t_bar;
    auto scale = [&](double s) {
      std::vector<double> vals = v.values();
      for (double& x : vals) x *= s;
      return RadialProfile(v.r_max(), std::move(vals));
    };
    RadialProfile u = scale(t);
    auto ev = F.evaluate(u);
    for (int polish = 0; polish < 3 && std::abs(ev.breakdown.G) > nehari_tolerance * ev.breakdown.scale(); ++polish) {
      t *= solve_fiber(ev.breakdown.A1, ev.breakdown.B, ev.breakdown.C, cfg.p).t_bar;
      u = scale(t);
      ev = F.evaluate(u);
    }
    RadialProfile res = F.residual(u, ev.phi);
    const double rel = radial_l2_norm(res) / radial_l2_norm(u);
    return State{std::move(u), std::move(ev.phi), ev.breakdown, std::move(res), rel};
  };

  State cur = project(RadialProfile::sample(r_max, n_r, [&](double r) { return std::exp(-r * r / (w * w)); }));
  std::vector<TraceRow> trace{{0, cur.e, cur.residual, 0.0}};
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
    const RadialProfile d = radial_precondition(cur.r);
    bool accepted = false;
    while (step >= floor) {
      std::vector<double> vals = cur.u.values();
      for (std::size_t j = 0; j < vals.size(); ++j) vals[j] -= step * d[j];
      State next = project(RadialProfile(r_max, std::move(vals)));
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * cur.e.scale();
      if (next.e.I < cur.e.I || (next.e.I <= cur.e.I + noise && next.residual < cur.residual)) {
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
    trace.push_back({iter, cur.e, cur.residual, step});
    step = std::min(1.5 * step, max_step);
  }
  const double tail = radial_tail_mass(cur.u);
  return {std::move(cur.u), std::move(cur.phi), cur.e, cur.e.I, cur.residual, iter, status, tail, std::move(trace)};
}

/// CSV with header r,u,phi.
inline void write_radial_csv(std::ostream& os, const RadialProfile& u, const RadialProfile& phi) {
  detail::require(u.size() == phi.size(), "u and phi have different lengths");
  os << "r,u,phi\n";
  for (std::size_t j = 0; j < u.size(); ++j)
    os << format_decimal(u.radius(j)) << ',' << format_decimal(u[j]) << ',' << format_decimal(phi[j]) << '\n';
}

}  // namespace spgs
