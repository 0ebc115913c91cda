#pragma once

// Reduced action and its companions, on the grid:
//
//   A1 = int |grad u|^2 + V u^2      B = int phi_u u^2      C = int |u|^{p+1}
//   I  = A1/2 + B/4 - C/(p+1)
//   G  = A1 + B - C                  (Nehari function, <I'(u), u>)
//   J  = (1/2 - 1/(p+1)) A1 + (1/4 - 1/(p+1)) B
//
// so I - J = G/(p+1) identically and I = J wherever G = 0.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "spgs/error.hpp"
#include "spgs/fft.hpp"
#include "spgs/grid.hpp"
#include "spgs/poisson.hpp"
#include "spgs/potential.hpp"

namespace spgs {

inline void check_exponent(double p) {
  if (!(p > 3.0 && p < 5.0)) throw Error(ErrorCode::invalid_argument, "exponent p must lie in (3, 5)");
}

struct EnergyBreakdown {
  double A1 = 0.0;
  double B = 0.0;
  double C = 0.0;
  double I = 0.0;
  double G = 0.0;
  double J = 0.0;
  double p = 4.0;

  static EnergyBreakdown from_terms(double A1, double B, double C, double p) {
    check_exponent(p);
    EnergyBreakdown e;
    e.A1 = A1;
    e.B = B;
    e.C = C;
    e.p = p;
    e.I = 0.5 * A1 + 0.25 * B - C / (p + 1.0);
    e.G = A1 + B - C;
    e.J = (0.5 - 1.0 / (p + 1.0)) * A1 + (0.25 - 1.0 / (p + 1.0)) * B;
    return e;
  }

  /// |A1| + B + C, the scale for relative Nehari tolerances.
  double scale() const noexcept { return std::abs(A1) + B + C; }
};

namespace detail {

/// |a|^e with a = 0 mapped to 0 (no log of zero).
inline double abs_pow(double a, double e) noexcept {
  a = std::abs(a);
  return a == 0.0 ? 0.0 : std::exp(e * std::log(a));
}

}  // namespace detail

struct Evaluation {
  EnergyBreakdown breakdown;
  ScalarField phi;
};

struct Residual {
  ScalarField r;
  double norm;  // L2
};

/// I, G, J and the Euler-Lagrange residual for a fixed potential, grid and p.
class ReducedFunctional {
 public:
  ReducedFunctional(const Potential& V, const GridSpec& g, double p)
      : ReducedFunctional(sample_potential(V, g), p) {}

  ReducedFunctional(ScalarField potential_values, double p)
      : potential_(std::move(potential_values)), p_(p) {
    check_exponent(p);
  }

  const GridSpec& grid() const noexcept { return potential_.grid(); }
  double exponent() const noexcept { return p_; }
  const ScalarField& potential_values() const noexcept { return potential_; }

  Evaluation evaluate(const ScalarField& u) const {
    detail::require(u.grid() == grid(), "field and functional live on different grids");
    NonlocalSolve solve = solve_phi(u);
    detail::CompensatedSum pot, nonlinear;
    for (std::size_t i = 0; i < u.size(); ++i) {
      pot.add(potential_[i] * u[i] * u[i]);
      nonlinear.add(detail::abs_pow(u[i], p_ + 1.0));
    }
    const double dv = grid().cell_volume();
    const double A1 = dirichlet_energy(u) + dv * pot.value();
    const double B = nonlocal_energy(u, solve.phi);
    const double C = dv * nonlinear.value();
    return {EnergyBreakdown::from_terms(A1, B, C, p_), std::move(solve.phi)};
  }

  EnergyBreakdown breakdown(const ScalarField& u) const { return evaluate(u).breakdown; }

  /// r = -laplacian(u) + V u + phi u - |u|^{p-1} u, the L2 gradient of I.
  Residual residual(const ScalarField& u, const ScalarField& phi) const {
    detail::require(u.grid() == grid() && phi.grid() == grid(), "field and functional live on different grids");
    ScalarField r = laplacian(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double v = u[i];
      const double power = std::copysign(detail::abs_pow(v, p_), v);
      r[i] = -r[i] + potential_[i] * v + phi[i] * v - power;
    }
    const double norm = l2_norm(r);
    return {std::move(r), norm};
  }

  Residual residual(const ScalarField& u) const { return residual(u, solve_phi(u).phi); }

 private:
  ScalarField potential_;
  double p_;
};

inline EnergyBreakdown energy_breakdown(const ScalarField& u, const Potential& V, double p) {
  return ReducedFunctional(V, u.grid(), p).breakdown(u);
}

inline Residual el_residual(const ScalarField& u, const Potential& V, double p) {
  return ReducedFunctional(V, u.grid(), p).residual(u);
}

/// Eigenvalue of the discrete -laplacian for the box sine mode with
/// wavenumbers (a, b, c), each in 1..n.
inline double laplacian_eigenvalue(const GridSpec& g, std::size_t a, std::size_t b, std::size_t c) {
  const double n1 = static_cast<double>(g.points() + 1);
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  auto axis = [&](std::size_t m) { return (2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(m) / n1)) * inv_h2; };
  return axis(a) + axis(b) + axis(c);
}

/// (-laplacian + 1)^{-1} r, applied exactly in the DST-I eigenbasis of the
/// zero-ghost Laplacian. Symmetric positive definite.
inline ScalarField precondition(const ScalarField& r) {
  const GridSpec& g = r.grid();
  const std::size_t n = g.points();
  const auto& dst = fft::cached<fft::SineCubeTransform>(n);
  fft::RealBuffer a(g.size()), b(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) a[i] = r[i];
  dst.apply(a, b);

  std::vector<double> axis(n);
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  for (std::size_t m = 0; m < n; ++m)
    axis[m] = (2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(m + 1) / static_cast<double>(n + 1))) * inv_h2;
  const double norm = 1.0 / std::pow(2.0 * static_cast<double>(n + 1), 3);
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    b[idx] *= norm / (axis[i] + axis[j] + axis[k] + 1.0);
  });
  dst.apply(b, a);

  ScalarField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = a[i];
  return out;
}

}  // namespace spgs
