#pragma once

// Uniform truncated-box discretization of R^3.
//
// The box is [-L, L]^3 with n nodes per axis and spacing h = 2L/n. Staggered
// grids place nodes at cell centres (-L + (i + 1/2) h), so no node sits on the
// origin; unstaggered grids use -L + i h. Fields are stored x-fastest.
//
// Derivatives use centred second-order differences with a zero ghost layer
// outside the box. Quadrature is the midpoint rule h^3 * sum.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "spgs/error.hpp"

namespace spgs {

namespace detail {

/// Neumaier-compensated running sum; fixed order makes reductions repeatable.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

class GridSpec {
 public:
  GridSpec(double half_width, std::size_t points_per_axis, bool staggered = true)
      : half_width_(half_width), points_(points_per_axis), staggered_(staggered) {
    detail::require(std::isfinite(half_width) && half_width > 0.0, "grid half-width must be positive");
    detail::require(points_per_axis >= 8, "grid needs at least 8 points per axis");
    // an odd staggered grid would put its middle node on the origin
    detail::require(!staggered || points_per_axis % 2 == 0, "staggered grids need an even point count");
    spacing_ = 2.0 * half_width_ / static_cast<double>(points_);
  }

  double half_width() const noexcept { return half_width_; }
  std::size_t points() const noexcept { return points_; }
  bool staggered() const noexcept { return staggered_; }
  double spacing() const noexcept { return spacing_; }
  double cell_volume() const noexcept { return spacing_ * spacing_ * spacing_; }
  std::size_t size() const noexcept { return points_ * points_ * points_; }

  double coordinate(std::size_t i) const noexcept {
    return -half_width_ + (static_cast<double>(i) + (staggered_ ? 0.5 : 0.0)) * spacing_;
  }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + points_ * (j + points_ * k);
  }

  std::array<double, 3> position(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return {coordinate(i), coordinate(j), coordinate(k)};
  }

  double radius(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    const auto [x, y, z] = position(i, j, k);
    return std::sqrt(x * x + y * y + z * z);
  }

  /// Smallest |x| over all nodes.
  double min_radius() const noexcept {
    double best = std::abs(coordinate(0));
    for (std::size_t i = 1; i < points_; ++i) best = std::min(best, std::abs(coordinate(i)));
    return std::sqrt(3.0) * best;
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
    return a.half_width_ == b.half_width_ && a.points_ == b.points_ && a.staggered_ == b.staggered_;
  }

 private:
  double half_width_;
  std::size_t points_;
  bool staggered_;
  double spacing_;
};

/// Calls f(i, j, k, flat_index) over every node in storage order.
template <class F>
void for_each_node(const GridSpec& g, F&& f) {
  const std::size_t n = g.points();
  std::size_t idx = 0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i, ++idx) f(i, j, k, idx);
}

class ScalarField {
 public:
  explicit ScalarField(const GridSpec& grid) : grid_(grid), values_(grid.size(), 0.0) {}

  ScalarField(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    detail::require(values_.size() == grid_.size(), "field length must equal n^3");
    detail::require(all_finite(), "field entries must be finite");
  }

  /// Samples f(x, y, z) at every node.
  template <class F>
  static ScalarField sample(const GridSpec& grid, F&& f) {
    ScalarField out(grid);
    for_each_node(grid, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
      const auto [x, y, z] = grid.position(i, j, k);
      out.values_[idx] = f(x, y, z);
    });
    return out;
  }

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  bool all_finite() const noexcept {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  ScalarField& operator*=(double a) noexcept {
    for (double& v : values_) v *= a;
    return *this;
  }
  ScalarField& operator+=(const ScalarField& other) {
    check_same_grid(other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& other) {
    check_same_grid(other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
  }
  /// this += a * other
  ScalarField& axpy(double a, const ScalarField& other) {
    check_same_grid(other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * other.values_[i];
    return *this;
  }

  friend ScalarField operator*(double a, ScalarField f) noexcept { return f *= a; }
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }

 private:
  void check_same_grid(const ScalarField& other) const {
    detail::require(grid_ == other.grid_, "fields live on different grids");
  }

  GridSpec grid_;
  std::vector<double> values_;
};

inline double integrate(const ScalarField& f) {
  detail::CompensatedSum s;
  for (double v : f.values()) s.add(v);
  return f.grid().cell_volume() * s.value();
}

/// h^3 * sum(a * b), the discrete L2 inner product.
inline double inner_product(const ScalarField& a, const ScalarField& b) {
  detail::require(a.grid() == b.grid(), "fields live on different grids");
  detail::CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return a.grid().cell_volume() * s.value();
}

inline double l2_norm(const ScalarField& f) { return std::sqrt(inner_product(f, f)); }

/// Integral of |u|^s, s >= 1.
inline double lp_integral(const ScalarField& u, double s) {
  detail::require(std::isfinite(s) && s >= 1.0, "lp_integral requires s >= 1");
  detail::CompensatedSum acc;
  for (double v : u.values()) {
    const double a = std::abs(v);
    if (a != 0.0) acc.add(std::pow(a, s));
  }
  return u.grid().cell_volume() * acc.value();
}

/// Discrete integral of |grad u|^2: h^3 * sum over all lattice edges of the
/// squared forward difference, including the edges to the zero ghost layer.
/// Equals <u, -laplacian(u)>.
inline double dirichlet_energy(const ScalarField& u) {
  const GridSpec& g = u.grid();
  const std::size_t n = g.points();
  const std::size_t stride[3] = {1, n, n * n};
  detail::CompensatedSum acc;
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    const std::size_t coord[3] = {i, j, k};
    const double here = u[idx];
    for (int axis = 0; axis < 3; ++axis) {
      const double next = coord[axis] + 1 < n ? u[idx + stride[axis]] : 0.0;
      const double d = next - here;
      acc.add(d * d);
      if (coord[axis] == 0) acc.add(here * here);  // edge to the lower ghost
    }
  });
  return g.spacing() * acc.value();  // h^3 / h^2
}

/// 7-point Laplacian with zero ghost values outside the box.
inline ScalarField laplacian(const ScalarField& u) {
  const GridSpec& g = u.grid();
  const std::size_t n = g.points();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const std::size_t stride[3] = {1, n, n * n};
  ScalarField out(g);
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    const std::size_t coord[3] = {i, j, k};
    double s = -6.0 * u[idx];
    for (int axis = 0; axis < 3; ++axis) {
      if (coord[axis] > 0) s += u[idx - stride[axis]];
      if (coord[axis] + 1 < n) s += u[idx + stride[axis]];
    }
    out[idx] = s * inv_h2;
  });
  return out;
}

/// Nodal |grad u|^2 density: each lattice edge's squared difference is split
/// evenly between its two end nodes, and ghost edges go wholly to the boundary
/// node, so integrate(gradient_density(u)) == dirichlet_energy(u).
inline ScalarField gradient_density(const ScalarField& u) {
  const GridSpec& g = u.grid();
  const std::size_t n = g.points();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const std::size_t stride[3] = {1, n, n * n};
  ScalarField out(g);
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    const std::size_t coord[3] = {i, j, k};
    const double here = u[idx];
    double s = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      if (coord[axis] + 1 < n) {
        const double d = u[idx + stride[axis]] - here;
        s += 0.5 * d * d;
      } else {
        s += here * here;
      }
      if (coord[axis] > 0) {
        const double d = here - u[idx - stride[axis]];
        s += 0.5 * d * d;
      } else {
        s += here * here;
      }
    }
    out[idx] = s * inv_h2;
  });
  return out;
}

/// h^3 * sum of f over nodes with r <= |x| <= r + 1.
inline double annulus_integral(const ScalarField& f, double r) {
  const GridSpec& g = f.grid();
  detail::require(r >= 0.0, "annulus radius must be non-negative");
  detail::require(r + 1.0 <= g.half_width() * std::sqrt(3.0), "annulus extends beyond the box corner");
  detail::CompensatedSum acc;
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    const double rho = g.radius(i, j, k);
    if (rho >= r && rho <= r + 1.0) acc.add(f[idx]);
  });
  return g.cell_volume() * acc.value();
}

/// Fraction of integral(u^2) carried by the outermost layer of nodes.
inline double boundary_shell_fraction(const ScalarField& u) {
  const GridSpec& g = u.grid();
  const std::size_t last = g.points() - 1;
  detail::CompensatedSum shell, total;
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    const double w = u[idx] * u[idx];
    total.add(w);
    if (i == 0 || j == 0 || k == 0 || i == last || j == last || k == last) shell.add(w);
  });
  return total.value() > 0.0 ? shell.value() / total.value() : 0.0;
}

}  // namespace spgs
