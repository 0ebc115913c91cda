#pragma once

// Free-space Green's function of the 7-point Laplacian on the unit cubic
// lattice: the G with
//
//   6 G(m) - sum_{|e|=1} G(m + e) = delta_{m,0},   G(m) -> 0 as |m| -> inf.
//
// G(m) ~ 1/(4 pi |m|) far from the origin, and G(0) is Watson's constant.
// Values come from
//
//   G(a, b, c) = int_0^inf e^{-6t} I_a(2t) I_b(2t) I_c(2t) dt
//
// evaluated by exp-sinh quadrature on a fixed node set shared by all offsets.
// The step 1/16 on s in [-4.5, 4.5] resolves offsets up to a few hundred to
// rounding level.

#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "spgs/error.hpp"

namespace spgs::lattice {

inline constexpr std::size_t max_extent = 128;

/// e^{-x} I_k(x) for k = 0 .. out.size()-1, x > 0.
inline void scaled_bessel_i(double x, std::span<double> out) {
  const std::size_t count = out.size();
  if (count == 0) return;
  if (x >= 1.0) {
    gsl_sf_bessel_In_scaled_array(0, static_cast<int>(count - 1), x, out.data());
    return;
  }
  // power series; the GSL array routine flushes small arguments to zero
  const double half = 0.5 * x;
  const double q = half * half;
  const double damp = std::exp(-x);
  for (std::size_t k = 0; k < count; ++k) {
    const double kd = static_cast<double>(k);
    double term = std::exp(kd * std::log(half) - std::lgamma(kd + 1.0));
    double sum = term;
    for (int j = 1; j < 60 && term > 1e-18 * sum; ++j) {
      term *= q / (static_cast<double>(j) * (static_cast<double>(j) + kd));
      sum += term;
    }
    out[k] = damp * sum;
  }
}

/// G(a, b, c) for 0 <= a, b, c < extent, stored once per sorted triple.
class GreenTable {
 public:
  explicit GreenTable(std::size_t extent) : extent_(extent) {
    detail::require(extent >= 1 && extent <= max_extent, "lattice Green table extent out of range");
    values_.assign(slot(extent - 1, extent - 1, extent - 1) + 1, 0.0);

    constexpr double step = 1.0 / 32.0;
    constexpr int half_nodes = 144;  // s in [-4.5, 4.5]
    std::vector<double> bessel(extent);
    for (int node = -half_nodes; node <= half_nodes; ++node) {
      const double s = step * node;
      const double t = std::exp(0.5 * std::numbers::pi * std::sinh(s));
      const double weight = step * 0.5 * std::numbers::pi * std::cosh(s) * t;
      scaled_bessel_i(2.0 * t, bessel);
      std::size_t idx = 0;
      for (std::size_t a = 0; a < extent; ++a) {
        const double wa = weight * bessel[a];
        for (std::size_t b = 0; b <= a; ++b) {
          const double wab = wa * bessel[b];
          for (std::size_t c = 0; c <= b; ++c, ++idx) values_[idx] += wab * bessel[c];
        }
      }
    }
  }

  std::size_t extent() const noexcept { return extent_; }

  /// G at lattice offset (a, b, c); signs do not matter.
  double operator()(long a, long b, long c) const noexcept {
    std::size_t x = static_cast<std::size_t>(a < 0 ? -a : a);
    std::size_t y = static_cast<std::size_t>(b < 0 ? -b : b);
    std::size_t z = static_cast<std::size_t>(c < 0 ? -c : c);
    if (x < y) std::swap(x, y);
    if (y < z) std::swap(y, z);
    if (x < y) std::swap(x, y);
    return values_[slot(x, y, z)];
  }

 private:
  // requires a >= b >= c
  static std::size_t slot(std::size_t a, std::size_t b, std::size_t c) noexcept {
    return a * (a + 1) * (a + 2) / 6 + b * (b + 1) / 2 + c;
  }

  std::size_t extent_;
  std::vector<double> values_;
};

/// Shared table covering offsets below `extent`.
inline std::shared_ptr<const GreenTable> green_table(std::size_t extent) {
  static std::mutex m;
  static std::map<std::size_t, std::shared_ptr<const GreenTable>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[extent];
  if (!slot) slot = std::make_shared<const GreenTable>(extent);
  return slot;
}

}  // namespace spgs::lattice
