#pragma once

// Free-space solution of -Delta phi = u^2 and the nonlocal energy int phi u^2.
//
// phi is the discrete convolution of u^2 with the lattice Green's function of
// the 7-point Laplacian (spgs/lattice_green.hpp), scaled to spacing h:
//
//   phi(x) = h^3 sum_y G_h(x - y) u^2(y),   G_h(m h) = G(m) / h.
//
// G_h behaves like 1/(4 pi |x - y|) away from the diagonal and makes
// -laplacian(phi) == u^2 hold on every node up to rounding. The convolution
// is done by zero padding to (2n)^3 and FFT, or by direct summation on small
// grids; both routes use the same kernel table.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "spgs/error.hpp"
#include "spgs/fft.hpp"
#include "spgs/grid.hpp"
#include "spgs/lattice_green.hpp"

namespace spgs {

enum class PoissonMethod { automatic, fast_convolution, direct_summation };

struct NonlocalSolve {
  ScalarField phi;
  PoissonMethod method;
  /// Normalisation of the continuum Green kernel 1/(4 pi |x - y|).
  static constexpr double kernel_constant = 1.0 / (4.0 * std::numbers::pi);
};

inline constexpr double poisson_tolerance = 1e-8;
inline constexpr std::size_t direct_summation_limit = 24;
inline constexpr std::size_t automatic_direct_limit = 12;
inline constexpr std::size_t oracle_limit = 24;

/// Spectrum of the zero-padded lattice kernel for an n^3 grid, in lattice
/// units. Real because the kernel is even in every axis.
class FreeSpaceKernel {
 public:
  explicit FreeSpaceKernel(std::size_t n) : n_(n), transform_(&fft::cached<fft::RealCubeTransform>(2 * n)) {
    const auto table = lattice::green_table(n);
    const std::size_t m = 2 * n;
    fft::RealBuffer padded(transform_->real_size());
    auto offset = [&](std::size_t i) -> long { return i < n ? static_cast<long>(i) : static_cast<long>(m - i); };
    std::size_t idx = 0;
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < m; ++i, ++idx) {
          // offset n never pairs two nodes of an n-point axis
          if (i == n || j == n || k == n) continue;
          padded[idx] = (*table)(offset(i), offset(j), offset(k));
        }
    fft::ComplexBuffer spectrum(transform_->complex_size());
    transform_->forward(padded, spectrum);
    spectrum_.resize(spectrum.size());
    for (std::size_t c = 0; c < spectrum.size(); ++c) spectrum_[c] = spectrum[c][0];
  }

  std::size_t points() const noexcept { return n_; }
  const fft::RealCubeTransform& transform() const noexcept { return *transform_; }
  const std::vector<double>& spectrum() const noexcept { return spectrum_; }

 private:
  std::size_t n_;
  const fft::RealCubeTransform* transform_;
  std::vector<double> spectrum_;
};

inline const FreeSpaceKernel& free_space_kernel(std::size_t n) {
  static std::mutex m;
  static std::map<std::size_t, std::unique_ptr<FreeSpaceKernel>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<FreeSpaceKernel>(n);
  return *slot;
}

namespace detail {

inline ScalarField convolve_fft(const ScalarField& density) {
  const GridSpec& g = density.grid();
  const std::size_t n = g.points();
  const std::size_t m = 2 * n;
  const FreeSpaceKernel& kernel = free_space_kernel(n);
  const auto& transform = kernel.transform();

  fft::RealBuffer padded(transform.real_size());
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) padded[i + m * (j + m * k)] = density[g.index(i, j, k)];

  fft::ComplexBuffer spectrum(transform.complex_size());
  transform.forward(padded, spectrum);
  // h^3 * (1/h) from the kernel scaling, 1/m^3 from the unnormalised inverse
  const double scale = g.spacing() * g.spacing() / static_cast<double>(transform.real_size());
  const auto& ks = kernel.spectrum();
  for (std::size_t c = 0; c < spectrum.size(); ++c) {
    const double f = ks[c] * scale;
    spectrum[c][0] *= f;
    spectrum[c][1] *= f;
  }
  transform.backward(spectrum, padded);

  ScalarField out(g);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) out[g.index(i, j, k)] = padded[i + m * (j + m * k)];
  return out;
}

inline ScalarField convolve_direct(const ScalarField& density) {
  const GridSpec& g = density.grid();
  const std::size_t n = g.points();
  detail::require(n <= direct_summation_limit, "direct summation is limited to n <= 24");
  const auto table = lattice::green_table(n);
  std::vector<double> cube(n * n * n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t a = 0; a < n; ++a)
        cube[a + n * (b + n * c)] = (*table)(static_cast<long>(a), static_cast<long>(b), static_cast<long>(c));

  const double h2 = g.spacing() * g.spacing();
  auto dist = [](std::size_t p, std::size_t q) { return p > q ? p - q : q - p; };
  ScalarField out(g);
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    CompensatedSum acc;
    for_each_node(g, [&](std::size_t a, std::size_t b, std::size_t c, std::size_t src) {
      const double rho = density[src];
      if (rho != 0.0) acc.add(cube[dist(i, a) + n * (dist(j, b) + n * dist(k, c))] * rho);
    });
    out[idx] = h2 * acc.value();
  });
  return out;
}

inline ScalarField square(const ScalarField& u) {
  ScalarField out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * u[i];
  return out;
}

}  // namespace detail

/// phi_u for the density u^2.
inline NonlocalSolve solve_phi(const ScalarField& u, PoissonMethod method = PoissonMethod::automatic) {
  detail::require(u.all_finite(), "solve_phi needs a finite field");
  if (method == PoissonMethod::automatic) {
    method = u.grid().points() <= automatic_direct_limit ? PoissonMethod::direct_summation
                                                         : PoissonMethod::fast_convolution;
  }
  const ScalarField density = detail::square(u);
  ScalarField phi = method == PoissonMethod::direct_summation ? detail::convolve_direct(density)
                                                              : detail::convolve_fft(density);
  return NonlocalSolve{std::move(phi), method};
}

/// int phi u^2.
inline double nonlocal_energy(const ScalarField& u, const ScalarField& phi) {
  detail::require(u.grid() == phi.grid(), "fields live on different grids");
  detail::CompensatedSum acc;
  for (std::size_t i = 0; i < u.size(); ++i) acc.add(phi[i] * u[i] * u[i]);
  return u.grid().cell_volume() * acc.value();
}

/// ||-laplacian(phi) - u^2|| / ||u^2|| over nodes not touching the boundary.
inline double poisson_residual(const ScalarField& u, const ScalarField& phi) {
  const GridSpec& g = u.grid();
  const std::size_t last = g.points() - 1;
  const ScalarField lap = laplacian(phi);
  detail::CompensatedSum res, ref;
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    if (i == 0 || j == 0 || k == 0 || i == last || j == last || k == last) return;
    const double rho = u[idx] * u[idx];
    const double r = -lap[idx] - rho;
    res.add(r * r);
    ref.add(rho * rho);
  });
  return ref.value() > 0.0 ? std::sqrt(res.value() / ref.value()) : std::sqrt(res.value());
}

namespace detail {

struct GaussLegendre {
  std::vector<double> nodes, weights;
};

/// Gauss-Legendre rule on [-1, 1].
inline GaussLegendre gauss_legendre(int order) {
  GaussLegendre rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace detail

/// Mean of 1/|xi| over the unit cube centred at the origin.
///
/// Splitting the cube into six pyramids with apex at the centre reduces it to
/// (3/2) * int_{[-1/2,1/2]^2} (1/4 + y^2 + z^2)^{-1/2} dy dz, whose integrand
/// is analytic on the square; a 48-point product Gauss rule is exact to
/// rounding.
inline double self_cell_constant() {
  static const double value = [] {
    const auto rule = detail::gauss_legendre(48);
    detail::CompensatedSum acc;
    for (std::size_t a = 0; a < rule.nodes.size(); ++a)
      for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
        const double y = 0.5 * rule.nodes[a];
        const double z = 0.5 * rule.nodes[b];
        acc.add(0.25 * rule.weights[a] * rule.weights[b] / std::sqrt(0.25 + y * y + z * z));
      }
    return 1.5 * acc.value();
  }();
  return value;
}

/// Direct Coulomb double sum
///
///   h^6 sum_{x in Omega} sum_{y != x} u^2(x) u^2(y) / |x - y|
///     + h^5 c0 sum_{x in Omega} u^4(x),
///
/// with Omega = {|x| <= region_radius} and c0 = self_cell_constant() standing
/// in for the excluded diagonal. Approximates int_Omega int u^2 u^2/|x-y|,
/// which is 4 pi int_Omega phi_u u^2. O(N^2), so limited to n <= 24.
inline double double_integral_oracle(const ScalarField& u,
                                     double region_radius = std::numeric_limits<double>::infinity()) {
  const GridSpec& g = u.grid();
  const std::size_t n = g.points();
  detail::require(n <= oracle_limit, "double_integral_oracle is limited to n <= 24");
  const ScalarField rho = detail::square(u);

  std::vector<double> inv_dist(n * n * n, 0.0);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t a = 0; a < n; ++a)
        if (a + b + c > 0)
          inv_dist[a + n * (b + n * c)] = 1.0 / std::sqrt(static_cast<double>(a * a + b * b + c * c));

  const double c0 = self_cell_constant();
  auto dist = [](std::size_t p, std::size_t q) { return p > q ? p - q : q - p; };
  detail::CompensatedSum total;
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    if (rho[idx] == 0.0 || g.radius(i, j, k) > region_radius) return;
    detail::CompensatedSum inner;
    for_each_node(g, [&](std::size_t a, std::size_t b, std::size_t c, std::size_t src) {
      if (src == idx) return;
      inner.add(rho[src] * inv_dist[dist(i, a) + n * (dist(j, b) + n * dist(k, c))]);
    });
    inner.add(c0 * rho[idx]);
    total.add(rho[idx] * inner.value());
  });
  const double h = g.spacing();
  return h * h * h * h * h * total.value();
}

/// int_{|x| <= radius} phi u^2, the left side of the oracle relation.
inline double nonlocal_energy_in_ball(const ScalarField& u, const ScalarField& phi, double radius) {
  const GridSpec& g = u.grid();
  detail::CompensatedSum acc;
  for_each_node(g, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
    if (g.radius(i, j, k) <= radius) acc.add(phi[idx] * u[idx] * u[idx]);
  });
  return g.cell_volume() * acc.value();
}

}  // namespace spgs
