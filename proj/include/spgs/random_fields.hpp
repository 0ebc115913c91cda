#pragma once

// Seeded smooth test fields.
//
// Draw k of a family cycles through two shapes:
//   k % 3 != 2  sum of 1-3 Gaussian blobs exp(-|x - c|^2 / w^2); each centre is
//               the origin with probability 1/2, otherwise uniform in
//               [-L/3, L/3]^3; widths are log-uniform in [a h, max(L/4, 1.5 a h)]
//               with a = min_width_cells (default 1.5); amplitudes uniform
//               in [0.5, 2].
//   k % 3 == 2  low-frequency mixture of box sine modes
//               sin(a pi (x+L)/2L) sin(b pi (y+L)/2L) sin(c pi (z+L)/2L),
//               a, b, c in 1..3, coefficients N(0,1)/(a b c).
// A family is reproducible: the same seed yields the same sequence of fields.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "spgs/grid.hpp"

namespace spgs {

class RandomFieldFamily {
 public:
  explicit RandomFieldFamily(std::uint64_t seed, double min_width_cells = 1.5)
      : rng_(seed), min_width_cells_(min_width_cells) {}

  ScalarField next(const GridSpec& g) {
    const std::uint64_t k = draws_++;
    return k % 3 == 2 ? sine_mixture(g) : blobs(g);
  }

  ScalarField blobs(const GridSpec& g) {
    const double L = g.half_width();
    std::uniform_int_distribution<int> count_dist(1, 3);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_real_distribution<double> centre_dist(-L / 3.0, L / 3.0);
    const double narrow = min_width_cells_ * g.spacing();
    std::uniform_real_distribution<double> log_width(std::log(narrow), std::log(std::max(0.25 * L, 1.5 * narrow)));
    std::uniform_real_distribution<double> amp_dist(0.5, 2.0);

    struct Blob {
      double cx, cy, cz, inv_w2, amp;
    };
    const int count = count_dist(rng_);
    std::vector<Blob> list;
    for (int b = 0; b < count; ++b) {
      Blob blob{0.0, 0.0, 0.0, 0.0, 0.0};
      if (coin(rng_) >= 0.5) {
        blob.cx = centre_dist(rng_);
        blob.cy = centre_dist(rng_);
        blob.cz = centre_dist(rng_);
      }
      const double w = std::exp(log_width(rng_));
      blob.inv_w2 = 1.0 / (w * w);
      blob.amp = amp_dist(rng_);
      list.push_back(blob);
    }
    return ScalarField::sample(g, [&](double x, double y, double z) {
      double v = 0.0;
      for (const Blob& b : list) {
        const double dx = x - b.cx, dy = y - b.cy, dz = z - b.cz;
        v += b.amp * std::exp(-(dx * dx + dy * dy + dz * dz) * b.inv_w2);
      }
      return v;
    });
  }

  ScalarField sine_mixture(const GridSpec& g) {
    const double L = g.half_width();
    std::normal_distribution<double> normal(0.0, 1.0);
    double coeff[3][3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) coeff[a][b][c] = normal(rng_) / ((a + 1.0) * (b + 1.0) * (c + 1.0));
    const double k0 = std::numbers::pi / (2.0 * L);
    return ScalarField::sample(g, [&](double x, double y, double z) {
      double sx[3], sy[3], sz[3];
      for (int m = 0; m < 3; ++m) {
        sx[m] = std::sin((m + 1) * k0 * (x + L));
        sy[m] = std::sin((m + 1) * k0 * (y + L));
        sz[m] = std::sin((m + 1) * k0 * (z + L));
      }
      double v = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c) v += coeff[a][b][c] * sx[a] * sy[b] * sz[c];
      return v;
    });
  }

  std::mt19937_64& engine() noexcept { return rng_; }

 private:
  std::mt19937_64 rng_;
  double min_width_cells_;
  std::uint64_t draws_ = 0;
};

}  // namespace spgs
