#pragma once

// External potentials V and the checks on them.
//
// Supported classes:
//   constant          V = V1
//   coulomb_singular  V = V1 - lambda |x|^-alpha, alpha in {1, 2}
//   composite         V = base - lambda V2, V2 >= 0 decaying (Gaussian
//                     exp(-|x|^2 / w^2) or a sampled field)
//   tabulated         V given on the grid

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "spgs/error.hpp"
#include "spgs/grid.hpp"
#include "spgs/random_fields.hpp"

namespace spgs {

enum class PotentialKind { constant, coulomb_singular, composite, tabulated };

inline std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::constant: return "constant";
    case PotentialKind::coulomb_singular: return "coulomb";
    case PotentialKind::composite: return "composite";
    case PotentialKind::tabulated: return "tabulated";
  }
  return "unknown";
}

/// Decaying well profile exp(-|x|^2 / width^2).
struct GaussianProfile {
  double width = 1.0;
  double operator()(double x, double y, double z) const noexcept {
    return std::exp(-(x * x + y * y + z * z) / (width * width));
  }
};

using Perturbation = std::variant<GaussianProfile, ScalarField>;

class Potential {
 public:
  static Potential constant(double v1) {
    detail::require(std::isfinite(v1), "V1 must be finite");
    Potential p(PotentialKind::constant);
    p.v1_ = v1;
    return p;
  }

  static Potential coulomb(double v1, double lambda, int alpha) {
    detail::require(std::isfinite(v1), "V1 must be finite");
    detail::require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    detail::require(alpha == 1 || alpha == 2, "alpha must be 1 or 2");
    Potential p(PotentialKind::coulomb_singular);
    p.v1_ = v1;
    p.lambda_ = lambda;
    p.alpha_ = alpha;
    return p;
  }

  static Potential composite(const Potential& base, double lambda, Perturbation perturbation) {
    detail::require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    detail::require(base.kind_ != PotentialKind::tabulated, "composite base must be analytic");
    if (const auto* g = std::get_if<GaussianProfile>(&perturbation)) {
      detail::require(std::isfinite(g->width) && g->width > 0.0, "perturbation width must be positive");
    }
    Potential p(PotentialKind::composite);
    p.lambda_ = lambda;
    p.base_ = std::make_shared<const Potential>(base);
    p.perturbation_ = std::move(perturbation);
    return p;
  }

  static Potential tabulated(ScalarField table) {
    Potential p(PotentialKind::tabulated);
    p.table_ = std::make_shared<const ScalarField>(std::move(table));
    return p;
  }

  PotentialKind kind() const noexcept { return kind_; }
  double v1() const noexcept { return v1_; }
  double lambda() const noexcept { return lambda_; }
  int alpha() const noexcept { return alpha_; }
  const Potential* base() const noexcept { return base_.get(); }
  const ScalarField* table() const noexcept { return table_.get(); }
  const std::optional<Perturbation>& perturbation() const noexcept { return perturbation_; }

  /// True when V has a |x|^-alpha term, so it must not be sampled at the origin.
  bool is_singular() const noexcept {
    if (kind_ == PotentialKind::coulomb_singular) return true;
    return kind_ == PotentialKind::composite && base_->is_singular();
  }

  /// Constant and Coulomb potentials depend on |x| only.
  bool is_radial() const noexcept {
    return kind_ == PotentialKind::constant || kind_ == PotentialKind::coulomb_singular;
  }

  /// V at radius r > 0; radial kinds only.
  double radial_value(double r) const {
    switch (kind_) {
      case PotentialKind::constant: return v1_;
      case PotentialKind::coulomb_singular:
        return v1_ - lambda_ * (alpha_ == 1 ? 1.0 / r : 1.0 / (r * r));
      default: throw Error(ErrorCode::invalid_argument, "potential is not radial");
    }
  }

  /// V at a point; analytic kinds only.
  double value_at(double x, double y, double z) const {
    switch (kind_) {
      case PotentialKind::constant: return v1_;
      case PotentialKind::coulomb_singular: return radial_value(std::sqrt(x * x + y * y + z * z));
      case PotentialKind::composite: {
        const auto* g = std::get_if<GaussianProfile>(&*perturbation_);
        if (!g) throw Error(ErrorCode::invalid_argument, "sampled perturbation has no pointwise form");
        return base_->value_at(x, y, z) - lambda_ * (*g)(x, y, z);
      }
      case PotentialKind::tabulated: break;
    }
    throw Error(ErrorCode::invalid_argument, "tabulated potential has no pointwise form");
  }

 private:
  explicit Potential(PotentialKind kind) : kind_(kind) {}

  PotentialKind kind_;
  double v1_ = 0.0;
  double lambda_ = 0.0;
  int alpha_ = 1;
  std::shared_ptr<const Potential> base_;
  std::optional<Perturbation> perturbation_;
  std::shared_ptr<const ScalarField> table_;
};

/// Nodewise V. Singular kinds need a staggered grid; sampled parts must live
/// on `g`.
inline ScalarField sample_potential(const Potential& V, const GridSpec& g) {
  if (V.is_singular()) {
    detail::require(g.staggered(), "singular potentials need a staggered grid");
  }
  switch (V.kind()) {
    case PotentialKind::tabulated:
      detail::require(V.table()->grid() == g, "tabulated potential lives on a different grid");
      return *V.table();
    case PotentialKind::composite:
      if (const auto* field = std::get_if<ScalarField>(&*V.perturbation())) {
        detail::require(field->grid() == g, "perturbation field lives on a different grid");
        ScalarField out = sample_potential(*V.base(), g);
        out.axpy(-V.lambda(), *field);
        return out;
      }
      [[fallthrough]];
    default:
      return ScalarField::sample(g, [&](double x, double y, double z) { return V.value_at(x, y, z); });
  }
}

struct AsymptoticLevel {
  double value;
  bool approximate;  // tabulated: outer-shell mean instead of a liminf
};

inline AsymptoticLevel asymptotic_level(const Potential& V) {
  switch (V.kind()) {
    case PotentialKind::constant:
    case PotentialKind::coulomb_singular: return {V.v1(), false};
    case PotentialKind::composite: return asymptotic_level(*V.base());
    case PotentialKind::tabulated: {
      const ScalarField& t = *V.table();
      const std::size_t last = t.grid().points() - 1;
      detail::CompensatedSum acc;
      std::size_t count = 0;
      for_each_node(t.grid(), [&](std::size_t i, std::size_t j, std::size_t k, std::size_t idx) {
        if (i == 0 || j == 0 || k == 0 || i == last || j == last || k == last) {
          acc.add(t[idx]);
          ++count;
        }
      });
      return {acc.value() / static_cast<double>(count), true};
    }
  }
  return {0.0, true};
}

/// V_inf = liminf_{|x| -> inf} V.
inline double v_infinity(const Potential& V) { return asymptotic_level(V).value; }

/// (int |grad u|^2 + V u^2) / (int |grad u|^2 + u^2).
inline double rayleigh_quotient(const ScalarField& u, const ScalarField& potential_values) {
  const double grad = dirichlet_energy(u);
  detail::CompensatedSum pot, mass;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = u[i] * u[i];
    pot.add(potential_values[i] * w);
    mass.add(w);
  }
  const double dv = u.grid().cell_volume();
  return (grad + dv * pot.value()) / (grad + dv * mass.value());
}

struct CoercivityEstimate {
  double bound;  // smallest sampled quotient, an estimate of the coercivity constant
  bool ok;       // bound > 0
};

/// Smallest Rayleigh quotient over `trials` draws of RandomFieldFamily(seed).
/// A negative bound means the quadratic form is indefinite at this coupling.
inline CoercivityEstimate coercivity_check(const Potential& V, const GridSpec& g, std::size_t trials,
                                           std::uint64_t seed) {
  detail::require(trials >= 1, "coercivity_check needs at least one trial");
  const ScalarField values = sample_potential(V, g);
  RandomFieldFamily family(seed);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) best = std::min(best, rayleigh_quotient(family.next(g), values));
  return {best, best > 0.0};
}

/// Fraction of nodes where V < V_inf - 1e-12; a discrete stand-in for V
/// lying strictly below its limit on a set of positive measure.
inline double below_limit_fraction(const Potential& V, const GridSpec& g) {
  const ScalarField values = sample_potential(V, g);
  const double limit = v_infinity(V) - 1e-12;
  std::size_t count = 0;
  for (double v : values.values())
    if (v < limit) ++count;
  return static_cast<double>(count) / static_cast<double>(values.size());
}

}  // namespace spgs
