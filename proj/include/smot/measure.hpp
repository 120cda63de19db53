// SPDX-License-Identifier: MIT
#pragma once

/// @file measure.hpp
/// @brief One-dimensional probability measures with densities.
///
/// A `measure` bundles the handful of functionals the transport solvers need:
/// CDF, density, quantile, and the upper partial ("tail") mean
/// ∫_y^r z dμ. Families provide closed forms for all of these, which keeps
/// the coupling equations quadrature-free on the hot paths.

#include <algorithm>
#include <functional>
#include <string>
#include <utility>

#include "smot/errors.hpp"
#include "smot/math/quadrature.hpp"

namespace smot {

/// Quantile arguments are clamped to this range so that inverse-CDF lookups
/// stay inside a bounded root-finding domain even for unbounded supports.
inline constexpr double quantile_clip = 1e-12;

class measure {
 public:
  using real_fn = std::function<double(double)>;

  measure(std::string name, real_fn cdf, real_fn pdf, real_fn quantile,
          real_fn tail_mean, double lower, double upper, double mean,
          double mass = 1.0)
      : name_(std::move(name)),
        cdf_(std::move(cdf)),
        pdf_(std::move(pdf)),
        quantile_(std::move(quantile)),
        tail_mean_(std::move(tail_mean)),
        lower_(lower),
        upper_(upper),
        mean_(mean),
        mass_(mass) {
    if (!(lower_ < upper_)) {
      throw validation_error("measure '" + name_ + "': empty support");
    }
  }

  [[nodiscard]] double cdf(double x) const { return cdf_(x); }
  [[nodiscard]] double pdf(double x) const { return pdf_(x); }

  [[nodiscard]] double quantile(double u) const {
    u = std::clamp(u, quantile_clip, 1.0 - quantile_clip);
    return quantile_(u);
  }

  /// ∫_y^upper z dμ(z); equals mean() for y ≤ lower and 0 for y ≥ upper.
  [[nodiscard]] double tail_mean(double y) const {
    if (y <= lower_) return mean_;
    if (y >= upper_) return 0.0;
    return tail_mean_(y);
  }

  [[nodiscard]] double lower() const { return lower_; }
  [[nodiscard]] double upper() const { return upper_; }
  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double mass() const { return mass_; }
  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  std::string name_;
  real_fn cdf_, pdf_, quantile_, tail_mean_;
  double lower_, upper_, mean_, mass_;
};

/// Price of the put (k − Z)⁺ under m — the test functions generating the
/// convex-decreasing order.
[[nodiscard]] inline double put_price(const measure& m, double k) {
  // E[(k − Z)⁺] = k·F(k) − ∫_{ℓ}^{k} z dμ.
  const double lower_mean = m.mean() - m.tail_mean(k);
  return k * m.cdf(k) - lower_mean;
}

}  // namespace smot
