// SPDX-License-Identifier: MIT
#pragma once

/// @file interp.hpp
/// @brief Cubic interpolation helpers (shape-preserving and Hermite).
///
/// Wraps Boost.Math's interpolators with two conveniences the transport
/// code needs everywhere: abscissae may be given in decreasing order (the
/// upward-map T_u is strictly decreasing), and evaluation outside the node
/// range clamps to the end values instead of throwing — callers clamp state
/// to the valid region anyway and a hard throw in the Monte Carlo inner loop
/// would be unrecoverable.
///
/// `monotone_cubic` (PCHIP) is the right tool for inverse-map tables where
/// only function values are known and monotonicity must be preserved.
/// `hermite_cubic` takes exact derivatives at the nodes and is uniformly
/// fourth-order accurate; use it whenever the derivative is available in
/// closed form (PCHIP's one-sided, shape-limited end slopes are only
/// first-order accurate in the end spacing, which is visible when a dual
/// potential is finite-differenced near the band edge).

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

// fpclassify must precede the interpolators: they call isnan unqualified
// and rely on boost::math::isnan being visible in an enclosing namespace.
#include <boost/math/special_functions/fpclassify.hpp>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "smot/errors.hpp"

namespace smot {

class monotone_cubic {
 public:
  monotone_cubic(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 4) {
      throw validation_error(
          "monotone_cubic: need at least 4 nodes with matching ordinates");
    }
    if (xs.front() > xs.back()) {
      // Negating the abscissae alone restores increasing order while
      // keeping every (x, y) pair intact.
      negated_ = true;
      for (double& v : xs) v = -v;
    }
    lo_ = xs.front();
    hi_ = xs.back();
    y_lo_ = ys.front();
    y_hi_ = ys.back();
    spline_.emplace(std::move(xs), std::move(ys));
  }

  [[nodiscard]] double operator()(double x) const {
    if (negated_) x = -x;
    if (x <= lo_) return y_lo_;
    if (x >= hi_) return y_hi_;
    return (*spline_)(x);
  }

  [[nodiscard]] double derivative(double x) const {
    if (negated_) x = -x;
    if (x <= lo_ || x >= hi_) return 0.0;
    const double d = spline_->prime(x);
    return negated_ ? -d : d;
  }

  [[nodiscard]] double x_min() const { return negated_ ? -hi_ : lo_; }
  [[nodiscard]] double x_max() const { return negated_ ? -lo_ : hi_; }

 private:
  // std::optional defers construction so the constructor can normalize the
  // node order first (boost's pchip has no default constructor).
  std::optional<boost::math::interpolators::pchip<std::vector<double>>>
      spline_;
  double lo_ = 0.0, hi_ = 0.0, y_lo_ = 0.0, y_hi_ = 0.0;
  bool negated_ = false;
};

/// Piecewise-cubic Hermite interpolant with caller-supplied derivatives.
/// Abscissae must be strictly increasing; evaluation clamps to the end
/// values outside the node range (derivative reports 0 there).
class hermite_cubic {
 public:
  hermite_cubic(std::vector<double> xs, std::vector<double> ys,
                std::vector<double> dydx) {
    if (xs.size() != ys.size() || xs.size() != dydx.size() || xs.size() < 2) {
      throw validation_error(
          "hermite_cubic: need at least 2 nodes with matching ordinates "
          "and derivatives");
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
      if (!(xs[i] > xs[i - 1])) {
        throw validation_error(
            "hermite_cubic: abscissae must be strictly increasing");
      }
    }
    lo_ = xs.front();
    hi_ = xs.back();
    y_lo_ = ys.front();
    y_hi_ = ys.back();
    spline_.emplace(std::move(xs), std::move(ys), std::move(dydx));
  }

  [[nodiscard]] double operator()(double x) const {
    if (x <= lo_) return y_lo_;
    if (x >= hi_) return y_hi_;
    return (*spline_)(x);
  }

  [[nodiscard]] double derivative(double x) const {
    if (x < lo_ || x > hi_) return 0.0;  // flat continuation outside
    return spline_->prime(x);
  }

  [[nodiscard]] double x_min() const { return lo_; }
  [[nodiscard]] double x_max() const { return hi_; }

 private:
  std::optional<
      boost::math::interpolators::cubic_hermite<std::vector<double>>>
      spline_;
  double lo_ = 0.0, hi_ = 0.0, y_lo_ = 0.0, y_hi_ = 0.0;
};

}  // namespace smot
