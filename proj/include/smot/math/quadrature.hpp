// SPDX-License-Identifier: MIT
#pragma once

/// @file quadrature.hpp
/// @brief Adaptive integration front end (Gauss–Kronrod G7/K15).
///
/// Thin wrapper over Boost.Math's adaptive Gauss–Kronrod scheme. Infinite or
/// semi-infinite intervals are handled by the backend's built-in variable
/// substitution, so callers may pass ±infinity directly.

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "smot/errors.hpp"

namespace smot {

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// Default absolute tolerance for mass/mean integrals.
inline constexpr double tol_quad = 1e-9;

/// Integrate f over (a, b), a and/or b possibly infinite. Throws
/// convergence_error if the backend's error estimate stays far above the
/// requested tolerance (the estimate is conservative, hence the slack
/// factor).
template <class F>
[[nodiscard]] double integrate(F&& f, double a, double b,
                               double tol = tol_quad) {
  if (a == b) return 0.0;
  using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  const double v = gk::integrate(std::forward<F>(f), a, b, 15, tol, &err);
  const double bound = 1e4 * tol * std::fmax(1.0, std::fabs(v));
  if (!(err <= bound) || std::isnan(v)) {
    std::ostringstream os;
    os.precision(17);
    os << "integrate: error estimate " << err << " exceeds " << bound
       << " on (" << a << ", " << b << "), value " << v;
    throw convergence_error(os.str());
  }
  return v;
}

struct quad_result {
  double value = 0.0;
  double error = 0.0;  ///< backend error estimate (conservative)
};

/// Non-throwing variant of integrate: returns the value together with the
/// backend's error estimate and leaves the accept/reject decision to the
/// caller (used where a degraded estimate should surface as a warning
/// rather than abort a long-running computation).  Cap `max_depth` when the
/// integrand is piecewise smooth with many tiny curvature kinks (spline
/// tables): full-depth adaptive refinement chases the kinks at enormous
/// cost for no accuracy gain.
template <class F>
[[nodiscard]] quad_result integrate_with_error(F&& f, double a, double b,
                                               double tol = tol_quad,
                                               int max_depth = 15) {
  if (a == b) return {};
  using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
  quad_result r;
  r.value = gk::integrate(std::forward<F>(f), a, b,
                          static_cast<unsigned>(max_depth), tol, &r.error);
  return r;
}

}  // namespace smot
