// SPDX-License-Identifier: MIT
#pragma once

/// @file normal.hpp
/// @brief Standard normal density, CDF, and quantile.

#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace smot {

inline double norm_pdf(double z) {
  static constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double norm_cdf(double z) {
  static constexpr double inv_sqrt2 = 0.7071067811865475244;
  return 0.5 * std::erfc(-z * inv_sqrt2);
}

inline double norm_quantile(double p) {
  static const boost::math::normal_distribution<double> n01(0.0, 1.0);
  return boost::math::quantile(n01, p);
}

}  // namespace smot
