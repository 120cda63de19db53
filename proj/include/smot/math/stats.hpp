// SPDX-License-Identifier: MIT
#pragma once

/// @file stats.hpp
/// @brief Sample statistics used by the validation suites: moments,
///        Kolmogorov–Smirnov distance, Wasserstein-1 distance, binned
///        conditional means.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "smot/errors.hpp"

namespace smot {

struct moments {
  double mean = 0.0;
  double var = 0.0;  ///< unbiased sample variance
  std::size_t n = 0;
};

inline moments sample_moments(const std::vector<double>& xs) {
  moments m;
  m.n = xs.size();
  if (m.n == 0) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / static_cast<double>(m.n);
  if (m.n > 1) {
    double ss = 0.0;
    for (double x : xs) {
      const double d = x - m.mean;
      ss += d * d;
    }
    m.var = ss / static_cast<double>(m.n - 1);
  }
  return m;
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `sample` and a
/// reference CDF.
template <class Cdf>
[[nodiscard]] double ks_distance(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty()) throw validation_error("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::fmax(d, std::fabs(F - static_cast<double>(i) / n));
    d = std::fmax(d, std::fabs(static_cast<double>(i + 1) / n - F));
  }
  return d;
}

/// Wasserstein-1 distance between two empirical distributions (possibly of
/// different sizes), computed as the area between the empirical CDFs.
[[nodiscard]] inline double wasserstein1(std::vector<double> a,
                                         std::vector<double> b) {
  if (a.empty() || b.empty()) throw validation_error("wasserstein1: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double w = 0.0;
  double last = std::fmin(a.front(), b.front());
  while (i < a.size() || j < b.size()) {
    const double fa = static_cast<double>(i) / na;
    const double fb = static_cast<double>(j) / nb;
    double next;
    if (i < a.size() && (j == b.size() || a[i] <= b[j])) {
      next = a[i];
    } else {
      next = b[j];
    }
    w += std::fabs(fa - fb) * (next - last);
    while (i < a.size() && a[i] == next) ++i;
    while (j < b.size() && b[j] == next) ++j;
    last = next;
  }
  return w;
}

struct bin_stat {
  double lo = 0.0;
  double hi = 0.0;
  double mean = 0.0;  ///< mean of y over the bin
  double se = 0.0;    ///< standard error of that mean
  std::size_t count = 0;
};

/// Conditional means of y given x in equally spaced bins spanning the data
/// range of x. Used for the binned supermartingale drift check
/// E[Y − X | X ∈ bin] ≤ 3·SE.
inline std::vector<bin_stat> binned_mean(const std::vector<double>& x,
                                         const std::vector<double>& y,
                                         int nbins) {
  if (x.size() != y.size() || x.empty() || nbins < 1) {
    throw validation_error("binned_mean: bad input sizes");
  }
  const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *mn_it, hi = *mx_it;
  const double width = (hi > lo) ? (hi - lo) : 1.0;
  std::vector<bin_stat> bins(static_cast<std::size_t>(nbins));
  std::vector<double> sum(bins.size(), 0.0), sum2(bins.size(), 0.0);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    bins[k].lo = lo + width * static_cast<double>(k) / nbins;
    bins[k].hi = lo + width * static_cast<double>(k + 1) / nbins;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto k = static_cast<std::size_t>((x[i] - lo) / width * nbins);
    if (k >= bins.size()) k = bins.size() - 1;
    bins[k].count++;
    sum[k] += y[i];
    sum2[k] += y[i] * y[i];
  }
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const auto n = static_cast<double>(bins[k].count);
    if (bins[k].count == 0) continue;
    bins[k].mean = sum[k] / n;
    if (bins[k].count > 1) {
      const double var = (sum2[k] - n * bins[k].mean * bins[k].mean) / (n - 1.0);
      bins[k].se = std::sqrt(std::fmax(var, 0.0) / n);
    }
  }
  return bins;
}

}  // namespace smot
