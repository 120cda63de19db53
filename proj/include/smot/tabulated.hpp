// SPDX-License-Identifier: MIT
#pragma once

/// @file tabulated.hpp
/// @brief Marginal family backed by sampled densities on a (t, x) grid.
///
/// Each time slice is a density sampled on its own x-grid. The slice CDF is
/// the normalized cumulative trapezoid, interpolated with a monotone cubic;
/// between slice times everything (F, f, mean, tail mean, support) is linear
/// in t, and the time derivatives are the corresponding difference quotients.
/// This is the loosest family the solvers accept: smoothness beyond first
/// order is not certified, and the density-crossing structure is checked
/// only advisorily downstream.

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smot/families.hpp"
#include "smot/math/interp.hpp"
#include "smot/math/roots.hpp"

namespace smot {

namespace detail {

struct tab_slice {
  std::vector<double> x;
  std::vector<double> f;       // normalized density at nodes
  std::vector<double> F;       // normalized cumulative trapezoid
  std::vector<double> zm;      // ∫_{x0}^{x_j} z f(z) dz, normalized
  double raw_mass = 0.0;       // trapezoid mass before normalization
  double mean = 0.0;
  std::unique_ptr<monotone_cubic> f_sp, F_sp, zm_sp;

  [[nodiscard]] double cdf(double xx) const {
    if (xx <= x.front()) return 0.0;
    if (xx >= x.back()) return 1.0;
    return std::clamp((*F_sp)(xx), 0.0, 1.0);
  }
  [[nodiscard]] double pdf(double xx) const {
    if (xx < x.front() || xx > x.back()) return 0.0;
    return std::max(0.0, (*f_sp)(xx));
  }
  [[nodiscard]] double tail_mean(double y) const {
    if (y <= x.front()) return mean;
    if (y >= x.back()) return 0.0;
    return mean - (*zm_sp)(y);
  }
};

struct tab_data {
  std::vector<double> times;
  std::vector<tab_slice> slices;
};

}  // namespace detail

class tabulated_family final : public marginal_family {
 public:
  /// `times` strictly increasing (≥ 2 entries); `xs[i]`/`fs[i]` give the
  /// density samples of slice i.
  tabulated_family(std::vector<double> times,
                   std::vector<std::vector<double>> xs,
                   std::vector<std::vector<double>> fs) {
    if (times.size() < 2) {
      throw validation_error(
          "tabulated family: need at least 2 time slices for time "
          "derivatives");
    }
    if (xs.size() != times.size() || fs.size() != times.size()) {
      throw validation_error("tabulated family: slice count mismatch");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) {
        throw validation_error("tabulated family: time grid not increasing");
      }
    }
    auto data = std::make_shared<detail::tab_data>();
    data->times = std::move(times);
    data->slices.resize(data->times.size());
    for (std::size_t i = 0; i < data->times.size(); ++i) {
      build_slice(data->slices[i], std::move(xs[i]), std::move(fs[i]), i);
    }
    data_ = std::move(data);
    check_order();
  }

  [[nodiscard]] family_kind kind() const override {
    return family_kind::tabulated;
  }
  [[nodiscard]] std::string name() const override { return "tabulated"; }
  [[nodiscard]] double t_min() const override { return data_->times.front(); }
  [[nodiscard]] double t_max() const { return data_->times.back(); }

  [[nodiscard]] double lower(double t) const override {
    return eval_lower(*data_, t);
  }
  [[nodiscard]] double upper(double t) const override {
    return eval_upper(*data_, t);
  }
  [[nodiscard]] double cdf(double t, double x) const override {
    return eval_cdf(*data_, t, x);
  }
  [[nodiscard]] double pdf(double t, double x) const override {
    return eval_pdf(*data_, t, x);
  }
  [[nodiscard]] double mean(double t) const override {
    return lerp_of(*data_, t,
                   [](const detail::tab_slice& s) { return s.mean; });
  }
  [[nodiscard]] double tail_mean(double t, double y) const override {
    return lerp_of(*data_, t,
                   [&](const detail::tab_slice& s) { return s.tail_mean(y); });
  }

  [[nodiscard]] double quantile(double t, double u) const override {
    return eval_quantile(*data_, t, u);
  }

  [[nodiscard]] double dt_cdf(double t, double x) const override {
    return slope_of(*data_, t,
                    [&](const detail::tab_slice& s) { return s.cdf(x); });
  }
  [[nodiscard]] double dt_pdf(double t, double x) const override {
    return slope_of(*data_, t,
                    [&](const detail::tab_slice& s) { return s.pdf(x); });
  }

  [[nodiscard]] measure at(double t) const override {
    if (!(t >= t_min() - 1e-12 && t <= t_max() + 1e-12)) {
      throw validation_error("tabulated family: time out of range");
    }
    auto data = data_;  // keeps the table alive inside the closures
    const double tt = t;
    std::ostringstream nm;
    nm << "tabulated[" << tt << "]";
    return measure(
        nm.str(), [data, tt](double x) { return eval_cdf(*data, tt, x); },
        [data, tt](double x) { return eval_pdf(*data, tt, x); },
        [data, tt](double u) { return eval_quantile(*data, tt, u); },
        [data, tt](double y) {
          return lerp_of(*data, tt, [&](const detail::tab_slice& s) {
            return s.tail_mean(y);
          });
        },
        lower(tt), upper(tt), mean(tt));
  }

 private:
  std::shared_ptr<const detail::tab_data> data_;

  static void build_slice(detail::tab_slice& s, std::vector<double> x,
                          std::vector<double> f, std::size_t index) {
    if (x.size() != f.size() || x.size() < 4) {
      throw validation_error("tabulated family: slice " +
                             std::to_string(index) +
                             " needs >= 4 (x, f) samples");
    }
    for (std::size_t j = 1; j < x.size(); ++j) {
      if (!(x[j] > x[j - 1])) {
        throw validation_error("tabulated family: x grid of slice " +
                               std::to_string(index) + " not increasing");
      }
    }
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (!(f[j] > 0.0)) {
        std::ostringstream os;
        os << "tabulated family: density sample must be strictly positive; "
           << "slice " << index << " has f(" << x[j] << ") = " << f[j];
        throw validation_error(os.str());
      }
    }
    const std::size_t n = x.size();
    std::vector<double> F(n, 0.0), zm(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
      const double dx = x[j] - x[j - 1];
      F[j] = F[j - 1] + 0.5 * (f[j] + f[j - 1]) * dx;
      zm[j] = zm[j - 1] + 0.5 * (x[j] * f[j] + x[j - 1] * f[j - 1]) * dx;
    }
    s.raw_mass = F.back();
    const double inv = 1.0 / s.raw_mass;
    for (std::size_t j = 0; j < n; ++j) {
      f[j] *= inv;
      F[j] *= inv;
      zm[j] *= inv;
    }
    s.mean = zm.back();
    s.x = std::move(x);
    s.f = std::move(f);
    s.F = std::move(F);
    s.zm = std::move(zm);
    s.f_sp = std::make_unique<monotone_cubic>(s.x, s.f);
    s.F_sp = std::make_unique<monotone_cubic>(s.x, s.F);
    s.zm_sp = std::make_unique<monotone_cubic>(s.x, s.zm);
  }

  /// Convex-decreasing order across adjacent slices: put prices must be
  /// nondecreasing in t at a strike sweep.
  void check_order() const {
    const auto& d = *data_;
    for (std::size_t i = 0; i + 1 < d.slices.size(); ++i) {
      const auto& a = d.slices[i];
      const auto& b = d.slices[i + 1];
      const double lo = std::min(a.x.front(), b.x.front());
      const double hi = std::max(a.x.back(), b.x.back());
      for (int k = 0; k <= 50; ++k) {
        const double strike = lo + (hi - lo) * k / 50.0;
        const double pa = strike * a.cdf(strike) - (a.mean - a.tail_mean(strike));
        const double pb = strike * b.cdf(strike) - (b.mean - b.tail_mean(strike));
        if (pa > pb + 1e-8 * (1.0 + std::fabs(strike))) {
          std::ostringstream os;
          os.precision(10);
          os << "tabulated family: convex-decreasing order violated between "
             << "t = " << d.times[i] << " and t = " << d.times[i + 1]
             << " at strike " << strike << " (put " << pa << " > " << pb
             << ")";
          throw validation_error(os.str());
        }
      }
    }
  }

  template <class Fn>
  [[nodiscard]] static double lerp_of(const detail::tab_data& d, double t,
                                      Fn&& per_slice) {
    if (t <= d.times.front()) return per_slice(d.slices.front());
    if (t >= d.times.back()) return per_slice(d.slices.back());
    const auto it =
        std::upper_bound(d.times.begin(), d.times.end(), t) - 1;
    const auto i = static_cast<std::size_t>(it - d.times.begin());
    const double w = (t - d.times[i]) / (d.times[i + 1] - d.times[i]);
    return (1.0 - w) * per_slice(d.slices[i]) + w * per_slice(d.slices[i + 1]);
  }

  [[nodiscard]] static double eval_lower(const detail::tab_data& d, double t) {
    return lerp_of(d, t,
                   [](const detail::tab_slice& s) { return s.x.front(); });
  }
  [[nodiscard]] static double eval_upper(const detail::tab_data& d, double t) {
    return lerp_of(d, t,
                   [](const detail::tab_slice& s) { return s.x.back(); });
  }
  [[nodiscard]] static double eval_cdf(const detail::tab_data& d, double t,
                                       double x) {
    return lerp_of(d, t,
                   [&](const detail::tab_slice& s) { return s.cdf(x); });
  }
  [[nodiscard]] static double eval_pdf(const detail::tab_data& d, double t,
                                       double x) {
    return lerp_of(d, t,
                   [&](const detail::tab_slice& s) { return s.pdf(x); });
  }
  [[nodiscard]] static double eval_quantile(const detail::tab_data& d,
                                            double t, double u) {
    u = std::clamp(u, quantile_clip, 1.0 - quantile_clip);
    const double a = eval_lower(d, t), b = eval_upper(d, t);
    if (u <= eval_cdf(d, t, a)) return a;
    if (u >= eval_cdf(d, t, b)) return b;
    return brent_root([&](double x) { return eval_cdf(d, t, x) - u; }, a, b,
                      1e-12 * (1.0 + std::fabs(a) + std::fabs(b)));
  }

  /// Difference quotient in t. Each segment slope is attributed to the
  /// segment midpoint and slopes are interpolated linearly between
  /// midpoints, so the derivative is continuous in t (a piecewise-constant
  /// convention would make the phase curve stair-step across slice times).
  template <class Fn>
  [[nodiscard]] static double slope_of(const detail::tab_data& d, double t,
                                       Fn&& per_slice) {
    const std::size_t m = d.times.size();
    auto seg_slope = [&](std::size_t i) {
      return (per_slice(d.slices[i + 1]) - per_slice(d.slices[i])) /
             (d.times[i + 1] - d.times[i]);
    };
    auto mid = [&](std::size_t i) {
      return 0.5 * (d.times[i] + d.times[i + 1]);
    };
    if (m == 2 || t <= mid(0)) return seg_slope(0);
    if (t >= mid(m - 2)) return seg_slope(m - 2);
    std::size_t i = 0;
    while (i + 1 < m - 2 && mid(i + 1) < t) ++i;
    const double w = (t - mid(i)) / (mid(i + 1) - mid(i));
    return (1.0 - w) * seg_slope(i) + w * seg_slope(i + 1);
  }
};

/// Samples a closed-form family onto a regular grid (mostly for tests and as
/// a worked example of the tabulated input format).
inline std::shared_ptr<const tabulated_family> tabulate_family(
    const marginal_family& src, int n_times, int n_x,
    double u_lo = 1e-4, double u_hi = 1.0 - 1e-4) {
  std::vector<double> times(static_cast<std::size_t>(n_times));
  std::vector<std::vector<double>> xs(times.size()), fs(times.size());
  const double t0 = src.t_min(), t1 = 1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t =
        t0 + (t1 - t0) * static_cast<double>(i) / (times.size() - 1);
    times[i] = t;
    const double a = src.quantile(t, u_lo), b = src.quantile(t, u_hi);
    xs[i].resize(static_cast<std::size_t>(n_x));
    fs[i].resize(xs[i].size());
    for (std::size_t j = 0; j < xs[i].size(); ++j) {
      const double x = a + (b - a) * static_cast<double>(j) / (xs[i].size() - 1);
      xs[i][j] = x;
      fs[i][j] = std::max(src.pdf(t, x), 1e-300);
    }
  }
  return std::make_shared<tabulated_family>(std::move(times), std::move(xs),
                                            std::move(fs));
}

}  // namespace smot
