// SPDX-License-Identifier: MIT
#pragma once

/// @file curve.hpp
/// @brief Continuous-time characteristics of the limiting jump process.
///
/// For a marginal family (mu_t) the small-step limit of the decreasing
/// coupling chain is a pure-jump process whose state space splits, at each
/// time t, into three regimes:
///
///   * supermartingale region x <= x1(t): deterministic downward drift at
///     rate jd(t,x) = dtF(t,x)/f(t,x);
///   * martingale band x1(t) < x < m(t): compensated upward jumps of size
///     ju = Tu(t,x) - x arriving with intensity jd/ju, drift -jd between
///     jumps, where jd = (dtF(t,x) - dtF(t,Tu(t,x)))/f(t,x);
///   * diagonal x >= m(t): the process rests.
///
/// Here m(t) is the minimizer of x -> dtF(t,x) and x1(t) solves
/// int_{x1}^{r} (x1 - xi) dtf(t,xi) dxi = 0. Tu(t,x) is the unique root
/// above m(t) of the same kernel integrated over (x, Tu).
///
/// The three built-in families admit closed forms or scalar transcendental
/// equations for x1, m and Tu; tabulated families fall back to quadrature.
/// Generic solvers assume the density vanishes at the support ends (true for
/// the Gaussian-type families; the uniform family has moving support ends
/// and uses its closed forms throughout).
///
/// cont_characteristics precomputes x1/m on a time grid and caches Tu per
/// time slice so the Monte Carlo stepper never root-solves in its inner
/// loop. The object is immutable after construction and safe to share
/// across threads.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smot/errors.hpp"
#include "smot/families.hpp"
#include "smot/math/interp.hpp"
#include "smot/math/normal.hpp"
#include "smot/math/quadrature.hpp"
#include "smot/math/roots.hpp"

namespace smot {

/// Dynamics regime at a point (t,x). Classification at exactly x = x1(t)
/// is supermartingale, matching the "x <= x1" drift indicator of the SDE.
enum class regime { supermartingale, martingale, diagonal };

/// Jump/drift data at one point of state space.
struct jump_chars {
  double jd = 0.0;         ///< downward drift rate (size of -drift, >= 0)
  double ju = 0.0;         ///< upward jump size Tu - x (0 outside the band)
  double intensity = 0.0;  ///< jump arrival rate jd/ju (0 outside the band)
  regime reg = regime::diagonal;
};

struct curve_options {
  int grid_size = 256;  ///< time grid for x1/m splines and the Tu cache
  int tu_nodes = 129;   ///< x-nodes per cached Tu slice
  bool build_tu_cache = true;
  double tol_root = 1e-10;
  double tol_quad = 1e-9;
};

namespace detail {

/// Bachelier phase equation: root z* < 2*sqrt(t) of
///   2*sqrt(t) * (1 - Phi(z)) = phi(z),
/// stated in the normalized variable z = (x + t)/sqrt(t).
inline double bachelier_x1_hat(double t, double tol) {
  const double s = std::sqrt(t);
  auto h = [s](double z) { return 2.0 * s * (1.0 - norm_cdf(z)) - norm_pdf(z); };
  return brent_root(h, -40.0, 2.0 * s, tol);
}

/// GBM phase equation: root y* of phi(y)/sqrt(t) = 1 - Phi(y), stated in
/// y = ln(x)/sqrt(t); then x1 = exp(sqrt(t)*y*).
inline double gbm_x1_hat(double t, double tol) {
  const double s = std::sqrt(t);
  auto h = [s](double y) { return norm_pdf(y) / s - (1.0 - norm_cdf(y)); };
  return brent_root(h, -40.0, 9.0, tol);
}

/// Bachelier jump-destination equation in normalized variables
/// xh = (x+t)/sqrt(t), yh = (Tu+t)/sqrt(t):
///   (yh - xh)(yh - 2 sqrt(t)) phi(yh) + 2 sqrt(t) (Phi(yh) - Phi(xh))
///     = phi(xh) - phi(yh).
/// The left-minus-right residual is positive at yh = m_hat and tends to the
/// (negative) phase residual as yh -> infinity, so the root is bracketed.
inline double bachelier_tu_residual(double t, double xh, double yh) {
  const double s2 = 2.0 * std::sqrt(t);
  return (yh - xh) * (yh - s2) * norm_pdf(yh) +
         s2 * (norm_cdf(yh) - norm_cdf(xh)) - (norm_pdf(xh) - norm_pdf(yh));
}

/// GBM jump-destination equation in xh = (ln x + t)/sqrt(t),
/// yh = (ln Tu + t)/sqrt(t), with Tu = exp(sqrt(t) yh - t):
///   (x - Tu)(yh - 2 sqrt(t)) phi(yh) - sqrt(t) (Tu phi(yh) - x phi(xh))
///     - t e^{-t/2} (Phi(yh - sqrt(t)) - Phi(xh - sqrt(t))) = 0.
inline double gbm_tu_residual(double t, double x, double xh, double yh) {
  const double s = std::sqrt(t);
  const double tu = std::exp(s * yh - t);
  return (x - tu) * (yh - 2.0 * s) * norm_pdf(yh) -
         s * (tu * norm_pdf(yh) - x * norm_pdf(xh)) -
         t * std::exp(-0.5 * t) * (norm_cdf(yh - s) - norm_cdf(xh - s));
}

inline double solve_tu_bachelier(double t, double x, double m, double tol) {
  const double s = std::sqrt(t);
  const double xh = (x + t) / s;
  const double mh = (m + t) / s;
  double lo = mh + 1e-12 * (1.0 + std::fabs(mh));
  double hi = std::max(xh, mh) + 12.0;
  auto res = [&](double yh) { return bachelier_tu_residual(t, xh, yh); };
  const double yh = brent_root(res, lo, hi, tol / s);
  return s * yh - t;
}

inline double solve_tu_gbm(double t, double x, double m, double tol) {
  const double s = std::sqrt(t);
  const double xh = (std::log(x) + t) / s;
  const double mh = (std::log(m) + t) / s;
  double lo = mh + 1e-12 * (1.0 + std::fabs(mh));
  double hi = std::max(xh, mh) + 12.0;
  auto res = [&](double yh) { return gbm_tu_residual(t, x, xh, yh); };
  const double yh = brent_root(res, lo, hi, tol);
  return std::exp(s * yh - t);
}

/// Cumulative integrals of the transport kernel at one time slice,
///   I1(y) = int_a^y dtf,  I2(y) = int_a^y xi*dtf,
/// tabulated by the trapezoid rule so that
///   G(x,y) = int_x^y (x - xi) dtf dxi = x*(I1(y)-I1(x)) - (I2(y)-I2(x))
/// becomes a cheap kink-tolerant evaluation. Adaptive quadrature performs
/// poorly on the piecewise-spline densities of tabulated families; these
/// tables replace it there.
struct kernel_tables {
  double a = 0.0, b = 0.0, h = 1.0;
  std::vector<double> i1, i2;

  [[nodiscard]] double lerp(const std::vector<double>& tab, double x) const {
    const auto m = static_cast<double>(tab.size() - 1);
    const double pos = std::clamp((x - a) / h, 0.0, m);
    const auto k =
        static_cast<std::size_t>(std::min(m - 1.0, std::floor(pos)));
    const double w = pos - static_cast<double>(k);
    return (1.0 - w) * tab[k] + w * tab[k + 1];
  }
  [[nodiscard]] double g(double x, double y) const {
    return x * (lerp(i1, y) - lerp(i1, x)) - (lerp(i2, y) - lerp(i2, x));
  }
};

inline kernel_tables build_kernel_tables(const marginal_family& fam, double t,
                                         int m = 4096) {
  kernel_tables kt;
  kt.a = fam.quantile(t, 1e-6);
  kt.b = fam.quantile(t, 1.0 - 1e-8);
  kt.h = (kt.b - kt.a) / m;
  kt.i1.assign(static_cast<std::size_t>(m) + 1, 0.0);
  kt.i2.assign(static_cast<std::size_t>(m) + 1, 0.0);
  double g_prev = fam.dt_pdf(t, kt.a);
  for (int k = 1; k <= m; ++k) {
    const double xi = kt.a + kt.h * k;
    const double g = fam.dt_pdf(t, xi);
    const auto ku = static_cast<std::size_t>(k);
    kt.i1[ku] = kt.i1[ku - 1] + 0.5 * kt.h * (g_prev + g);
    kt.i2[ku] = kt.i2[ku - 1] + 0.5 * kt.h * ((xi - kt.h) * g_prev + xi * g);
    g_prev = g;
  }
  return kt;
}

}  // namespace detail

/// Minimizer m(t) of x -> dtF(t,x). Closed form for the built-in families;
/// grid scan plus golden-section for tabulated ones. For tabulated families
/// throws validation_error if dtF has more than one significant interior
/// minimum (the dynamics would not be well defined).
inline double solve_m_curve(const marginal_family& fam, double t) {
  fam.validate_time(t);
  switch (fam.kind()) {
    case family_kind::uniform:
      return std::exp(t);
    case family_kind::bachelier:
      return std::sqrt(t * (t + 1.0));
    case family_kind::gbm:
      return std::exp(std::sqrt(t * (t + 1.0)));
    case family_kind::tabulated:
      break;
  }
  const int n = 257;
  const double a = fam.quantile(t, 1e-6);
  const double b = fam.quantile(t, 1.0 - 1e-9);
  std::vector<double> g(n), v(n);
  for (int i = 0; i < n; ++i) {
    g[i] = a + (b - a) * i / (n - 1);
    v[i] = fam.dt_cdf(t, g[i]);
  }
  double vmax = 0.0;
  for (double w : v) vmax = std::max(vmax, std::fabs(w));
  const double noise = 1e-12 * std::max(1.0, vmax);
  int minima = 0;
  int k = 0;
  for (int i = 1; i + 1 < n; ++i) {
    if (v[i] < v[i - 1] - noise && v[i] < v[i + 1] - noise && v[i] < -noise) {
      ++minima;
      if (v[i] < v[k]) k = i;
    }
  }
  if (v[k] > v[n - 1]) k = n - 1;  // edge minimum (moving-support data)
  if (minima > 1) {
    std::ostringstream os;
    os << "solve_m_curve: dtF(t=" << t << ", .) has " << minima
       << " interior minima; band boundary is not unique";
    throw validation_error(os.str());
  }
  const double lo = g[std::max(0, k - 1)];
  const double hi = g[std::min(n - 1, k + 1)];
  auto f = [&](double x) { return fam.dt_cdf(t, x); };
  return golden_min(f, lo, hi, 1e-10 * (1.0 + std::fabs(hi)));
}

/// Residual of the phase-curve equation int_x^{r} (x - xi) dtf(t,xi) dxi,
/// evaluated by adaptive quadrature. Positive left of x1(t), negative right
/// of it.
inline double x1_curve_residual(const marginal_family& fam, double t, double x,
                                double tol_quad = 1e-9) {
  auto f = [&](double xi) { return (x - xi) * fam.dt_pdf(t, xi); };
  return integrate(f, x, fam.upper(t), tol_quad);
}

/// Phase curve x1(t) via the quadrature form of its defining equation.
/// Valid for families whose density vanishes at the upper support end.
inline double solve_x1_generic(const marginal_family& fam, double t,
                               double tol_root = 1e-10,
                               double tol_quad = 1e-9) {
  fam.validate_time(t);
  const double hi = solve_m_curve(fam, t);
  if (fam.kind() == family_kind::tabulated) {
    const auto kt = detail::build_kernel_tables(fam, t);
    auto f = [&](double x) { return kt.g(x, kt.b); };
    return brent_root(f, kt.a, hi, tol_root * (1.0 + std::fabs(hi)));
  }
  const double lo = fam.quantile(t, 1e-7);
  auto f = [&](double x) { return x1_curve_residual(fam, t, x, tol_quad); };
  return brent_root(f, lo, hi, tol_root * (1.0 + std::fabs(hi)));
}

/// Phase curve x1(t): closed form (uniform), scalar transcendental equation
/// (Bachelier/GBM) or quadrature (tabulated).
inline double solve_x1_curve(const marginal_family& fam, double t,
                             double tol = 1e-10) {
  fam.validate_time(t);
  switch (fam.kind()) {
    case family_kind::uniform: {
      const double et = std::exp(t);
      return -et / (1.0 + 2.0 * et);
    }
    case family_kind::bachelier:
      return std::sqrt(t) * detail::bachelier_x1_hat(t, tol) - t;
    case family_kind::gbm:
      return std::exp(std::sqrt(t) * detail::gbm_x1_hat(t, tol));
    case family_kind::tabulated:
      return solve_x1_generic(fam, t, tol);
  }
  throw validation_error("solve_x1_curve: unknown family kind");
}

/// Residual of the jump-destination equation
/// int_x^{y} (x - xi) dtf(t,xi) dxi (positive at y = m(t), decreasing in y).
inline double tu_curve_residual(const marginal_family& fam, double t, double x,
                                double y, double tol_quad = 1e-9) {
  auto f = [&](double xi) { return (x - xi) * fam.dt_pdf(t, xi); };
  return integrate(f, x, y, tol_quad);
}

/// Jump destination Tu(t,x) by direct quadrature of its defining equation.
/// Searches (m, quantile(1 - 1e-12)); x must lie in the martingale band.
inline double solve_tu_generic(const marginal_family& fam, double t, double x,
                               double tol_root = 1e-10,
                               double tol_quad = 1e-9) {
  const double m = solve_m_curve(fam, t);
  if (x >= m) return m;
  if (fam.kind() == family_kind::tabulated) {
    const auto kt = detail::build_kernel_tables(fam, t);
    if (kt.g(x, kt.b) > 0.0) return kt.b;  // beyond tabulated range: cap
    auto f = [&](double y) { return kt.g(x, y); };
    return brent_root(f, m + 1e-12 * (1.0 + std::fabs(m)), kt.b,
                      tol_root * (1.0 + std::fabs(m)));
  }
  const double hi = std::min(fam.upper(t), fam.quantile(t, 1.0 - 1e-12));
  auto f = [&](double y) { return tu_curve_residual(fam, t, x, y, tol_quad); };
  return brent_root(f, m + 1e-12 * (1.0 + std::fabs(m)), hi,
                    tol_root * (1.0 + std::fabs(m)));
}

/// Continuous-time characteristics of one marginal family, with x1/m
/// splines on a time grid and per-slice Tu caches for Monte Carlo use.
class cont_characteristics {
 public:
  explicit cont_characteristics(std::shared_ptr<const marginal_family> fam,
                                curve_options opt = {})
      : fam_(std::move(fam)), opt_(opt) {
    if (!fam_) throw validation_error("cont_characteristics: null family");
    if (opt_.grid_size < 8) {
      throw validation_error("cont_characteristics: grid_size must be >= 8");
    }
    if (opt_.tu_nodes < 8) {
      throw validation_error("cont_characteristics: tu_nodes must be >= 8");
    }
    t0_ = fam_->t_min();
    const int n = opt_.grid_size;
    tg_.resize(n);
    std::vector<double> x1v(n), mv(n);
    for (int i = 0; i < n; ++i) {
      tg_[i] = t0_ + (1.0 - t0_) * i / (n - 1);
      x1v[i] = solve_x1_curve(*fam_, tg_[i], opt_.tol_root);
      mv[i] = solve_m_curve(*fam_, tg_[i]);
    }
    check_grid_continuity(x1v);
    x1_spline_.emplace(tg_, x1v);
    m_spline_.emplace(tg_, mv);
    if (fam_->kind() == family_kind::tabulated) check_boundary_density();
    if (opt_.build_tu_cache && fam_->kind() != family_kind::uniform) {
      slices_.reserve(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) slices_.push_back(build_slice(tg_[i], x1v[i], mv[i]));
    }
  }

  [[nodiscard]] const marginal_family& family() const { return *fam_; }
  [[nodiscard]] std::shared_ptr<const marginal_family> family_ptr() const {
    return fam_;
  }
  [[nodiscard]] double t_min() const { return t0_; }
  [[nodiscard]] const std::vector<std::string>& warnings() const {
    return warnings_;
  }

  /// Phase curve x1(t) (interpolated for the transcendental families).
  [[nodiscard]] double x1(double t) const {
    t = clamp_time(t);
    if (fam_->kind() == family_kind::uniform) {
      const double et = std::exp(t);
      return -et / (1.0 + 2.0 * et);
    }
    return (*x1_spline_)(t);
  }

  /// Band boundary m(t), the minimizer of dtF(t,.).
  [[nodiscard]] double m(double t) const {
    t = clamp_time(t);
    switch (fam_->kind()) {
      case family_kind::uniform:
        return std::exp(t);
      case family_kind::bachelier:
        return std::sqrt(t * (t + 1.0));
      case family_kind::gbm:
        return std::exp(std::sqrt(t * (t + 1.0)));
      case family_kind::tabulated:
        return (*m_spline_)(t);
    }
    return (*m_spline_)(t);
  }

  [[nodiscard]] regime classify(double t, double x) const {
    if (x <= x1(t)) return regime::supermartingale;
    if (x < m(t)) return regime::martingale;
    return regime::diagonal;
  }

  /// Jump destination Tu(t,x) on the martingale band (cached; exact e^t for
  /// the uniform family). Clamped to the band of the nearest cached slices.
  [[nodiscard]] double tu(double t, double x) const {
    t = clamp_time(t);
    if (fam_->kind() == family_kind::uniform) return std::exp(t);
    if (slices_.empty()) {
      return solve_tu_generic(*fam_, t, x, opt_.tol_root, opt_.tol_quad);
    }
    const int n = opt_.grid_size;
    const double pos = (t - t0_) / (1.0 - t0_) * (n - 1);
    int i = std::clamp(static_cast<int>(pos), 0, n - 2);
    const double w = std::clamp(pos - i, 0.0, 1.0);
    const double v0 = (*slices_[static_cast<std::size_t>(i)].tu)(x);
    const double v1 = (*slices_[static_cast<std::size_t>(i) + 1].tu)(x);
    return (1.0 - w) * v0 + w * v1;
  }

  /// Total characteristics map used by the simulator: never throws on
  /// regime boundaries, returns rest (all zeros) on the diagonal.
  [[nodiscard]] jump_chars eval(double t, double x) const {
    jump_chars out;
    out.reg = classify(t, x);
    switch (out.reg) {
      case regime::diagonal:
        return out;
      case regime::supermartingale: {
        out.jd = std::max(0.0, fam_->dt_cdf(t, x) / fam_->pdf(t, x));
        return out;
      }
      case regime::martingale:
        break;
    }
    if (fam_->kind() == family_kind::uniform) {
      const double et = std::exp(t);
      out.ju = et - x;
      out.jd = 0.5 * (et - x) * (1.0 + 2.0 * et) / (1.0 + et);
      out.intensity = out.ju > 0.0 ? out.jd / out.ju : 0.0;
      return out;
    }
    const double dest = tu(t, x);
    out.ju = std::max(0.0, dest - x);
    if (out.ju == 0.0) {
      out.reg = regime::diagonal;
      return out;
    }
    out.jd = std::max(
        0.0, (fam_->dt_cdf(t, x) - fam_->dt_cdf(t, dest)) / fam_->pdf(t, x));
    out.intensity = out.jd / out.ju;
    return out;
  }

 private:
  struct slice {
    double x_lo = 0.0;  // innermost cached node above x1
    double m = 0.0;
    std::optional<monotone_cubic> tu;
  };

  [[nodiscard]] double clamp_time(double t) const {
    return std::clamp(t, t0_, 1.0);
  }

  void check_grid_continuity(const std::vector<double>& x1v) {
    if (fam_->kind() != family_kind::tabulated) return;
    std::vector<double> steps;
    for (std::size_t i = 1; i < x1v.size(); ++i) {
      steps.push_back(std::fabs(x1v[i] - x1v[i - 1]));
    }
    std::vector<double> sorted = steps;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (steps[i] > 10.0 * med + 1e-12) {
        std::ostringstream os;
        os << "x1 curve jumps by " << steps[i] << " between t=" << tg_[i]
           << " and t=" << tg_[i + 1] << " (median step " << med
           << "); phase curve may be discontinuous";
        warnings_.push_back(os.str());
      }
    }
  }

  void check_boundary_density() {
    const double t = t0_;
    const double a = fam_->lower(t), b = fam_->upper(t);
    double fmax = 0.0;
    for (int i = 1; i < 32; ++i) {
      fmax = std::max(fmax, fam_->pdf(t, a + (b - a) * i / 32.0));
    }
    const double edge = std::max(fam_->pdf(t, a + 1e-9 * (b - a)),
                                 fam_->pdf(t, b - 1e-9 * (b - a)));
    if (edge > 1e-3 * fmax) {
      warnings_.push_back(
          "tabulated density does not vanish at the support ends; generic "
          "curve solvers assume it does (moving-support families need their "
          "closed forms)");
    }
  }

  [[nodiscard]] slice build_slice(double t, double x1v, double mv) const {
    slice s;
    s.m = mv;
    const int n = opt_.tu_nodes;
    const double width = mv - x1v;
    std::vector<double> xs(static_cast<std::size_t>(n)),
        ys(static_cast<std::size_t>(n));
    // Quadratic clustering toward x1 where Tu explodes.
    for (int j = 0; j < n; ++j) {
      const double u = static_cast<double>(j + 1) / n;
      xs[static_cast<std::size_t>(j)] = x1v + width * u * u;
    }
    xs.back() = mv;
    if (fam_->kind() == family_kind::tabulated) {
      fill_slice_tabulated(t, mv, xs, ys);
    } else {
      for (int j = 0; j + 1 < n; ++j) {
        const auto k = static_cast<std::size_t>(j);
        ys[k] = fam_->kind() == family_kind::bachelier
                    ? detail::solve_tu_bachelier(t, xs[k], mv, opt_.tol_root)
                    : detail::solve_tu_gbm(t, xs[k], mv, opt_.tol_root);
      }
      ys.back() = mv;
    }
    for (std::size_t j = 1; j < ys.size(); ++j) {
      if (ys[j] > ys[j - 1] + 1e-9 * (1.0 + std::fabs(ys[j]))) {
        std::ostringstream os;
        os.precision(17);
        os << "Tu slice at t=" << t << " is not decreasing: Tu(" << xs[j - 1]
           << ") = " << ys[j - 1] << " < Tu(" << xs[j] << ") = " << ys[j];
        throw convergence_error(os.str());
      }
      ys[j] = std::min(ys[j], ys[j - 1]);  // iron out tolerance-level wiggle
    }
    s.x_lo = xs.front();
    s.tu.emplace(xs, ys);
    return s;
  }

  void fill_slice_tabulated(double t, double mv, const std::vector<double>& xs,
                            std::vector<double>& ys) const {
    const auto kt = detail::build_kernel_tables(*fam_, t, 2048);
    for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
      const double x = xs[j];
      if (kt.g(x, kt.b) > 0.0) {
        ys[j] = kt.b;  // destination beyond the tabulated range: cap
        continue;
      }
      auto res = [&](double y) { return kt.g(x, y); };
      ys[j] = brent_root(res, mv + 1e-12 * (1.0 + std::fabs(mv)), kt.b,
                         opt_.tol_root * (1.0 + std::fabs(mv)));
    }
    ys.back() = mv;
  }

  std::shared_ptr<const marginal_family> fam_;
  curve_options opt_;
  double t0_ = 0.0;
  std::vector<double> tg_;
  std::optional<monotone_cubic> x1_spline_, m_spline_;
  std::vector<slice> slices_;
  std::vector<std::string> warnings_;
};

/// Jump destination via the cached characteristics; x must lie inside the
/// martingale band (throws validation_error otherwise).
inline double solve_tu(const cont_characteristics& chars, double t, double x) {
  if (chars.classify(t, x) != regime::martingale) {
    std::ostringstream os;
    os << "solve_tu: x = " << x << " is outside the martingale band ("
       << chars.x1(t) << ", " << chars.m(t) << ") at t = " << t;
    throw validation_error(os.str());
  }
  switch (chars.family().kind()) {
    case family_kind::uniform:
      return std::exp(t);
    case family_kind::bachelier:
      return detail::solve_tu_bachelier(t, x, chars.m(t), 1e-10);
    case family_kind::gbm:
      return detail::solve_tu_gbm(t, x, chars.m(t), 1e-10);
    case family_kind::tabulated:
      return solve_tu_generic(chars.family(), t, x);
  }
  throw validation_error("solve_tu: unknown family kind");
}

/// Drift/jump data with the module's strict domain contract: throws
/// validation_error at or above m(t). The simulator uses
/// cont_characteristics::eval, which instead returns rest on the diagonal.
inline jump_chars eval_jd_ju(const cont_characteristics& chars, double t,
                             double x) {
  if (x >= chars.m(t)) {
    std::ostringstream os;
    os << "eval_jd_ju: x = " << x << " is at or above the band boundary m("
       << t << ") = " << chars.m(t);
    throw validation_error(os.str());
  }
  return chars.eval(t, x);
}

/// Characteristics of the increasing-coupling limit for the uniform family:
/// downward jumps of size jd compensated by upward drift ju, intensity
/// ju/jd. Boundary hits at x = r_t jump to the lower support end -e^{2t}.
struct increasing_chars {
  double jd = 0.0;
  double ju = 0.0;
  double intensity = 0.0;
};

inline increasing_chars eval_increasing_chars_uniform(
    const marginal_family& fam, double t, double x) {
  if (fam.kind() != family_kind::uniform) {
    throw validation_error(
        "increasing characteristics are only defined for the uniform family "
        "(unbounded supports degenerate)");
  }
  fam.validate_time(t);
  const double et = std::exp(t);
  const double e2t = et * et;
  increasing_chars out;
  out.jd = std::max(0.0, e2t + x);
  out.ju = std::max(0.0, 0.5 * (1.0 + 2.0 * et) * (x + e2t) / (1.0 + et));
  out.intensity = 0.5 * (1.0 + 2.0 * et) / (1.0 + et);
  return out;
}

}  // namespace smot
