// SPDX-License-Identifier: MIT
#pragma once

/// @file coupling.hpp
/// @brief One-period supermartingale couplings.
///
/// Given marginals μ ≤_cd ν whose densities cross exactly twice (dispersion),
/// the decreasing coupling transports quantile-to-quantile below a phase
/// point x1 and as a two-point martingale (right-curtain) kernel above it.
/// The phase point solves a 2×2 mass/mean system; the upward map T_u solves a
/// one-dimensional equation that, after substituting the CDFs, collapses to a
/// four-term expression in tail means:
///
///   G(x, T_u) = ∫_x^{r_μ} [F_ν⁻¹(F_μ(ξ)) − ξ] f_μ dξ
///             + ∫_{T_u}^{r_ν} [g(x,ξ) − ξ] (f_ν − f_μ) dξ
///             = M̄_ν(T_d) − M̄_μ(x) − M̄_ν(T_u) + M̄_μ(T_u),
///
/// with T_d = g(x,T_u) = F_ν⁻¹(F_μ(x) + F_ν(T_u) − F_μ(T_u)) and M̄ the
/// upper partial mean. The closed form keeps every root solve
/// quadrature-free, which is what makes kernel construction cheap enough to
/// rebuild per interval inside the chain simulator.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smot/families.hpp"
#include "smot/math/interp.hpp"
#include "smot/math/quadrature.hpp"
#include "smot/math/roots.hpp"
#include "smot/measure.hpp"

namespace smot {

struct coupling_options {
  int grid_size = 256;      ///< T_u table nodes across the jump band
  double tol_root = 1e-10;  ///< Brent tolerance on the argument
  double tol_quad = 1e-9;   ///< tolerance for diagnostic quadratures
  bool check_dispersion = true;
};

// ===========================================================================
// Elementary maps
// ===========================================================================

/// Quantile (Hoeffding–Fréchet) map F_ν⁻¹ ∘ F_μ; monotone nondecreasing.
[[nodiscard]] inline double quantile_map(const measure& mu, const measure& nu,
                                         double x) {
  if (x < mu.lower() || x > mu.upper()) {
    throw validation_error("quantile_map: x outside support of mu");
  }
  return nu.quantile(mu.cdf(x));
}

/// Antitone map F_ν⁻¹(ν(ℝ) − F_μ(x)); strictly decreasing.
[[nodiscard]] inline double antitone_map(const measure& mu, const measure& nu,
                                         double x) {
  if (std::fabs(mu.mass() - nu.mass()) > 1e-12) {
    throw validation_error("antitone_map: mass mismatch between mu and nu");
  }
  if (x < mu.lower() || x > mu.upper()) {
    throw validation_error("antitone_map: x outside support of mu");
  }
  return nu.quantile(nu.mass() - mu.cdf(x));
}

// ===========================================================================
// Marginal pair with dispersion structure
// ===========================================================================

/// A pair μ ≤_cd ν together with the two points where the densities cross:
/// f_ν > f_μ outside (m_lower, m_upper) and f_μ > f_ν inside. The order
/// check is fatal; the crossing-pattern check is advisory (sampled density
/// comparisons can false-negative near the crossings, especially for
/// tabulated input).
class measure_pair {
 public:
  static measure_pair build(measure mu, measure nu,
                            const coupling_options& opt = {}) {
    measure_pair p(std::move(mu), std::move(nu));
    p.check_order();
    p.find_crossings();
    if (opt.check_dispersion) p.check_dispersion_sampled();
    return p;
  }

  [[nodiscard]] const measure& mu() const { return mu_; }
  [[nodiscard]] const measure& nu() const { return nu_; }
  [[nodiscard]] double m_lower() const { return m_lower_; }
  [[nodiscard]] double m_upper() const { return m_upper_; }
  [[nodiscard]] const std::vector<std::string>& warnings() const {
    return warnings_;
  }

 private:
  measure_pair(measure mu, measure nu)
      : mu_(std::move(mu)), nu_(std::move(nu)) {}

  measure mu_, nu_;
  double m_lower_ = 0.0, m_upper_ = 0.0;
  std::vector<std::string> warnings_;

  void check_order() {
    if (nu_.mean() > mu_.mean() + 1e-10 * (1.0 + std::fabs(mu_.mean()))) {
      std::ostringstream os;
      os << "measure_pair: mean(nu) = " << nu_.mean() << " exceeds mean(mu) = "
         << mu_.mean() << " — not a supermartingale pair";
      throw validation_error(os.str());
    }
    const double lo = std::fmin(mu_.quantile(1e-3), nu_.quantile(1e-3));
    const double hi = std::fmax(mu_.quantile(1.0 - 1e-3),
                                nu_.quantile(1.0 - 1e-3));
    for (int k = 0; k <= 50; ++k) {
      const double strike = lo + (hi - lo) * k / 50.0;
      const double pm = put_price(mu_, strike);
      const double pn = put_price(nu_, strike);
      if (pm > pn + 1e-8 * (1.0 + std::fabs(strike))) {
        std::ostringstream os;
        os.precision(10);
        os << "measure_pair: convex-decreasing order violated at strike "
           << strike << " (put under mu " << pm << " > put under nu " << pn
           << ")";
        throw validation_error(os.str());
      }
    }
  }

  void find_crossings() {
    // Sign changes of f_ν − f_μ across a merged quantile grid of both
    // measures. Bisection locates each change; this also handles density
    // jumps at support endpoints (the crossing degenerates to the jump).
    auto diff = [this](double x) { return nu_.pdf(x) - mu_.pdf(x); };
    std::vector<double> grid;
    for (int k = 1; k < 400; ++k) {
      const double u = static_cast<double>(k) / 400.0;
      grid.push_back(mu_.quantile(u));
      grid.push_back(nu_.quantile(u));
    }
    std::sort(grid.begin(), grid.end());
    std::vector<double> crossings;
    double xa = grid.front(), da = diff(xa);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double xb = grid[i], db = diff(xb);
      if (xb <= xa) continue;
      if ((da > 0.0) != (db > 0.0) && (da != 0.0 || db != 0.0)) {
        crossings.push_back(
            brent([&](double x) { return diff(x); }, xa, xb, 1e-12).x);
      }
      xa = xb;
      da = db;
    }
    if (crossings.size() != 2) {
      std::ostringstream os;
      os << "dispersion: expected exactly 2 density crossings, found "
         << crossings.size();
      warnings_.push_back(os.str());
    }
    if (crossings.empty()) {
      // Degenerate fallback so the solve can still proceed.
      m_lower_ = nu_.quantile(1e-6);
      m_upper_ = nu_.quantile(1.0 - 1e-6);
    } else {
      m_lower_ = crossings.front();
      m_upper_ = crossings.back();
    }
  }

  void check_dispersion_sampled() {
    // Advisory: f_μ > f_ν strictly between the crossings, f_ν > f_μ outside.
    int bad = 0;
    auto sample_region = [&](double a, double b, bool mu_above) {
      if (!(b > a)) return;
      const double pad = 1e-3 * (b - a);
      for (int k = 0; k < 34; ++k) {
        const double x = a + pad + (b - a - 2 * pad) * k / 33.0;
        const double fm = mu_.pdf(x), fn = nu_.pdf(x);
        const double tol = 1e-9 * (1.0 + fm + fn);
        if (mu_above ? (fm <= fn - tol) : (fn <= fm - tol)) ++bad;
      }
    };
    sample_region(std::fmax(nu_.quantile(1e-4), nu_.lower()), m_lower_, false);
    sample_region(m_lower_, m_upper_, true);
    sample_region(m_upper_, std::fmin(nu_.quantile(1.0 - 1e-4), nu_.upper()),
                  false);
    if (bad > 0) {
      std::ostringstream os;
      os << "dispersion: density ordering violated at " << bad
         << " of 102 sample points";
      warnings_.push_back(os.str());
    }
  }
};

// ===========================================================================
// Phase point
// ===========================================================================

struct phase_point {
  double x1 = 0.0;
  double y1 = 0.0;
  /// False for a pure-martingale pair (equal means): the quantile region is
  /// empty and x1 degenerates to the lower end of μ's support.
  bool transition = true;
};

/// Solve ∫_{x1}^{r_μ} z^i dμ = ∫_{y1}^{r_ν} z^i dν (i = 0, 1). The mass
/// equation gives y1 = F_ν⁻¹(F_μ(x1)) directly; the outer root is the mean
/// residual, monotone under dispersion.
[[nodiscard]] inline phase_point compute_phase_point(
    const measure_pair& pair, double tol = 1e-10) {
  const measure& mu = pair.mu();
  const measure& nu = pair.nu();
  auto residual = [&](double x) {
    return mu.tail_mean(x) - nu.tail_mean(nu.quantile(mu.cdf(x)));
  };
  const double scale = 1.0 + std::fabs(mu.mean()) + std::fabs(nu.mean());
  if (std::fabs(mu.mean() - nu.mean()) < 1e-11 * scale) {
    return {mu.lower(), nu.lower(), false};
  }
  const double a = std::isfinite(mu.lower()) ? mu.lower()
                                             : mu.quantile(quantile_clip);
  const double b = mu.quantile(1.0 - 1e-9);
  const double ra = residual(a), rb = residual(b);
  if ((ra > 0.0) == (rb > 0.0)) {
    // No sign change in the mean residual: treat as transition-free.
    return {mu.lower(), nu.lower(), false};
  }
  const double x1 = brent_root(residual, a, b, tol);
  return {x1, nu.quantile(mu.cdf(x1)), true};
}

/// Phase point of the increasing coupling: mass F_μ(x1) + F_ν(y1) = 1 and
/// mean balance between μ's lower part and ν's upper part. Above x1 the
/// increasing coupling is antitone; below it is a two-point martingale.
[[nodiscard]] inline phase_point compute_phase_point_increasing(
    const measure_pair& pair, double tol = 1e-10) {
  const measure& mu = pair.mu();
  const measure& nu = pair.nu();
  auto residual = [&](double x) {
    const double lower_mean = mu.mean() - mu.tail_mean(x);
    return lower_mean - nu.tail_mean(nu.quantile(1.0 - mu.cdf(x)));
  };
  const double scale = 1.0 + std::fabs(mu.mean()) + std::fabs(nu.mean());
  if (std::fabs(mu.mean() - nu.mean()) < 1e-11 * scale) {
    return {mu.upper(), nu.lower(), false};
  }
  const double a = std::isfinite(mu.lower()) ? mu.lower()
                                             : mu.quantile(quantile_clip);
  const double b = mu.quantile(1.0 - 1e-9);
  const double x1 = brent_root(residual, a, b, tol);
  return {x1, nu.quantile(1.0 - mu.cdf(x1)), true};
}

// ===========================================================================
// Decreasing one-period coupling
// ===========================================================================

class one_period_coupling {
 public:
  [[nodiscard]] const measure_pair& pair() const { return pair_; }
  [[nodiscard]] double x1() const { return x1_; }
  [[nodiscard]] double y1() const { return y1_; }
  [[nodiscard]] bool has_transition() const { return transition_; }

  /// Downward / stay-put map T_d: quantile map below x1, g(x, T_u(x)) on the
  /// band, identity at and above m_upper.
  [[nodiscard]] double td(double x) const {
    if (x >= m_upper_) return x;
    if (transition_ && x <= x1_) return nu_quantile_of_mu_cdf(x);
    return g_map(x, tu_band(x));
  }

  /// Upward map T_u: +∞ at and below x1 (no upward branch there), the
  /// root of G(x,·) on the band, identity at and above m_upper.
  [[nodiscard]] double tu(double x) const {
    if (x >= m_upper_) return x;
    if (transition_ && x <= x1_) return inf;
    return tu_band(x);
  }

  /// Upward-jump probability q = (x − T_d)/(T_u − T_d) on the band; 0 below
  /// x1; at m_upper the 0/0 limit is taken one-sided.
  [[nodiscard]] double q(double x) const {
    const double eps_diag = 1e-8;
    if (transition_ && x <= x1_) return 0.0;
    if (x >= m_upper_ - eps_diag) {
      if (x > m_upper_) return 0.0;  // Dirac region: unused by the kernel
      x = m_upper_ - eps_diag;
    }
    const double up = tu_band(x);
    const double dn = g_map(x, up);
    if (!(up > dn)) return 0.0;
    return std::clamp((x - dn) / (up - dn), 0.0, 1.0);
  }

  /// Transition-kernel sample: T_u(x) with probability q(x), else T_d(x);
  /// deterministic in (x, u).
  [[nodiscard]] double sample(double x, double u) const {
    if (x >= m_upper_) return x;
    if (transition_ && x <= x1_) return nu_quantile_of_mu_cdf(x);
    const double up = tu_band(x);
    const double dn = g_map(x, up);
    if (!(up > dn)) return x;
    const double p = std::clamp((x - dn) / (up - dn), 0.0, 1.0);
    return u < p ? up : dn;
  }

  /// Closed-form residual of the T_u equation (tail-mean form).
  [[nodiscard]] double equation_residual(double x, double tu_val) const {
    const measure& mu = pair_.mu();
    const measure& nu = pair_.nu();
    const double td_val = g_map(x, tu_val);
    return nu.tail_mean(td_val) - mu.tail_mean(x) - nu.tail_mean(tu_val) +
           mu.tail_mean(tu_val);
  }

  /// Literal quadrature form of the same residual (diagnostic; slow).
  [[nodiscard]] double integral_residual(double x, double tu_val) const {
    const measure& mu = pair_.mu();
    const measure& nu = pair_.nu();
    const double first = integrate(
        [&](double xi) {
          return (nu.quantile(mu.cdf(xi)) - xi) * mu.pdf(xi);
        },
        x, mu.upper(), tol_quad_);
    const double second = integrate(
        [&](double xi) {
          return (g_map(x, xi) - xi) * (nu.pdf(xi) - mu.pdf(xi));
        },
        tu_val, nu.upper(), tol_quad_);
    return first + second;
  }

  /// Two-point map g(x,y) = F_ν⁻¹(F_μ(x) + F_ν(y) − F_μ(y)).
  [[nodiscard]] double g_map(double x, double y) const {
    const measure& mu = pair_.mu();
    const measure& nu = pair_.nu();
    return nu.quantile(mu.cdf(x) + nu.cdf(y) - mu.cdf(y));
  }

  struct dump_row {
    double x, td, tu, q;
  };
  [[nodiscard]] std::vector<dump_row> dump(const std::vector<double>& xs) const {
    std::vector<dump_row> rows;
    rows.reserve(xs.size());
    for (double x : xs) rows.push_back({x, td(x), tu(x), q(x)});
    return rows;
  }

  friend one_period_coupling build_decreasing_coupling(
      const measure_pair& pair, const coupling_options& opt);

 private:
  explicit one_period_coupling(measure_pair pair) : pair_(std::move(pair)) {}

  [[nodiscard]] double nu_quantile_of_mu_cdf(double x) const {
    return pair_.nu().quantile(pair_.mu().cdf(x));
  }

  /// T_u on the open band (x1, m_upper): spline lookup with a direct solve
  /// fallback between x1 and the first table node.
  [[nodiscard]] double tu_band(double x) const {
    if (x >= m_upper_) return m_upper_;
    if (x >= band_table_lo_) {
      return std::fmax((*tu_spline_)(x), m_upper_);
    }
    return solve_tu(x);
  }

  [[nodiscard]] double solve_tu(double x) const {
    const measure& nu = pair_.nu();
    const double hi = std::isfinite(nu.upper())
                          ? nu.upper()
                          : nu.quantile(1.0 - 1e-10);
    auto res = [&](double t) { return equation_residual(x, t); };
    const double r_lo = res(m_upper_);
    if (r_lo >= 0.0) return m_upper_;  // diagonal limit
    const double r_hi = res(hi);
    if (r_hi <= 0.0) return hi;  // root beyond the representable quantile cap
    return brent_root(res, m_upper_, hi, tol_root_);
  }

  measure_pair pair_;
  double x1_ = 0.0, y1_ = 0.0, m_upper_ = 0.0;
  bool transition_ = true;
  double band_table_lo_ = 0.0;
  std::optional<monotone_cubic> tu_spline_;
  double tol_root_ = 1e-10, tol_quad_ = 1e-9;
};

/// Build the decreasing coupling: phase point, then a clustered table of T_u
/// roots across the band, checked for strict monotonicity.
[[nodiscard]] inline one_period_coupling build_decreasing_coupling(
    const measure_pair& pair, const coupling_options& opt = {}) {
  one_period_coupling c(pair);
  c.tol_root_ = opt.tol_root;
  c.tol_quad_ = opt.tol_quad;
  c.m_upper_ = pair.m_upper();
  const phase_point pp = compute_phase_point(pair, opt.tol_root);
  c.x1_ = pp.x1;
  c.y1_ = pp.y1;
  c.transition_ = pp.transition;

  // Table of T_u values on (band_lo, m_upper], clustered toward the phase
  // point where T_u is steep.
  const double band_lo =
      pp.transition ? pp.x1
                    : (std::isfinite(pair.mu().lower())
                           ? pair.mu().lower()
                           : pair.mu().quantile(1e-9));
  const double width = c.m_upper_ - band_lo;
  if (!(width > 0.0)) {
    throw convergence_error(
        "build_decreasing_coupling: empty jump band (m_upper <= x1)");
  }
  const int n = std::max(opt.grid_size, 16);
  std::vector<double> xs, ts;
  xs.reserve(static_cast<std::size_t>(n));
  ts.reserve(xs.capacity());
  for (int k = 1; k <= n; ++k) {
    const double s = static_cast<double>(k) / n;
    const double x = (k == n) ? c.m_upper_ : band_lo + width * s * s;
    xs.push_back(x);
    ts.push_back(k == n ? c.m_upper_ : c.solve_tu(x));
  }
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!(ts[i] <= ts[i - 1])) {
      std::ostringstream os;
      os.precision(17);
      os << "build_decreasing_coupling: T_u not decreasing across the table ("
         << "T_u(" << xs[i - 1] << ") = " << ts[i - 1] << ", T_u(" << xs[i]
         << ") = " << ts[i] << "); tighten tolerances";
      throw convergence_error(os.str());
    }
  }
  c.band_table_lo_ = xs.front();
  c.tu_spline_.emplace(std::move(xs), std::move(ts));
  return c;
}

/// Kernel sampling as a free function, mirroring the coupling's field names.
[[nodiscard]] inline double kernel_sample(const one_period_coupling& c,
                                          double x, double u) {
  return c.sample(x, u);
}

// ===========================================================================
// Increasing one-period coupling (uniform family only)
// ===========================================================================

/// The increasing coupling of the uniform family between times t and t+ε:
/// a two-point martingale kernel below the (increasing-order) phase point
/// and the antitone map above it. Closed-form throughout.
class increasing_coupling_uniform {
 public:
  increasing_coupling_uniform(double t, double eps) : t_(t), eps_(eps) {
    if (!(eps > 0.0) || t < 0.0 || t + eps > 1.0 + 1e-12) {
      throw validation_error(
          "increasing_coupling_uniform: need 0 <= t < t+eps <= 1");
    }
    const double et = std::exp(t), e2t = et * et;
    const double ee = std::exp(eps), e2e = ee * ee;
    x1_ = (et * et * et * (1.0 - e2e) + et * (2.0 * ee + et * (1.0 + ee))) /
          (1.0 + ee + et * (1.0 + e2e));
    ell_ = -e2t;
    r_ = et;
    const uniform_family fam;
    y1_ = fam.quantile(t + eps, 1.0 - fam.cdf(t, x1_));
  }

  [[nodiscard]] double t() const { return t_; }
  [[nodiscard]] double eps() const { return eps_; }
  [[nodiscard]] double x1() const { return x1_; }
  [[nodiscard]] double y1() const { return y1_; }

  /// Upward map on the martingale region (ℓ_t, x1]; collapses to the
  /// diagonal at the lower support edge.
  [[nodiscard]] double tu(double x) const {
    if (x > x1_) return td(x);
    const double et = std::exp(t_), e2t = et * et;
    const double ee = std::exp(eps_);
    return 0.5 * (ee * (1.0 + ee * et) * (x + e2t) / (1.0 + et) + x - e2t);
  }

  [[nodiscard]] double td(double x) const {
    const double e2t = std::exp(2.0 * t_);
    if (x <= x1_) return x - e2t - tu(x);
    const uniform_family fam;
    return fam.quantile(t_ + eps_, 1.0 - fam.cdf(t_, x));
  }

  [[nodiscard]] double q(double x) const {
    if (x > x1_) return 0.0;
    const double up = tu(x), dn = td(x);
    if (!(up > dn)) return 0.0;
    return std::clamp((x - dn) / (up - dn), 0.0, 1.0);
  }

  [[nodiscard]] double sample(double x, double u) const {
    if (x > x1_) return td(x);
    const double up = tu(x), dn = td(x);
    if (!(up > dn)) return x;
    return u < (x - dn) / (up - dn) ? up : dn;
  }

 private:
  double t_, eps_;
  double x1_, y1_, ell_, r_;
};

[[nodiscard]] inline increasing_coupling_uniform
build_increasing_coupling_uniform(double t, double eps) {
  return increasing_coupling_uniform(t, eps);
}

}  // namespace smot
