// SPDX-License-Identifier: MIT
#pragma once

/// @file roots.hpp
/// @brief Bracketed scalar root finding (Brent's method).
///
/// All transport equations solved in this library are strictly monotone in
/// the unknown, so a bracketing method is both robust and fast. Tolerances
/// are on the argument, not the residual.

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "smot/errors.hpp"

namespace smot {

struct root_result {
  double x = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline std::string bracket_message(const char* who, double a, double fa,
                                   double b, double fb) {
  std::ostringstream os;
  os.precision(17);
  os << who << ": root not bracketed: f(" << a << ") = " << fa << ", f(" << b
     << ") = " << fb;
  return os.str();
}

}  // namespace detail

/// Classic Brent iteration (inverse quadratic / secant / bisection) on [a,b].
/// Requires f(a)·f(b) ≤ 0; throws convergence_error with the bracket values
/// otherwise. `tol` is an absolute tolerance on x.
template <class F>
root_result brent(F&& f, double a, double b, double tol = 1e-10,
                  int max_iter = 200) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return {a, 0, true};
  if (fb == 0.0) return {b, 0, true};
  if ((fa > 0.0) == (fb > 0.0)) {
    throw convergence_error(detail::bracket_message("brent", a, fa, b, fb));
  }

  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int it = 1; it <= max_iter; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double eps = std::numeric_limits<double>::epsilon();
    const double tol1 = 2.0 * eps * std::fabs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return {b, it, true};

    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      // Attempt inverse quadratic interpolation (secant if a == c).
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::fmin(3.0 * xm * q - std::fabs(tol1 * q),
                              std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::fabs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  return {b, max_iter, false};
}

/// Golden-section search for the minimizer of a unimodal function on [a,b].
/// `tol` is an absolute tolerance on the argument.
template <class F>
[[nodiscard]] double golden_min(F&& f, double a, double b, double tol = 1e-10,
                                int max_iter = 200) {
  constexpr double inv_phi = 0.6180339887498949;  // (sqrt(5)-1)/2
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

/// Convenience wrapper: returns the root or throws convergence_error.
template <class F>
[[nodiscard]] double brent_root(F&& f, double a, double b, double tol = 1e-10,
                                int max_iter = 200) {
  root_result r = brent(std::forward<F>(f), a, b, tol, max_iter);
  if (!r.converged) {
    std::ostringstream os;
    os.precision(17);
    os << "brent: no convergence after " << r.iterations
       << " iterations (last x = " << r.x << ", bracket [" << a << ", " << b
       << "])";
    throw convergence_error(os.str());
  }
  return r.x;
}

}  // namespace smot
