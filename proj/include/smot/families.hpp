// SPDX-License-Identifier: MIT
#pragma once

/// @file families.hpp
/// @brief Time-indexed marginal families (uniform, Bachelier, geometric
///        Brownian motion), nondecreasing in convex-decreasing order.
///
/// Each family describes the marginal law μ_t of a supermartingale for
/// t ∈ [t_min(), 1]: CDF/density and their time derivatives, support
/// endpoints, mean, and tail mean. The diffusion-like families (Bachelier,
/// GBM) start at a configurable δ > 0 because their t = 0 slice is a point
/// mass.

#include <cmath>
#include <memory>
#include <string>

#include "smot/math/normal.hpp"
#include "smot/measure.hpp"

namespace smot {

enum class family_kind { uniform, bachelier, gbm, tabulated };

class marginal_family {
 public:
  virtual ~marginal_family() = default;

  [[nodiscard]] virtual family_kind kind() const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
  /// Earliest valid time; the family is defined on [t_min(), 1].
  [[nodiscard]] virtual double t_min() const = 0;

  [[nodiscard]] virtual double cdf(double t, double x) const = 0;
  [[nodiscard]] virtual double pdf(double t, double x) const = 0;
  [[nodiscard]] virtual double quantile(double t, double u) const = 0;
  /// ∂F/∂t and ∂f/∂t at fixed x (interior of the support).
  [[nodiscard]] virtual double dt_cdf(double t, double x) const = 0;
  [[nodiscard]] virtual double dt_pdf(double t, double x) const = 0;
  [[nodiscard]] virtual double lower(double t) const = 0;
  [[nodiscard]] virtual double upper(double t) const = 0;
  [[nodiscard]] virtual double mean(double t) const = 0;
  /// ∫_y^{upper} z dμ_t(z).
  [[nodiscard]] virtual double tail_mean(double t, double y) const = 0;

  /// Self-contained snapshot of μ_t (no reference back to the family).
  [[nodiscard]] virtual measure at(double t) const = 0;

  void validate_time(double t) const {
    if (!(t >= t_min() - 1e-12 && t <= 1.0 + 1e-12)) {
      throw validation_error("family '" + name() + "': time " +
                             std::to_string(t) + " outside [" +
                             std::to_string(t_min()) + ", 1]");
    }
  }
};

// ===========================================================================
// Uniform family: μ_t uniform on [−e^{2t}, e^t].
// ===========================================================================

class uniform_family final : public marginal_family {
 public:
  [[nodiscard]] family_kind kind() const override {
    return family_kind::uniform;
  }
  [[nodiscard]] std::string name() const override { return "uniform"; }
  [[nodiscard]] double t_min() const override { return 0.0; }

  [[nodiscard]] double lower(double t) const override {
    return -std::exp(2.0 * t);
  }
  [[nodiscard]] double upper(double t) const override { return std::exp(t); }

  [[nodiscard]] double cdf(double t, double x) const override {
    const double et = std::exp(t), e2t = et * et;
    if (x <= -e2t) return 0.0;
    if (x >= et) return 1.0;
    return (x + e2t) / (et + e2t);
  }

  [[nodiscard]] double pdf(double t, double x) const override {
    const double et = std::exp(t), e2t = et * et;
    if (x < -e2t || x > et) return 0.0;
    return 1.0 / (et + e2t);
  }

  [[nodiscard]] double quantile(double t, double u) const override {
    const double et = std::exp(t), e2t = et * et;
    return u * (et + e2t) - e2t;
  }

  [[nodiscard]] double dt_cdf(double t, double x) const override {
    const double et = std::exp(t), e2t = et * et;
    if (x <= -e2t || x >= et) return 0.0;
    const double len = et + e2t, dlen = et + 2.0 * e2t;
    return (2.0 * e2t * len - (x + e2t) * dlen) / (len * len);
  }

  [[nodiscard]] double dt_pdf(double t, double x) const override {
    const double et = std::exp(t), e2t = et * et;
    if (x <= -e2t || x >= et) return 0.0;
    const double len = et + e2t;
    return -(et + 2.0 * e2t) / (len * len);
  }

  [[nodiscard]] double mean(double t) const override {
    const double et = std::exp(t);
    return 0.5 * (et - et * et);
  }

  [[nodiscard]] double tail_mean(double t, double y) const override {
    const double et = std::exp(t), e2t = et * et;
    if (y <= -e2t) return mean(t);
    if (y >= et) return 0.0;
    return 0.5 * (e2t - y * y) / (et + e2t);
  }

  [[nodiscard]] measure at(double t) const override {
    validate_time(t);
    const double et = std::exp(t), e2t = et * et, len = et + e2t;
    return measure(
        "uniform[" + std::to_string(t) + "]",
        [=](double x) {
          if (x <= -e2t) return 0.0;
          if (x >= et) return 1.0;
          return (x + e2t) / len;
        },
        [=](double x) { return (x < -e2t || x > et) ? 0.0 : 1.0 / len; },
        [=](double u) { return u * len - e2t; },
        [=](double y) { return 0.5 * (e2t - y * y) / len; }, -e2t, et,
        0.5 * (et - e2t));
  }
};

// ===========================================================================
// Bachelier family: μ_t = Normal(−t, t), defined for t ∈ [δ, 1].
// ===========================================================================

class bachelier_family final : public marginal_family {
 public:
  explicit bachelier_family(double delta = 0.05) : delta_(delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
      throw validation_error("bachelier family: delta must be in (0, 1)");
    }
  }

  [[nodiscard]] family_kind kind() const override {
    return family_kind::bachelier;
  }
  [[nodiscard]] std::string name() const override { return "bachelier"; }
  [[nodiscard]] double t_min() const override { return delta_; }

  [[nodiscard]] double lower(double) const override { return -inf; }
  [[nodiscard]] double upper(double) const override { return inf; }

  [[nodiscard]] double cdf(double t, double x) const override {
    return norm_cdf((x + t) / std::sqrt(t));
  }
  [[nodiscard]] double pdf(double t, double x) const override {
    return norm_pdf((x + t) / std::sqrt(t)) / std::sqrt(t);
  }
  [[nodiscard]] double quantile(double t, double u) const override {
    return -t + std::sqrt(t) * norm_quantile(u);
  }

  [[nodiscard]] double dt_cdf(double t, double x) const override {
    const double st = std::sqrt(t);
    return norm_pdf((x + t) / st) * (t - x) / (2.0 * t * st);
  }

  [[nodiscard]] double dt_pdf(double t, double x) const override {
    const double st = std::sqrt(t);
    const double z = (x + t) / st;
    return -norm_pdf(z) * (1.0 + 2.0 * st * z - z * z) / (2.0 * t * st);
  }

  [[nodiscard]] double mean(double t) const override { return -t; }

  [[nodiscard]] double tail_mean(double t, double y) const override {
    const double st = std::sqrt(t);
    const double z = (y + t) / st;
    return -t * (1.0 - norm_cdf(z)) + st * norm_pdf(z);
  }

  [[nodiscard]] measure at(double t) const override {
    validate_time(t);
    const double st = std::sqrt(t);
    return measure(
        "bachelier[" + std::to_string(t) + "]",
        [=](double x) { return norm_cdf((x + t) / st); },
        [=](double x) { return norm_pdf((x + t) / st) / st; },
        [=](double u) { return -t + st * norm_quantile(u); },
        [=](double y) {
          const double z = (y + t) / st;
          return -t * (1.0 - norm_cdf(z)) + st * norm_pdf(z);
        },
        -inf, inf, -t);
  }

 private:
  double delta_;
};

// ===========================================================================
// GBM family: μ_t = LogNormal(−t, t) (log-mean −t, log-variance t), t ∈ [δ,1].
// ===========================================================================

class gbm_family final : public marginal_family {
 public:
  explicit gbm_family(double delta = 0.05) : delta_(delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
      throw validation_error("gbm family: delta must be in (0, 1)");
    }
  }

  [[nodiscard]] family_kind kind() const override { return family_kind::gbm; }
  [[nodiscard]] std::string name() const override { return "gbm"; }
  [[nodiscard]] double t_min() const override { return delta_; }

  [[nodiscard]] double lower(double) const override { return 0.0; }
  [[nodiscard]] double upper(double) const override { return inf; }

  [[nodiscard]] double cdf(double t, double x) const override {
    if (x <= 0.0) return 0.0;
    return norm_cdf((std::log(x) + t) / std::sqrt(t));
  }
  [[nodiscard]] double pdf(double t, double x) const override {
    if (x <= 0.0) return 0.0;
    const double st = std::sqrt(t);
    return norm_pdf((std::log(x) + t) / st) / (x * st);
  }
  [[nodiscard]] double quantile(double t, double u) const override {
    return std::exp(-t + std::sqrt(t) * norm_quantile(u));
  }

  [[nodiscard]] double dt_cdf(double t, double x) const override {
    if (x <= 0.0) return 0.0;
    const double st = std::sqrt(t);
    return norm_pdf((std::log(x) + t) / st) * (t - std::log(x)) /
           (2.0 * t * st);
  }

  [[nodiscard]] double dt_pdf(double t, double x) const override {
    if (x <= 0.0) return 0.0;
    const double st = std::sqrt(t);
    const double z = (std::log(x) + t) / st;
    return -norm_pdf(z) * (1.0 + 2.0 * st * z - z * z) / (2.0 * t * st * x);
  }

  [[nodiscard]] double mean(double t) const override {
    return std::exp(-0.5 * t);
  }

  [[nodiscard]] double tail_mean(double t, double y) const override {
    if (y <= 0.0) return mean(t);
    const double st = std::sqrt(t);
    const double z = (std::log(y) + t) / st;
    return std::exp(-0.5 * t) * (1.0 - norm_cdf(z - st));
  }

  [[nodiscard]] measure at(double t) const override {
    validate_time(t);
    const double st = std::sqrt(t);
    const double m = std::exp(-0.5 * t);
    return measure(
        "gbm[" + std::to_string(t) + "]",
        [=](double x) {
          return x <= 0.0 ? 0.0 : norm_cdf((std::log(x) + t) / st);
        },
        [=](double x) {
          return x <= 0.0 ? 0.0
                          : norm_pdf((std::log(x) + t) / st) / (x * st);
        },
        [=](double u) { return std::exp(-t + st * norm_quantile(u)); },
        [=](double y) {
          const double z = (std::log(y) + t) / st;
          return m * (1.0 - norm_cdf(z - st));
        },
        0.0, inf, m);
  }

 private:
  double delta_;
};

inline std::shared_ptr<const marginal_family> make_uniform_family() {
  return std::make_shared<uniform_family>();
}
inline std::shared_ptr<const marginal_family> make_bachelier_family(
    double delta = 0.05) {
  return std::make_shared<bachelier_family>(delta);
}
inline std::shared_ptr<const marginal_family> make_gbm_family(
    double delta = 0.05) {
  return std::make_shared<gbm_family>(delta);
}

}  // namespace smot
