// SPDX-License-Identifier: MIT

/// @file test_coupling.cpp
/// @brief One-period coupling construction: phase points, kernel structure,
/// martingale identity, defining-equation residuals and sampling.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "smot/coupling.hpp"
#include "smot/errors.hpp"
#include "smot/families.hpp"
#include "smot/math/rng.hpp"
#include "smot/math/stats.hpp"

namespace {

/// Closed-form phase point of the uniform family's one-period decreasing
/// coupling, obtained by solving the tail mass/mean conservation pair in
/// closed form (uniform densities make both equations polynomial in e^t).
double uniform_x1_eps(double t, double eps) {
  const double a = std::exp(t);
  const double b = std::exp(t + eps);
  return (a * (b * b - b + a) + a * a * (a - 2.0 * b)) /
         (b + b * b - a - a * a);
}

/// Same closed form for the increasing coupling (left-to-right shadow
/// construction): martingale at and below x1, strict supermartingale above.
double uniform_x1_eps_increasing(double t, double eps) {
  const double et = std::exp(t);
  const double ee = std::exp(eps);
  return (et * et * et * (1.0 - ee * ee) +
          et * (2.0 * ee + et * (1.0 + ee))) /
         (1.0 + ee + et * (1.0 + ee * ee));
}

TEST(coupling, measure_pair_band_uniform) {
  const auto fam = smot::make_uniform_family();
  // over [0, ln 2] the uniform supports give a band exactly [-1, 1]
  const auto pair = smot::measure_pair::build(
      fam->at(0.0), fam->at(std::log(2.0)));
  EXPECT_NEAR(pair.m_lower(), -1.0, 1e-9);
  EXPECT_NEAR(pair.m_upper(), 1.0, 1e-9);
  EXPECT_TRUE(pair.warnings().empty());
}

TEST(coupling, decreasing_phase_point_matches_closed_form) {
  const auto fam = smot::make_uniform_family();
  for (double t : {0.0, 0.25, 0.6}) {
    for (double eps : {0.4, 0.2, 0.1}) {
      const auto pair =
          smot::measure_pair::build(fam->at(t), fam->at(t + eps));
      const auto cpl = smot::build_decreasing_coupling(pair);
      EXPECT_NEAR(cpl.x1(), uniform_x1_eps(t, eps), 1e-8)
          << "t=" << t << " eps=" << eps;
      // y1 = x1 - (r_{t+eps} - r_t) for the uniform supports
      EXPECT_NEAR(cpl.y1(),
                  cpl.x1() - std::exp(t + eps) + std::exp(t), 1e-7);
      EXPECT_TRUE(cpl.has_transition());
    }
  }
}

TEST(coupling, martingale_identity_in_band) {
  const auto fam = smot::make_uniform_family();
  const auto pair =
      smot::measure_pair::build(fam->at(0.2), fam->at(0.45));
  const auto cpl = smot::build_decreasing_coupling(pair);
  const double m_up = pair.m_upper();
  for (int i = 1; i < 40; ++i) {
    const double x = cpl.x1() + (m_up - cpl.x1()) * i / 40.0;
    const double tu = cpl.tu(x);
    const double td = cpl.td(x);
    const double q = cpl.q(x);
    ASSERT_GT(tu, x);
    ASSERT_LT(td, x);
    ASSERT_GT(q, 0.0);
    ASSERT_LT(q, 1.0);
    // two-point kernels must recenter exactly
    EXPECT_NEAR(q * tu + (1.0 - q) * td, x, 1e-10);
  }
}

TEST(coupling, quantile_map_below_phase_point) {
  const auto fam = smot::make_uniform_family();
  const auto pair = smot::measure_pair::build(fam->at(0.2), fam->at(0.45));
  const auto cpl = smot::build_decreasing_coupling(pair);
  for (int i = 1; i <= 10; ++i) {
    const double u = pair.mu().cdf(cpl.x1()) * i / 11.0;
    const double x = pair.mu().quantile(u);
    EXPECT_EQ(cpl.q(x), 0.0);
    // quantile transport: F_nu(T_d(x)) = F_mu(x)
    EXPECT_NEAR(pair.nu().cdf(cpl.td(x)), pair.mu().cdf(x), 1e-9);
    // strict supermartingale region moves mass down
    EXPECT_LT(cpl.td(x), x);
  }
}

TEST(coupling, defining_equation_residuals_vanish) {
  const auto fam = smot::make_bachelier_family();
  const auto pair = smot::measure_pair::build(fam->at(0.3), fam->at(0.6));
  const auto cpl = smot::build_decreasing_coupling(pair);
  const double m_up = pair.m_upper();
  for (double frac : {0.15, 0.4, 0.7, 0.9}) {
    const double x = cpl.x1() + (m_up - cpl.x1()) * frac;
    const double tu = cpl.tu(x);
    EXPECT_NEAR(cpl.equation_residual(x, tu), 0.0, 1e-8);
    EXPECT_NEAR(cpl.integral_residual(x, tu), 0.0, 1e-8);
  }
}

TEST(coupling, tu_decreasing_td_increasing_across_band) {
  for (const auto& fam :
       {smot::make_uniform_family(), smot::make_bachelier_family(),
        smot::make_gbm_family()}) {
    const double t = std::fmax(fam->t_min(), 0.25);
    const auto pair =
        smot::measure_pair::build(fam->at(t), fam->at(t + 0.3));
    const auto cpl = smot::build_decreasing_coupling(pair);
    const double m_up = pair.m_upper();
    std::vector<double> xs;
    for (int i = 1; i < 30; ++i) {
      xs.push_back(cpl.x1() + (m_up - cpl.x1()) * i / 30.0);
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
      EXPECT_LE(cpl.tu(xs[i]), cpl.tu(xs[i - 1]) + 1e-10)
          << fam->name() << " x=" << xs[i];
      EXPECT_GE(cpl.td(xs[i]), cpl.td(xs[i - 1]) - 1e-10)
          << fam->name() << " x=" << xs[i];
    }
  }
}

TEST(coupling, sampled_pushforward_matches_target_marginal) {
  // cheap version of the full pushforward check: 1e5 draws, KS < 1e-2
  const auto fam = smot::make_uniform_family();
  const auto pair = smot::measure_pair::build(fam->at(0.1), fam->at(0.5));
  const auto cpl = smot::build_decreasing_coupling(pair);
  auto gen = smot::make_stream(2024, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = 100000;
  std::vector<double> ys(n);
  for (int i = 0; i < n; ++i) {
    const double x = pair.mu().quantile(unif(gen));
    ys[i] = cpl.sample(x, unif(gen));
  }
  const double ks =
      smot::ks_distance(ys, [&](double y) { return pair.nu().cdf(y); });
  EXPECT_LT(ks, 1e-2);
}

TEST(coupling, dump_covers_all_regions) {
  const auto fam = smot::make_uniform_family();
  const auto pair = smot::measure_pair::build(fam->at(0.0), fam->at(0.4));
  const auto cpl = smot::build_decreasing_coupling(pair);
  std::vector<double> xs;
  for (int j = 0; j < 101; ++j) {
    xs.push_back(pair.mu().quantile((j + 0.5) / 101.0));
  }
  const auto rows = cpl.dump(xs);
  ASSERT_EQ(rows.size(), xs.size());
  int below = 0, band = 0;
  for (const auto& r : rows) {
    if (r.x <= cpl.x1()) {
      ++below;
      EXPECT_EQ(r.q, 0.0);
    } else if (r.x < pair.m_upper()) {
      ++band;
      EXPECT_GT(r.q, 0.0);
      EXPECT_NEAR(r.q * r.tu + (1.0 - r.q) * r.td, r.x, 1e-9);
    }
  }
  EXPECT_GT(below, 0);
  EXPECT_GT(band, 0);
}

TEST(coupling, increasing_uniform_phase_point) {
  for (double t : {0.0, 0.3}) {
    for (double eps : {0.5, 0.2}) {
      const auto cpl = smot::increasing_coupling_uniform(t, eps);
      EXPECT_NEAR(cpl.x1(), uniform_x1_eps_increasing(t, eps), 1e-9)
          << "t=" << t << " eps=" << eps;
      // y1 sits one band-width lower: x1 - e^{t+eps} - e^{2t}
      EXPECT_NEAR(cpl.y1(),
                  cpl.x1() - std::exp(t + eps) - std::exp(2.0 * t), 1e-8);
    }
  }
}

TEST(coupling, increasing_martingale_identity_below_x1) {
  const auto cpl = smot::increasing_coupling_uniform(0.2, 0.3);
  const double lo = -std::exp(0.4);  // lower support end at t = 0.2
  for (int i = 1; i < 20; ++i) {
    const double x = lo + (cpl.x1() - lo) * i / 20.0;
    const double q = cpl.q(x);
    if (q > 0.0) {
      EXPECT_NEAR(q * cpl.tu(x) + (1.0 - q) * cpl.td(x), x, 1e-9);
    }
    // antitone region above x1 must be a strict supermartingale move
    const double xa = cpl.x1() + (std::exp(0.2) - cpl.x1()) * i / 20.0;
    EXPECT_LT(cpl.td(xa), xa);
  }
}

TEST(coupling, increasing_pushforward_matches_target_marginal) {
  const double t = 0.1, eps = 0.4;
  const auto fam = smot::make_uniform_family();
  const auto cpl = smot::increasing_coupling_uniform(t, eps);
  auto gen = smot::make_stream(77, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = 100000;
  std::vector<double> ys(n);
  for (int i = 0; i < n; ++i) {
    const double x = fam->quantile(t, unif(gen));
    ys[i] = cpl.sample(x, unif(gen));
  }
  const double ks = smot::ks_distance(
      ys, [&](double y) { return fam->cdf(t + eps, y); });
  EXPECT_LT(ks, 1e-2);
}

}  // namespace
