// SPDX-License-Identifier: MIT

/// @file test_families.cpp
/// @brief Marginal-family consistency: closed-form moments, CDF/quantile
/// round trips, time derivatives, the tabulated-interpolation fallback and
/// the CSV table reader.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "smot/errors.hpp"
#include "smot/families.hpp"
#include "smot/io/csv.hpp"
#include "smot/math/quadrature.hpp"
#include "smot/tabulated.hpp"

namespace {

/// Property pack every family must satisfy at a fixed time.
void check_family_at(const smot::marginal_family& fam, double t) {
  SCOPED_TRACE("t = " + std::to_string(t));
  const double lo = fam.quantile(t, 1e-9);
  const double hi = fam.quantile(t, 1.0 - 1e-9);
  ASSERT_LT(lo, hi);

  // CDF/quantile round trip
  for (double u : {0.01, 0.2, 0.5, 0.8, 0.99}) {
    const double x = fam.quantile(t, u);
    EXPECT_NEAR(fam.cdf(t, x), u, 1e-9);
  }
  // pdf is the x-derivative of the CDF
  for (double u : {0.1, 0.5, 0.9}) {
    const double x = fam.quantile(t, u);
    const double d = 1e-5 * (1.0 + std::fabs(x));
    const double fd = (fam.cdf(t, x + d) - fam.cdf(t, x - d)) / (2.0 * d);
    EXPECT_NEAR(fam.pdf(t, x), fd, 1e-5 * (1.0 + fam.pdf(t, x)));
  }
  // mean matches the quadrature of z against the density (tails trimmed at
  // 1e-7 mass each side; the truncation error is far below the tolerance)
  const double qa = fam.quantile(t, 1e-7);
  const double qb = fam.quantile(t, 1.0 - 1e-7);
  const double xmean = smot::integrate(
      [&](double z) { return z * fam.pdf(t, z); }, qa, qb, 1e-9);
  EXPECT_NEAR(fam.mean(t), xmean, 1e-4 * (1.0 + std::fabs(fam.mean(t))));
  // dt_cdf is the t-derivative of the CDF (families all have t > dt room)
  const double x_mid = fam.quantile(t, 0.5);
  const double dt = 1e-6;
  if (t - dt > fam.t_min() && t + dt < 1.0) {
    const double fd =
        (fam.cdf(t + dt, x_mid) - fam.cdf(t - dt, x_mid)) / (2.0 * dt);
    EXPECT_NEAR(fam.dt_cdf(t, x_mid), fd, 1e-5 * (1.0 + std::fabs(fd)));
  }
}

TEST(families, uniform_closed_forms) {
  const auto fam = smot::make_uniform_family();
  EXPECT_EQ(fam->kind(), smot::family_kind::uniform);
  EXPECT_DOUBLE_EQ(fam->t_min(), 0.0);
  for (double t : {0.0, 0.3, 0.7, 1.0}) {
    const double et = std::exp(t);
    // support [-e^{2t}, e^t], flat density
    EXPECT_NEAR(fam->lower(t), -et * et, 1e-12 * et * et);
    EXPECT_NEAR(fam->upper(t), et, 1e-12 * et);
    EXPECT_NEAR(fam->mean(t), (et - et * et) / 2.0, 1e-12 * et * et);
    EXPECT_NEAR(fam->pdf(t, 0.0), 1.0 / (et + et * et), 1e-14);
    check_family_at(*fam, std::fmax(t, 0.25));
  }
  // the family mean decreases: supermartingale direction
  EXPECT_GT(fam->mean(0.2), fam->mean(0.8));
}

TEST(families, bachelier_is_shifted_normal) {
  const auto fam = smot::make_bachelier_family();
  EXPECT_EQ(fam->kind(), smot::family_kind::bachelier);
  ASSERT_GT(fam->t_min(), 0.0);  // needs positive variance to disperse
  for (double t : {fam->t_min(), 0.4, 1.0}) {
    EXPECT_NEAR(fam->mean(t), -t, 1e-10);
    // variance t: quantile(0.975) - mean = 1.96 sqrt(t)
    EXPECT_NEAR(fam->quantile(t, 0.975) + t, 1.959963984540054 * std::sqrt(t),
                1e-9);
    check_family_at(*fam, t);
  }
}

TEST(families, gbm_is_lognormal) {
  const auto fam = smot::make_gbm_family();
  EXPECT_EQ(fam->kind(), smot::family_kind::gbm);
  for (double t : {fam->t_min(), 0.5, 1.0}) {
    EXPECT_GE(fam->lower(t), 0.0);
    EXPECT_NEAR(fam->mean(t), std::exp(-t / 2.0), 1e-9);
    // median of exp(N(-t, t)) is exp(-t)
    EXPECT_NEAR(fam->quantile(t, 0.5), std::exp(-t), 1e-9);
    check_family_at(*fam, t);
  }
}

TEST(families, time_domain_is_validated) {
  // at() is the validating entry point; the scalar evaluators are hot paths
  // and trust their caller.
  const auto fam = smot::make_bachelier_family();
  EXPECT_THROW((void)fam->at(fam->t_min() - 0.01), smot::validation_error);
  EXPECT_THROW((void)fam->at(1.5), smot::validation_error);
  EXPECT_THROW((void)smot::make_uniform_family()->at(-0.2),
               smot::validation_error);
}

TEST(families, at_returns_consistent_measure) {
  const auto fam = smot::make_uniform_family();
  const smot::measure mu = fam->at(0.5);
  EXPECT_NEAR(mu.mean(), fam->mean(0.5), 1e-10);
  EXPECT_NEAR(mu.cdf(0.0), fam->cdf(0.5, 0.0), 1e-14);
  EXPECT_NEAR(mu.tail_mean(mu.lower() - 1.0), mu.mean(), 1e-10);
  EXPECT_NEAR(mu.tail_mean(mu.upper() + 1.0), 0.0, 1e-12);
  // unnormalized upper-tail mean against direct quadrature
  const double y = 0.3;
  const double ref = smot::integrate(
      [&](double z) { return z * mu.pdf(z); }, y, mu.upper(), 1e-11);
  EXPECT_NEAR(mu.tail_mean(y), ref, 1e-8);
}

TEST(families, tabulated_tracks_its_source) {
  const auto src = smot::make_uniform_family();
  const auto tab = smot::tabulate_family(*src, 33, 257);
  ASSERT_TRUE(tab);
  EXPECT_EQ(tab->kind(), smot::family_kind::tabulated);
  for (double t : {0.1, 0.5, 0.9}) {
    for (double u : {0.05, 0.5, 0.95}) {
      const double x = src->quantile(t, u);
      EXPECT_NEAR(tab->cdf(t, x), src->cdf(t, x), 1e-3);
      EXPECT_NEAR(tab->quantile(t, u), x, 2e-3 * (1.0 + std::fabs(x)));
    }
    EXPECT_NEAR(tab->mean(t), src->mean(t), 5e-3);
  }
}

TEST(families, marginal_table_reader_round_trip) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "smot_test_families";
  fs::create_directories(dir);
  const fs::path file = dir / "table.csv";

  const auto src = smot::make_uniform_family();
  {
    std::ofstream out(file);
    out << "t,x,f\n";
    for (int i = 0; i < 9; ++i) {
      const double t = i / 8.0;
      for (int j = 0; j < 65; ++j) {
        const double u = 1e-4 + (1.0 - 2e-4) * j / 64.0;
        const double x = src->quantile(t, u);
        out << smot::csv_num(t) << ',' << smot::csv_num(x) << ','
            << smot::csv_num(src->pdf(t, x)) << '\n';
      }
    }
  }
  const smot::marginal_table table = smot::read_marginal_table(file.string());
  EXPECT_EQ(table.times.size(), 9u);
  const auto fam = std::make_shared<smot::tabulated_family>(
      table.times, table.xs, table.fs);
  EXPECT_NEAR(fam->cdf(0.5, src->quantile(0.5, 0.5)), 0.5, 5e-3);
}

TEST(families, marginal_table_reader_rejects_bad_input) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "smot_test_families";
  fs::create_directories(dir);

  {
    std::ofstream out(dir / "bad_header.csv");
    out << "time,x,f\n0,0,1\n";
  }
  EXPECT_THROW(smot::read_marginal_table((dir / "bad_header.csv").string()),
               smot::validation_error);

  {
    std::ofstream out(dir / "bad_number.csv");
    out << "t,x,f\n0,zero,1\n";
  }
  EXPECT_THROW(smot::read_marginal_table((dir / "bad_number.csv").string()),
               smot::validation_error);

  {
    std::ofstream out(dir / "one_slice.csv");
    out << "t,x,f\n0,0,1\n0,1,1\n";
  }
  EXPECT_THROW(smot::read_marginal_table((dir / "one_slice.csv").string()),
               smot::validation_error);

  EXPECT_THROW(smot::read_marginal_table((dir / "missing.csv").string()),
               smot::validation_error);
}

}  // namespace
