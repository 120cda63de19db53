// SPDX-License-Identifier: MIT

/// @file acceptance.cpp
/// @brief End-to-end acceptance suite. Runs nine numbered checks covering
/// the library's main claims — phase curves, one-period couplings, path
/// simulation, discrete-to-continuous convergence, duality and the dual
/// strategy's structure — each with pinned tolerances and a wall-clock
/// budget, and prints exactly one [PASS]/[FAIL] line per check.
///
/// Exit code: number of failed checks (0 when everything passes).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "smot/coupling.hpp"
#include "smot/curve.hpp"
#include "smot/duality.hpp"
#include "smot/families.hpp"
#include "smot/math/rng.hpp"
#include "smot/math/stats.hpp"
#include "smot/simulate.hpp"

namespace {

struct check_outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class harness {
 public:
  void run(int id, const std::string& name, double budget_s,
           const std::function<void(check_outcome&)>& body) {
    check_outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      body(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.note(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (secs > budget_s) {
      out.pass = false;
      out.note("over budget " + fmt(budget_s) + " s");
    }
    if (!out.pass) ++failures_;
    std::printf("[%s] %d %s (%s) [%.1f s]\n", out.pass ? "PASS" : "FAIL", id,
                name.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
  }

  [[nodiscard]] int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

/// Closed-form finite-horizon phase point of the uniform family (decreasing
/// coupling): the tail mass/mean conservation pair solved symbolically.
double uniform_x1_eps(double t, double eps) {
  const double a = std::exp(t);
  const double b = std::exp(t + eps);
  return (a * (b * b - b + a) + a * a * (a - 2.0 * b)) /
         (b + b * b - a - a * a);
}

/// Same for the increasing coupling.
double uniform_x1_eps_increasing(double t, double eps) {
  const double et = std::exp(t);
  const double ee = std::exp(eps);
  return (et * et * et * (1.0 - ee * ee) +
          et * (2.0 * ee + et * (1.0 + ee))) /
         (1.0 + ee + et * (1.0 + ee * ee));
}

// ---------------------------------------------------------------------------
// 1. uniform phase curve: generic solver against the closed form, both in
//    the continuous-time limit and at finite horizons
// ---------------------------------------------------------------------------
void check_uniform_phase_curve(check_outcome& out) {
  const auto fam = smot::make_uniform_family();
  double worst_cont = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    const double et = std::exp(t);
    const double closed = -et / (1.0 + 2.0 * et);
    worst_cont =
        std::fmax(worst_cont, std::fabs(smot::solve_x1_generic(*fam, t) -
                                        closed));
  }
  out.require(worst_cont < 1e-9,
              "x1 curve err " + fmt(worst_cont) + " >= 1e-9");
  out.note("x1 curve err " + fmt(worst_cont));

  double worst_eps = 0.0;
  for (double eps : {0.1, 0.01}) {
    for (int i = 0; i <= 20; ++i) {
      const double t = (1.0 - eps) * i / 20.0;
      const auto pair =
          smot::measure_pair::build(fam->at(t), fam->at(t + eps));
      const double got = smot::build_decreasing_coupling(pair).x1();
      worst_eps = std::fmax(worst_eps,
                            std::fabs(got - uniform_x1_eps(t, eps)));
    }
  }
  out.require(worst_eps < 1e-7,
              "finite-horizon x1 err " + fmt(worst_eps) + " >= 1e-7");
  out.note("finite-horizon err " + fmt(worst_eps));
}

// ---------------------------------------------------------------------------
// 2. bachelier/gbm phase points: quadrature-defined root against each
//    family's scalar transcendental equation
// ---------------------------------------------------------------------------
void check_transcendental_roots(check_outcome& out) {
  const auto bach = smot::make_bachelier_family();
  const auto gbm = smot::make_gbm_family();
  double worst = 0.0;
  for (double t : {0.25, 0.5, 0.75, 1.0}) {
    worst = std::fmax(worst, std::fabs(smot::solve_x1_generic(*bach, t) -
                                       smot::solve_x1_curve(*bach, t)));
    worst = std::fmax(worst, std::fabs(smot::solve_x1_generic(*gbm, t) -
                                       smot::solve_x1_curve(*gbm, t)));
  }
  out.require(worst < 1e-6, "root mismatch " + fmt(worst) + " >= 1e-6");
  out.note("worst mismatch " + fmt(worst));
}

// ---------------------------------------------------------------------------
// 3. one-period couplings: pushforward, martingale identity and phase-point
//    conservation across six marginal pairs
// ---------------------------------------------------------------------------
void check_one_period_couplings(check_outcome& out) {
  struct pair_case {
    const char* family;
    double t, eps;
  };
  const pair_case cases[] = {
      {"uniform", 0.0, 0.5},   {"uniform", 0.3, 0.4},
      {"bachelier", 0.25, 0.25}, {"bachelier", 0.5, 0.5},
      {"gbm", 0.25, 0.5},      {"gbm", 0.5, 0.25}};
  double worst_ks = 0.0, worst_mart = 0.0, worst_cons = 0.0;
  int case_id = 0;
  for (const auto& pc : cases) {
    std::shared_ptr<const smot::marginal_family> fam;
    if (std::string(pc.family) == "uniform") {
      fam = smot::make_uniform_family();
    } else if (std::string(pc.family) == "bachelier") {
      fam = smot::make_bachelier_family();
    } else {
      fam = smot::make_gbm_family();
    }
    const auto pair =
        smot::measure_pair::build(fam->at(pc.t), fam->at(pc.t + pc.eps));
    const auto cpl = smot::build_decreasing_coupling(pair);

    // pushforward of mu through the kernel lands on nu
    auto gen = smot::make_stream(4242, static_cast<std::uint64_t>(case_id));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = 1000000;
    std::vector<double> ys(n);
    for (int i = 0; i < n; ++i) {
      ys[i] = cpl.sample(pair.mu().quantile(unif(gen)), unif(gen));
    }
    worst_ks = std::fmax(
        worst_ks,
        smot::ks_distance(std::move(ys),
                          [&](double y) { return pair.nu().cdf(y); }));

    // exact recentering of the two-point kernels
    const double m_up = pair.m_upper();
    for (int i = 1; i < 200; ++i) {
      const double x = cpl.x1() + (m_up - cpl.x1()) * i / 200.0;
      const double q = cpl.q(x);
      worst_mart = std::fmax(
          worst_mart,
          std::fabs(q * cpl.tu(x) + (1.0 - q) * cpl.td(x) - x));
    }

    // tail mass and tail mean agree at the phase points
    worst_cons = std::fmax(
        worst_cons, std::fabs(pair.nu().cdf(cpl.y1()) -
                              pair.mu().cdf(cpl.x1())));
    worst_cons = std::fmax(
        worst_cons, std::fabs(pair.nu().tail_mean(cpl.y1()) -
                              pair.mu().tail_mean(cpl.x1())));
    ++case_id;
  }
  out.require(worst_ks < 2e-3, "pushforward KS " + fmt(worst_ks) + " >= 2e-3");
  out.require(worst_mart < 1e-10,
              "martingale identity err " + fmt(worst_mart) + " >= 1e-10");
  out.require(worst_cons < 1e-8,
              "phase-point conservation err " + fmt(worst_cons) + " >= 1e-8");
  out.note("KS " + fmt(worst_ks) + ", recenter " + fmt(worst_mart) +
           ", conservation " + fmt(worst_cons));
}

// ---------------------------------------------------------------------------
// 4. SDE marginal matching, plus improvement under time-step refinement
// ---------------------------------------------------------------------------
void check_sde_marginals(check_outcome& out) {
  const auto fam = smot::make_uniform_family();
  const smot::cont_characteristics chars(fam);

  smot::sde_options opt;
  opt.n_paths = 100000;
  opt.dt = 1e-3;
  opt.seed = 2024;
  opt.record_paths = false;
  opt.report_times = {0.25, 0.5, 1.0};
  const auto ens = smot::run_sde(chars, opt);
  const auto st = smot::path_statistics(ens, *fam);
  double worst_ks = 0.0;
  for (const auto& r : st.rows) worst_ks = std::fmax(worst_ks, r.ks);
  out.require(worst_ks < 5e-3, "KS " + fmt(worst_ks) + " >= 5e-3");
  out.note("KS " + fmt(worst_ks) + " at 1e5 paths");

  // refinement: mean terminal KS over five seeds must improve with dt
  auto mean_ks = [&](double dt) {
    double acc = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      smot::sde_options o;
      o.n_paths = 20000;
      o.dt = dt;
      o.seed = seed;
      o.record_paths = false;
      o.report_times = {1.0};
      const auto e = smot::run_sde(chars, o);
      acc += smot::path_statistics(e, *fam).rows[0].ks;
    }
    return acc / 5.0;
  };
  const double coarse = mean_ks(4e-3);
  const double fine = mean_ks(1e-3);
  out.require(fine < coarse, "refinement did not improve KS (" + fmt(coarse) +
                                 " -> " + fmt(fine) + ")");
  out.note("5-seed KS " + fmt(coarse) + " -> " + fmt(fine));
}

// ---------------------------------------------------------------------------
// 5. discrete chains converge to the SDE law as the mesh refines
// ---------------------------------------------------------------------------
void check_chain_convergence(check_outcome& out) {
  const auto fam = smot::make_uniform_family();
  const smot::cont_characteristics chars(fam);
  const double t_star = 0.73;
  const int n_paths = 100000;

  smot::sde_options so;
  so.n_paths = n_paths;
  so.dt = 1e-3;
  so.seed = 515;
  so.record_paths = false;
  so.report_times = {t_star};
  const auto ref = smot::run_sde(chars, so);

  std::vector<double> w1s;
  for (int n : {16, 64, 256}) {
    smot::chain_options co;
    co.n_paths = n_paths;
    co.seed = 616;
    co.record_paths = false;
    co.report_times = {t_star};
    const auto chain = smot::run_discrete_chain(
        fam, smot::partition::uniform_mesh(fam->t_min(), n), co);
    w1s.push_back(smot::wasserstein1(chain.values[0], ref.values[0]));
  }
  out.require(w1s[1] < w1s[0] && w1s[2] < w1s[1],
              "W1 not decreasing: " + fmt(w1s[0]) + ", " + fmt(w1s[1]) +
                  ", " + fmt(w1s[2]));
  out.require(w1s[2] < 0.02, "final W1 " + fmt(w1s[2]) + " >= 0.02");
  out.note("W1 " + fmt(w1s[0]) + " -> " + fmt(w1s[1]) + " -> " + fmt(w1s[2]));
}

// ---------------------------------------------------------------------------
// 6. duality: quadrature value against Monte Carlo, and the one-period
//    value identity
// ---------------------------------------------------------------------------
void check_duality_values(check_outcome& out) {
  const auto cost = smot::default_cost();
  struct mc_case {
    const char* name;
    std::shared_ptr<const smot::marginal_family> fam;
    int n_paths;
  };
  const mc_case cases[] = {{"uniform", smot::make_uniform_family(), 20000},
                           {"bachelier", smot::make_bachelier_family(),
                            10000}};
  for (const auto& c : cases) {
    const smot::cont_characteristics chars(c.fam);
    const auto quad = smot::optimal_value_quadrature(chars, cost);
    smot::sde_options so;
    so.n_paths = c.n_paths;
    so.dt = 1e-3;
    so.seed = 2024;
    so.record_paths = true;
    const auto ens = smot::run_sde(chars, so);
    const auto mc = smot::payoff_monte_carlo(ens, cost);
    const double diff = std::fabs(mc.mean - quad.value);
    const double bound = 3.0 * mc.se + 1e-3;
    out.require(diff < bound, std::string(c.name) + " MC gap " + fmt(diff) +
                                  " >= " + fmt(bound));
    out.note(std::string(c.name) + " |MC-quad| " + fmt(diff) + " < " +
             fmt(bound));
  }

  // one-period value identity mu(phi) + nu(psi) = E[c], relative
  struct op_case {
    std::shared_ptr<const smot::marginal_family> fam;
    double t, eps;
  };
  const op_case ops[] = {{smot::make_uniform_family(), 0.3, 0.1},
                         {smot::make_bachelier_family(), 0.25, 0.25},
                         {smot::make_gbm_family(), 0.5, 0.5}};
  double worst_rel = 0.0;
  for (const auto& o : ops) {
    const auto pair =
        smot::measure_pair::build(o.fam->at(o.t), o.fam->at(o.t + o.eps));
    const smot::one_period_dual dual(smot::build_decreasing_coupling(pair),
                                     cost);
    worst_rel = std::fmax(worst_rel, dual.values().gap_rel);
  }
  out.require(worst_rel < 1e-5,
              "one-period identity rel gap " + fmt(worst_rel) + " >= 1e-5");
  out.note("one-period rel gap " + fmt(worst_rel));
}

// ---------------------------------------------------------------------------
// 7. pathwise superhedge on simulated ensembles
// ---------------------------------------------------------------------------
void check_superhedge(check_outcome& out) {
  const auto fam = smot::make_uniform_family();
  const smot::cont_characteristics chars(fam);
  const auto cost = smot::default_cost();
  const smot::dual_strategy dual(chars, cost);

  smot::sde_options so;
  so.n_paths = 10000;
  so.dt = 1e-3;
  so.seed = 2024;
  so.record_paths = true;
  const auto sde = smot::run_sde(chars, so);
  const auto rep_sde = smot::verify_superhedge_on_paths(dual, sde, cost);
  out.require(rep_sde.violation_fraction <= 0.01,
              "sde violations " + fmt(rep_sde.violation_fraction) + " > 1%");
  out.note("sde min residual " + fmt(rep_sde.min_residual) + ", violations " +
           fmt(rep_sde.violation_fraction));

  smot::chain_options co;
  co.n_paths = 10000;
  co.seed = 77;
  co.record_paths = true;
  const auto chain = smot::run_discrete_chain(
      fam, smot::partition::uniform_mesh(fam->t_min(), 16), co);
  const auto rep_chain = smot::verify_superhedge_on_paths(dual, chain, cost);
  out.require(rep_chain.violation_fraction <= 0.01,
              "chain violations " + fmt(rep_chain.violation_fraction) +
                  " > 1%");
  out.note("chain min residual " + fmt(rep_chain.min_residual));
}

// ---------------------------------------------------------------------------
// 8. increasing-coupling dynamics for the uniform family
// ---------------------------------------------------------------------------
void check_increasing_dynamics(check_outcome& out) {
  const auto fam = smot::make_uniform_family();
  smot::sde_options opt;
  opt.n_paths = 100000;
  opt.dt = 1e-3;
  opt.seed = 808;
  opt.record_paths = true;
  opt.report_times = {0.25, 0.5, 1.0};
  const auto ens = smot::run_increasing_uniform(*fam, opt);

  const auto st = smot::path_statistics(ens, *fam);
  double worst_ks = 0.0;
  for (const auto& r : st.rows) worst_ks = std::fmax(worst_ks, r.ks);
  out.require(worst_ks < 5e-3, "KS " + fmt(worst_ks) + " >= 5e-3");

  // every downward jump lands bitwise on the moving lower support edge
  std::size_t jumps = 0, off_edge = 0;
  for (const auto& p : ens.paths) {
    for (const auto& ev : p.events) {
      ++jumps;
      if (ev.post != -std::exp(2.0 * ev.time)) ++off_edge;
    }
  }
  out.require(jumps > 0, "no jump events recorded");
  out.require(off_edge == 0,
              std::to_string(off_edge) + " of " + std::to_string(jumps) +
                  " jumps missed the support edge");

  // finite-horizon increasing phase points against the closed form
  double worst_x1 = 0.0;
  for (double eps : {0.3, 0.1, 0.05}) {
    for (int i = 0; i <= 10; ++i) {
      const double t = (1.0 - eps) * i / 10.0;
      const smot::increasing_coupling_uniform cpl(t, eps);
      worst_x1 = std::fmax(
          worst_x1, std::fabs(cpl.x1() - uniform_x1_eps_increasing(t, eps)));
    }
  }
  out.require(worst_x1 < 1e-9,
              "increasing x1 err " + fmt(worst_x1) + " >= 1e-9");
  out.note("KS " + fmt(worst_ks) + ", " + std::to_string(jumps) +
           " edge jumps, x1 err " + fmt(worst_x1));
}

// ---------------------------------------------------------------------------
// 9. structure of the continuous-time dual position
// ---------------------------------------------------------------------------
void check_dual_structure(check_outcome& out) {
  smot::dual_options dopt;
  dopt.band_nodes = 513;
  dopt.cont_nodes = 257;
  const auto cost = smot::default_cost();

  struct fam_case {
    const char* name;
    std::shared_ptr<const smot::marginal_family> fam;
  };
  const fam_case cases[] = {{"uniform", smot::make_uniform_family()},
                            {"bachelier", smot::make_bachelier_family()}};
  double worst_fd = 0.0, worst_cont = 0.0, worst_neg = 0.0, worst_sup = 0.0;
  for (const auto& c : cases) {
    const smot::cont_characteristics chars(c.fam);
    const smot::dual_strategy dual(chars, cost, dopt);
    const double t0 = chars.t_min();

    auto gen = smot::make_stream(99, 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // nonnegative in the band, identically zero left of the phase curve
    for (int i = 0; i < 10000; ++i) {
      const double t = t0 + (1.0 - t0) * (0.01 + 0.98 * unif(gen));
      const double x1 = chars.x1(t), m = chars.m(t);
      const double xb = x1 + (m - x1) * unif(gen);
      worst_neg = std::fmin(worst_neg, dual.h_star(t, xb));
      const double lo = c.fam->quantile(t, 1e-5);
      const double xs = lo + (x1 - lo) * unif(gen);
      worst_sup = std::fmax(worst_sup, std::fabs(dual.h_star(t, xs)));
    }

    // continuity across the phase curve and the band top
    const double dx = 1e-7;
    for (int i = 1; i <= 20; ++i) {
      const double t = t0 + (1.0 - t0) * i / 21.0;
      const double x1 = chars.x1(t), m = chars.m(t);
      worst_cont = std::fmax(worst_cont, std::fabs(dual.h_star(t, x1 + dx)));
      worst_cont = std::fmax(worst_cont,
                             std::fabs(dual.h_star(t, m - dx) -
                                       dual.h_star(t, m + dx)));
    }

    // slope identity partial_x psi* = -h*, stencils kept inside one piece
    const double d = 5e-5;
    int used = 0;
    for (int i = 0; i < 20000 && used < 10000; ++i) {
      const double t = t0 + (1.0 - t0) * (0.01 + 0.98 * unif(gen));
      const double x1 = chars.x1(t), m = chars.m(t);
      const double span = m - x1;
      double x;
      if (unif(gen) < 0.7) {
        x = x1 + span * unif(gen);  // band
        if (x - d <= x1 + 2.0 * d || x + d >= m - 2.0 * d) continue;
      } else {
        x = m + span * unif(gen);  // continuation above the band
        if (x - d <= m + 2.0 * d) continue;
      }
      const double fd =
          (dual.psi_star(t, x + d) - dual.psi_star(t, x - d)) / (2.0 * d);
      worst_fd = std::fmax(worst_fd, std::fabs(fd + dual.h_star(t, x)));
      ++used;
    }
  }
  out.require(worst_neg >= -1e-12, "h* negative: " + fmt(worst_neg));
  out.require(worst_sup <= 1e-12,
              "h* nonzero on supermartingale region: " + fmt(worst_sup));
  out.require(worst_cont < 1e-6,
              "h* discontinuity " + fmt(worst_cont) + " >= 1e-6");
  out.require(worst_fd < 1e-6,
              "slope identity err " + fmt(worst_fd) + " >= 1e-6");
  out.note("continuity " + fmt(worst_cont) + ", slope err " + fmt(worst_fd));
}

}  // namespace

int main() {
  harness h;
  h.run(1, "uniform phase curve vs closed forms", 5.0,
        check_uniform_phase_curve);
  h.run(2, "bachelier/gbm integral vs transcendental roots", 10.0,
        check_transcendental_roots);
  h.run(3, "one-period coupling pushforward and identities", 60.0,
        check_one_period_couplings);
  h.run(4, "sde marginal matching and dt refinement", 120.0,
        check_sde_marginals);
  h.run(5, "discrete chain converges to sde law", 180.0,
        check_chain_convergence);
  h.run(6, "primal-dual values agree", 180.0, check_duality_values);
  h.run(7, "pathwise superhedge", 120.0, check_superhedge);
  h.run(8, "increasing-coupling dynamics", 120.0, check_increasing_dynamics);
  h.run(9, "dual position structure", 120.0, check_dual_structure);

  if (h.failures() == 0) {
    std::printf("acceptance: all 9 checks passed\n");
  } else {
    std::printf("acceptance: %d check(s) FAILED\n", h.failures());
  }
  return h.failures();
}
