// SPDX-License-Identifier: MIT
#pragma once

/// @file commands.hpp
/// @brief CLI command bodies: orchestration, CSV emission, run manifests.
///
/// Each command is an ordinary function so tests can drive it in-process.
/// A command always writes `manifest.json` into the output directory — on
/// success with the result numbers, on failure with the error detail — and
/// returns the process exit code (0 ok, 2 validation, 3 non-convergence,
/// 4 threshold exceeded).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smot/coupling.hpp"
#include "smot/curve.hpp"
#include "smot/duality.hpp"
#include "smot/errors.hpp"
#include "smot/families.hpp"
#include "smot/io/config.hpp"
#include "smot/io/csv.hpp"
#include "smot/simulate.hpp"
#include "smot/version.hpp"

namespace smot {

/// Threads to use: explicit config wins, then SMOT_THREADS, then 1.
[[nodiscard]] inline int resolve_threads(const run_config& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("SMOT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

namespace detail {

[[nodiscard]] inline cost_function cost_by_name(const std::string& name) {
  if (name == "exp") return default_cost();
  if (name == "zero") return zero_cost();
  if (name == "quadratic") return quadratic_cost();
  throw validation_error("duality.cost '" + name + "' unknown");
}

/// Evaluation box for the cost admissibility checks: the state space the
/// run can actually visit, estimated from both end-time marginals.
inline void validate_cost_for_family(const cost_function& cost,
                                     const marginal_family& fam) {
  const double t0 = fam.t_min();
  const double lo =
      std::fmin(fam.quantile(t0, 1e-3), fam.quantile(1.0, 1e-3));
  const double hi =
      std::fmax(fam.quantile(t0, 1.0 - 1e-3), fam.quantile(1.0, 1.0 - 1e-3));
  validate_cost(cost, lo, hi);
}

/// Wraps a command body with manifest bookkeeping and error-to-exit-code
/// mapping.  The body fills `manifest["numbers"]` / `["checks"]` as it goes,
/// so a late failure (threshold) still reports everything computed so far.
inline int run_command(const run_config& cfg, const std::string& command,
                       const std::function<void(nlohmann::json&)>& body) {
  namespace fs = std::filesystem;
  const auto start = std::chrono::steady_clock::now();
  nlohmann::json manifest;
  manifest["tool"] = "smot";
  manifest["version"] = version_string;
  manifest["command"] = command;
  manifest["config"] = config_to_json(cfg);
  manifest["status"] = "ok";
  manifest["error"] = nullptr;
  manifest["checks"] = nlohmann::json::array();
  manifest["numbers"] = nlohmann::json::object();

  int code = exit_ok;
  try {
    fs::create_directories(cfg.out_dir);
    body(manifest);
  } catch (const validation_error& e) {
    code = exit_validation;
    manifest["status"] = "error";
    manifest["error"] = {{"type", "validation"}, {"message", e.what()}};
  } catch (const convergence_error& e) {
    code = exit_convergence;
    manifest["status"] = "error";
    manifest["error"] = {{"type", "convergence"}, {"message", e.what()}};
  } catch (const threshold_error& e) {
    code = exit_threshold;
    manifest["status"] = "error";
    manifest["error"] = {{"type", "threshold"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    code = 1;
    manifest["status"] = "error";
    manifest["error"] = {{"type", "runtime"}, {"message", e.what()}};
  }
  manifest["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  const fs::path mpath = fs::path(cfg.out_dir) / "manifest.json";
  std::ofstream out(mpath);
  if (out) {
    out << manifest.dump(2) << '\n';
  } else {
    std::fprintf(stderr, "smot: cannot write %s\n", mpath.string().c_str());
    if (code == exit_ok) code = 1;
  }
  if (code != exit_ok && !manifest["error"].is_null()) {
    std::fprintf(stderr, "smot %s: %s: %s\n", command.c_str(),
                 manifest["error"]["type"].get<std::string>().c_str(),
                 manifest["error"]["message"].get<std::string>().c_str());
  }
  return code;
}

}  // namespace detail

/// `dump-coupling`: one-period decreasing coupling for (t, t+epsilon),
/// kernel table over a quantile grid plus the phase-point block.
inline int cmd_dump_coupling(const run_config& cfg) {
  return detail::run_command(cfg, "dump-coupling", [&](nlohmann::json& m) {
    const auto fam = make_family(cfg.family);
    const double t = cfg.coupling.t, eps = cfg.coupling.epsilon;
    const measure_pair pair =
        measure_pair::build(fam->at(t), fam->at(t + eps));
    const one_period_coupling cpl = build_decreasing_coupling(pair);

    std::vector<double> xs(static_cast<std::size_t>(cfg.coupling.grid));
    for (std::size_t j = 0; j < xs.size(); ++j) {
      xs[j] = pair.mu().quantile((j + 0.5) / static_cast<double>(xs.size()));
    }
    csv_writer csv((std::filesystem::path(cfg.out_dir) / "coupling.csv")
                       .string());
    csv.row({"x", "T_d", "T_u", "q"});
    for (const auto& r : cpl.dump(xs)) {
      csv.numeric_row({r.x, r.td, r.tu, r.q});
    }

    nlohmann::json block = {{"x1", cpl.x1()},
                            {"y1", cpl.y1()},
                            {"m_lower", pair.m_lower()},
                            {"m_upper", pair.m_upper()}};
    std::ofstream jf(std::filesystem::path(cfg.out_dir) / "coupling.json");
    jf << block.dump(2) << '\n';

    m["numbers"] = block;
    m["numbers"]["has_transition"] = cpl.has_transition();
    for (const auto& w : pair.warnings()) m["numbers"]["warnings"].push_back(w);

    // Conservation at the phase point: mass and mean of the upper tails
    // must coincide (the coupling is a martingale above x1).
    const double mass_res =
        pair.nu().cdf(cpl.y1()) - pair.mu().cdf(cpl.x1());
    const double mean_res =
        pair.nu().tail_mean(cpl.y1()) - pair.mu().tail_mean(cpl.x1());
    m["numbers"]["mass_residual"] = mass_res;
    m["numbers"]["mean_residual"] = mean_res;
    m["checks"].push_back({{"name", "phase_point_conservation"},
                           {"pass", std::fabs(mass_res) < 1e-8 &&
                                        std::fabs(mean_res) < 1e-8}});
  });
}

/// `transition-curve`: x1(t), m(t) and the family mean over a time grid,
/// with optional finite-horizon x1^eps sweep columns.
inline int cmd_transition_curve(const run_config& cfg) {
  return detail::run_command(cfg, "transition-curve", [&](nlohmann::json& m) {
    const auto fam = make_family(cfg.family);
    const double t0 = fam->t_min();
    const int n = cfg.curve.n_times;

    std::vector<std::string> header{"t", "x1", "m", "mean"};
    for (double e : cfg.curve.epsilons) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "x1_eps_%g", e);
      header.emplace_back(buf);
    }
    csv_writer csv(
        (std::filesystem::path(cfg.out_dir) / "curve.csv").string());
    csv.row(header);

    nlohmann::json samples = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
      const double t = t0 + (1.0 - t0) * i / (n - 1);
      double x1 = 0.0, mm = 0.0;
      try {
        x1 = solve_x1_curve(*fam, t);
        mm = solve_m_curve(*fam, t);
      } catch (const convergence_error& e) {
        throw convergence_error("transition-curve at t = " +
                                std::to_string(t) + ": " + e.what());
      } catch (const validation_error& e) {
        throw validation_error("transition-curve at t = " + std::to_string(t) +
                               ": " + e.what());
      }
      std::vector<std::string> row{csv_num(t), csv_num(x1), csv_num(mm),
                                   csv_num(fam->mean(t))};
      for (double e : cfg.curve.epsilons) {
        if (t + e <= 1.0 + 1e-12) {
          const measure_pair pair =
              measure_pair::build(fam->at(t), fam->at(std::fmin(t + e, 1.0)));
          row.push_back(csv_num(build_decreasing_coupling(pair).x1()));
        } else {
          row.push_back("");  // x1^eps undefined past t = 1 - eps
        }
      }
      csv.row(row);
      if (i % ((n - 1) / 4 == 0 ? 1 : (n - 1) / 4) == 0) {
        samples.push_back({{"t", t}, {"x1", x1}, {"m", mm}});
      }
    }
    m["numbers"]["curve_samples"] = samples;
    m["checks"].push_back({{"name", "curve_solved"}, {"pass", true}});
  });
}

/// `simulate`: path ensemble for the configured scheme, event dump and
/// per-report-time statistics (mean, variance, KS against the family law).
inline int cmd_simulate(const run_config& cfg) {
  return detail::run_command(cfg, "simulate", [&](nlohmann::json& m) {
    const auto fam = make_family(cfg.family);
    const int threads = resolve_threads(cfg);
    const bool record = cfg.simulate.dump_paths > 0;

    path_ensemble ens;
    if (cfg.simulate.scheme == "sde") {
      cont_characteristics chars(fam);
      sde_options so;
      so.n_paths = cfg.simulate.n_paths;
      so.dt = cfg.simulate.dt;
      so.seed = cfg.seed;
      so.report_times = cfg.simulate.report_times;
      so.record_paths = record;
      so.threads = threads;
      ens = run_sde(chars, so);
    } else if (cfg.simulate.scheme == "chain") {
      chain_options co;
      co.n_paths = cfg.simulate.n_paths;
      co.seed = cfg.seed;
      co.report_times = cfg.simulate.report_times;
      co.record_paths = record;
      co.threads = threads;
      ens = run_discrete_chain(
          fam, partition::uniform_mesh(fam->t_min(), cfg.simulate.n_periods),
          co);
    } else {  // increasing (uniform only, enforced at config validation)
      sde_options so;
      so.n_paths = cfg.simulate.n_paths;
      so.dt = cfg.simulate.dt;
      so.seed = cfg.seed;
      so.report_times = cfg.simulate.report_times;
      so.record_paths = record;
      so.threads = threads;
      ens = run_increasing_uniform(*fam, so);
    }

    if (record) {
      csv_writer pcsv(
          (std::filesystem::path(cfg.out_dir) / "paths.csv").string());
      pcsv.row({"path_id", "time", "pre", "post"});
      const std::size_t cap =
          std::min<std::size_t>(ens.paths.size(),
                                static_cast<std::size_t>(cfg.simulate.dump_paths));
      for (std::size_t p = 0; p < cap; ++p) {
        const jump_path& jp = ens.paths[p];
        pcsv.row({csv_num(static_cast<double>(p)), csv_num(ens.t0),
                  csv_num(jp.t0_value), csv_num(jp.t0_value)});
        for (const auto& ev : jp.events) {
          pcsv.row({csv_num(static_cast<double>(p)), csv_num(ev.time),
                    csv_num(ev.pre), csv_num(ev.post)});
        }
      }
    }

    const ensemble_statistics st = path_statistics(ens, *fam);
    csv_writer scsv(
        (std::filesystem::path(cfg.out_dir) / "stats.csv").string());
    scsv.row({"t", "mean", "var", "ks"});
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : st.rows) {
      scsv.numeric_row({r.t, r.mean, r.var, r.ks});
      rows.push_back(
          {{"t", r.t}, {"mean", r.mean}, {"var", r.var}, {"ks", r.ks}});
    }
    m["numbers"]["stats"] = rows;
    m["numbers"]["largest_jump"] = st.largest_jump;
    m["numbers"]["jump_count_hist"] = st.jump_count_hist;
    nlohmann::json drift = nlohmann::json::array();
    bool drift_ok = true;
    for (const auto& d : st.drift) {
      drift.push_back({{"t_from", d.t_from},
                       {"t_to", d.t_to},
                       {"violations", d.violations},
                       {"worst", d.worst}});
      drift_ok = drift_ok && d.violations == 0;
    }
    m["numbers"]["drift_checks"] = drift;
    m["checks"].push_back(
        {{"name", "supermartingale_drift"}, {"pass", drift_ok}});
  });
}

/// `duality-gap`: optimal value by quadrature vs Monte Carlo, superhedge
/// verification on the simulated ensemble, per-path residual export.
/// Nonzero exit (code 4) iff the violation fraction exceeds the configured
/// threshold.
inline int cmd_duality_gap(const run_config& cfg) {
  return detail::run_command(cfg, "duality-gap", [&](nlohmann::json& m) {
    const auto fam = make_family(cfg.family);
    const cost_function cost = detail::cost_by_name(cfg.duality.cost);
    detail::validate_cost_for_family(cost, *fam);

    cont_characteristics chars(fam);
    dual_options dopt;
    dopt.t_slices = cfg.duality.t_slices;
    dopt.band_nodes = cfg.duality.band_nodes;
    dopt.cont_nodes = cfg.duality.cont_nodes;
    const dual_strategy dual(chars, cost, dopt);

    const auto qv = optimal_value_quadrature(chars, cost, cfg.duality.t_nodes);
    const int threads = resolve_threads(cfg);

    path_ensemble ens;
    if (cfg.duality.scheme == "sde") {
      sde_options so;
      so.n_paths = cfg.duality.n_paths;
      so.dt = cfg.duality.dt;
      so.seed = cfg.seed;
      so.record_paths = true;
      so.threads = threads;
      ens = run_sde(chars, so);
    } else {
      chain_options co;
      co.n_paths = cfg.duality.n_paths;
      co.seed = cfg.seed;
      co.record_paths = true;
      co.threads = threads;
      ens = run_discrete_chain(
          fam, partition::uniform_mesh(fam->t_min(), cfg.duality.n_periods),
          co);
    }
    const mc_estimate mc = payoff_monte_carlo(ens, cost);

    hedge_options ho;
    ho.tol_hedge = cfg.duality.tol_hedge;
    ho.threads = threads;
    const hedge_report hr = verify_superhedge_on_paths(dual, ens, cost, ho);

    {
      csv_writer rcsv(
          (std::filesystem::path(cfg.out_dir) / "residuals.csv").string());
      rcsv.row({"path_id", "residual"});
      for (std::size_t p = 0; p < hr.residuals.size(); ++p) {
        rcsv.numeric_row({static_cast<double>(p), hr.residuals[p]});
      }
    }

    const double gap = std::fabs(qv.value - mc.mean);
    const double gap_bound = 3.0 * mc.se + 1e-3;
    std::printf("quantity            value\n");
    std::printf("quadrature value    %.10f (est err %.3g)\n", qv.value,
                qv.abs_error);
    std::printf("MC primal           %.10f +- %.3g (n = %lld)\n", mc.mean,
                mc.se, static_cast<long long>(mc.n));
    std::printf("|gap|               %.3g (bound %.3g)\n", gap, gap_bound);
    std::printf("hedge residual min  %.6g\n", hr.min_residual);
    std::printf("hedge residual mean %.6g\n", hr.mean_residual);
    std::printf("violation fraction  %.6g (threshold %.3g)\n",
                hr.violation_fraction, cfg.duality.violation_threshold);

    m["numbers"]["quadrature_value"] = qv.value;
    m["numbers"]["quadrature_error"] = qv.abs_error;
    m["numbers"]["quadrature_warnings"] = qv.warnings;
    m["numbers"]["mc_mean"] = mc.mean;
    m["numbers"]["mc_se"] = mc.se;
    m["numbers"]["mc_n"] = mc.n;
    m["numbers"]["gap"] = gap;
    m["numbers"]["gap_bound"] = gap_bound;
    m["numbers"]["residual_min"] = hr.min_residual;
    m["numbers"]["residual_mean"] = hr.mean_residual;
    m["numbers"]["residual_max"] = hr.max_residual;
    m["numbers"]["violation_fraction"] = hr.violation_fraction;
    m["numbers"]["total_jumps"] = hr.total_jumps;
    m["checks"].push_back(
        {{"name", "primal_dual_gap"}, {"pass", gap < gap_bound}});
    m["checks"].push_back(
        {{"name", "hedge_violations"},
         {"pass", hr.violation_fraction <= cfg.duality.violation_threshold}});

    if (hr.violation_fraction > cfg.duality.violation_threshold) {
      std::ostringstream os;
      os << "hedge violation fraction " << hr.violation_fraction
         << " exceeds threshold " << cfg.duality.violation_threshold;
      throw threshold_error(os.str());
    }
  });
}

/// Dispatch by command name; unknown names are a validation error.
inline int run_named_command(const std::string& name, const run_config& cfg) {
  if (name == "dump-coupling") return cmd_dump_coupling(cfg);
  if (name == "transition-curve") return cmd_transition_curve(cfg);
  if (name == "simulate") return cmd_simulate(cfg);
  if (name == "duality-gap") return cmd_duality_gap(cfg);
  throw validation_error("unknown command '" + name + "'");
}

}  // namespace smot
