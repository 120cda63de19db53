// SPDX-License-Identifier: MIT
#pragma once

/// @file simulate.hpp
/// @brief Path generation: n-period coupling chains and the limiting SDE.
///
/// Two schemes produce ensembles over [t_min, 1]:
///
///   * run_discrete_chain — iterates one-period decreasing couplings over a
///     partition; the embedded path is piecewise constant between partition
///     points, and every intermediate marginal is matched by construction.
///   * run_sde — Euler/thinning scheme for the limiting pure-jump process:
///     in the martingale band a jump to Tu(t,X) is accepted with probability
///     intensity*dt, otherwise the state drifts by -jd*dt; in the
///     supermartingale region the motion is pure drift at rate -jd. The
///     regime and all coefficients use the pre-step state (the X_{s-} of the
///     dynamics); transitions are recorded at the post-step time.
///   * run_increasing_uniform — the increasing-coupling variant for the
///     uniform family: upward drift at rate ju compensating downward jumps
///     to the lower support end -e^{2t}; when the drift reaches the rising
///     upper boundary e^s the path is forced to jump to -e^{2s}.
///
/// Paths are reproducible: path p draws from an independent substream
/// derived from (seed, p), so ensembles are identical for a given seed
/// regardless of how paths are partitioned across threads. The walk_*
/// function templates drive a visitor with every transition; ensemble
/// collection and hedge verification are both built on them, which lets the
/// duality checks replay an ensemble exactly without storing dense paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "smot/coupling.hpp"
#include "smot/curve.hpp"
#include "smot/errors.hpp"
#include "smot/families.hpp"
#include "smot/math/rng.hpp"
#include "smot/math/stats.hpp"

namespace smot {

/// Time partition for the discrete chain.
struct partition {
  std::vector<double> times;

  static partition uniform_mesh(double t0, int n_periods) {
    if (n_periods < 1) {
      throw validation_error("partition: need at least one period");
    }
    partition p;
    p.times.resize(static_cast<std::size_t>(n_periods) + 1);
    for (int k = 0; k <= n_periods; ++k) {
      p.times[static_cast<std::size_t>(k)] =
          t0 + (1.0 - t0) * static_cast<double>(k) / n_periods;
    }
    p.times.back() = 1.0;
    return p;
  }

  [[nodiscard]] double mesh() const {
    double m = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      m = std::max(m, times[i] - times[i - 1]);
    }
    return m;
  }

  void validate() const {
    if (times.size() < 2) {
      throw validation_error("partition: need at least two times");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) {
        std::ostringstream os;
        os << "partition: times must be strictly increasing (t[" << i - 1
           << "] = " << times[i - 1] << ", t[" << i << "] = " << times[i]
           << ")";
        throw validation_error(os.str());
      }
    }
  }
};

/// One recorded discontinuity of a path.
struct jump_event {
  double time = 0.0;
  double pre = 0.0;   ///< left limit X_{s-}
  double post = 0.0;  ///< X_s
};

/// Sparse path: initial value plus its jumps. Chain paths are piecewise
/// constant between events; SDE paths drift between events at the known
/// regime rate, so dense values are reconstructed by replay when needed.
struct jump_path {
  double t0_value = 0.0;
  std::vector<jump_event> events;
};

enum class scheme_kind { discrete_chain, continuous_sde, increasing_uniform };

struct path_ensemble {
  scheme_kind scheme = scheme_kind::continuous_sde;
  std::uint64_t seed = 0;
  double t0 = 0.0;
  double dt = 0.0;     ///< SDE step, or chain mesh
  int n_periods = 0;   ///< chain only
  int n_paths = 0;
  std::vector<double> report_times;
  /// values[i][p] = state of path p at report_times[i] (cadlag evaluation
  /// on the scheme's own grid).
  std::vector<std::vector<double>> values;
  std::vector<jump_path> paths;  ///< filled when record_paths is set
};

struct sde_options {
  int n_paths = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  std::optional<double> x0;  ///< fixed start; default samples mu_{t_min}
  std::vector<double> report_times{1.0};
  bool record_paths = true;
  int threads = 1;
};

struct chain_options {
  int n_paths = 10000;
  std::uint64_t seed = 1;
  std::optional<double> x0;
  std::vector<double> report_times{1.0};
  bool record_paths = false;  ///< every period is an event; off by default
  int threads = 1;
  coupling_options copt{};
};

/// One emitted transition of a walker. The path state on [t, t_next) is x;
/// at t_next it becomes x_next. For jumps, jump_pre is the left limit used
/// in event records and payoffs — it equals x except when a forced boundary
/// hit snaps the limit onto the boundary itself.
struct transition {
  double t = 0.0;
  double x = 0.0;
  double t_next = 0.0;
  double x_next = 0.0;
  bool jumped = false;
  double jump_pre = 0.0;
};

namespace detail {

/// Visitor contract shared by all walkers:
///   begin_path(p, t0, x0)
///   step(tr)                for every transition, in time order
///   end_path(p, x_final)
///
/// Records report-time values (and optionally sparse jumps) into
/// preallocated ensemble slots, so concurrent workers never contend.
class ensemble_collector {
 public:
  ensemble_collector(path_ensemble& out, bool record_paths)
      : out_(out), record_(record_paths) {}

  void begin_path(int p, double /*t0*/, double x0) {
    p_ = static_cast<std::size_t>(p);
    rp_ = 0;
    if (record_) out_.paths[p_].t0_value = x0;
  }
  void step(const transition& tr) {
    while (rp_ < out_.report_times.size() &&
           out_.report_times[rp_] < tr.t_next - 1e-12) {
      out_.values[rp_][p_] = tr.x;
      ++rp_;
    }
    if (tr.jumped && record_) {
      out_.paths[p_].events.push_back({tr.t_next, tr.jump_pre, tr.x_next});
    }
  }
  void end_path(int /*p*/, double x_final) {
    for (; rp_ < out_.report_times.size(); ++rp_) {
      out_.values[rp_][p_] = x_final;
    }
  }

 private:
  path_ensemble& out_;
  bool record_;
  std::size_t p_ = 0;
  std::size_t rp_ = 0;
};

inline void check_path_count(int n_paths) {
  if (n_paths < 1) {
    throw validation_error("n_paths must be >= 1, got " +
                           std::to_string(n_paths));
  }
}

inline void check_report_times(const std::vector<double>& ts, double t0) {
  for (double t : ts) {
    if (t < t0 - 1e-12 || t > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "report time " << t << " outside [" << t0 << ", 1]";
      throw validation_error(os.str());
    }
  }
  if (!std::is_sorted(ts.begin(), ts.end())) {
    throw validation_error("report times must be sorted");
  }
}

template <class PerPath>
void run_over_threads(int n_paths, int threads, PerPath&& per_path) {
  threads = std::max(1, threads);
  if (threads == 1 || n_paths < 2 * threads) {
    per_path(0, n_paths);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  const int chunk = (n_paths + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n_paths, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&per_path, lo, hi] { per_path(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Drives `vis` over SDE path indices [p_begin, p_end). See the visitor
/// contract in detail::walk_range.
template <class Visitor>
void walk_sde(const cont_characteristics& chars, const sde_options& opt,
              int p_begin, int p_end, Visitor&& vis) {
  const marginal_family& fam = chars.family();
  const double t0 = fam.t_min();
  const int n = std::max(1, static_cast<int>(std::llround((1.0 - t0) / opt.dt)));
  const double span = 1.0 - t0;
  std::vector<double> tk(static_cast<std::size_t>(n) + 1);
  std::vector<double> x1k(tk.size()), mk(tk.size()), lok(tk.size());
  for (int k = 0; k <= n; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    tk[ku] = t0 + span * static_cast<double>(k) / n;
    x1k[ku] = chars.x1(tk[ku]);
    mk[ku] = chars.m(tk[ku]);
    lok[ku] = fam.lower(tk[ku]);
  }
  tk.back() = 1.0;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int p = p_begin; p < p_end; ++p) {
    auto rng = make_stream(opt.seed, static_cast<std::uint64_t>(p));
    double x = opt.x0 ? *opt.x0 : fam.quantile(t0, u01(rng));
    vis.begin_path(p, t0, x);
    for (int k = 0; k < n; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double t = tk[ku], tn = tk[ku + 1];
      const double h = tn - t;
      double xn = x;
      bool jumped = false;
      if (x <= x1k[ku]) {
        // supermartingale region: deterministic drift, clamped so the state
        // never falls below the (possibly moving) lower support end
        const double jd =
            std::max(0.0, fam.dt_cdf(t, x) / fam.pdf(t, x));
        xn = std::max(x - jd * h, lok[ku + 1]);
      } else if (x < mk[ku]) {
        const jump_chars jc = chars.eval(t, x);
        if (jc.jd * h > mk[ku] - x1k[ku]) {
          std::ostringstream os;
          os << "walk_sde: drift step " << jc.jd * h
             << " exceeds the band width " << mk[ku] - x1k[ku] << " at t=" << t
             << ", x=" << x << "; reduce dt";
          throw convergence_error(os.str());
        }
        if (u01(rng) < std::min(jc.intensity * h, 1.0)) {
          xn = chars.tu(t, x);
          jumped = true;
        } else {
          xn = std::max(x - jc.jd * h, lok[ku + 1]);
        }
      }
      // else diagonal: rest
      vis.step({t, x, tn, xn, jumped, x});
      x = xn;
    }
    vis.end_path(p, x);
  }
}

/// Increasing-coupling dynamics for the uniform family, same protocol.
template <class Visitor>
void walk_increasing_uniform(const marginal_family& fam,
                             const sde_options& opt, int p_begin, int p_end,
                             Visitor&& vis) {
  if (fam.kind() != family_kind::uniform) {
    throw validation_error(
        "walk_increasing_uniform: only the uniform family is supported");
  }
  const double t0 = fam.t_min();
  const int n = std::max(1, static_cast<int>(std::llround((1.0 - t0) / opt.dt)));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int p = p_begin; p < p_end; ++p) {
    auto rng = make_stream(opt.seed, static_cast<std::uint64_t>(p));
    double x = opt.x0 ? *opt.x0 : fam.quantile(t0, u01(rng));
    vis.begin_path(p, t0, x);
    for (int k = 0; k < n; ++k) {
      const double t = t0 + (1.0 - t0) * static_cast<double>(k) / n;
      const double tn =
          (k + 1 == n) ? 1.0 : t0 + (1.0 - t0) * static_cast<double>(k + 1) / n;
      const double h = tn - t;
      const increasing_chars ic = eval_increasing_chars_uniform(fam, t, x);
      double xn;
      bool jumped = false;
      double jump_pre = x;
      if (u01(rng) < std::min(ic.intensity * h, 1.0)) {
        // Down-jumps land exactly on the lower support end at the time the
        // event is stamped (t_next), matching the collector's convention.
        xn = -std::exp(2.0 * tn);
        jumped = true;
      } else {
        xn = x + ic.ju * h;
        const double r_next = std::exp(tn);
        if (xn >= r_next) {
          // forced boundary event: reaching r_s sends the path to ell_s
          jump_pre = r_next;
          xn = -std::exp(2.0 * tn);
          jumped = true;
        }
      }
      vis.step({t, x, tn, xn, jumped, jump_pre});
      x = xn;
    }
    vis.end_path(p, x);
  }
}

/// Chain over an explicit partition; couplings are built once per interval
/// (shared across paths) before walking.
class chain_walker {
 public:
  chain_walker(std::shared_ptr<const marginal_family> fam, partition part,
               coupling_options copt = {})
      : fam_(std::move(fam)), part_(std::move(part)) {
    part_.validate();
    if (std::fabs(part_.times.front() - fam_->t_min()) > 1e-9 ||
        std::fabs(part_.times.back() - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "partition must span [" << fam_->t_min() << ", 1], got ["
         << part_.times.front() << ", " << part_.times.back() << "]";
      throw validation_error(os.str());
    }
    couplings_.reserve(part_.times.size() - 1);
    for (std::size_t k = 0; k + 1 < part_.times.size(); ++k) {
      try {
        auto pair = measure_pair::build(fam_->at(part_.times[k]),
                                        fam_->at(part_.times[k + 1]), copt);
        couplings_.push_back(build_decreasing_coupling(std::move(pair), copt));
      } catch (const error& e) {
        std::ostringstream os;
        os << "interval [" << part_.times[k] << ", " << part_.times[k + 1]
           << "]: " << e.what();
        throw convergence_error(os.str());
      }
    }
  }

  [[nodiscard]] const partition& grid() const { return part_; }
  [[nodiscard]] const one_period_coupling& coupling(std::size_t k) const {
    return couplings_[k];
  }

  template <class Visitor>
  void walk(std::uint64_t seed, std::optional<double> x0, int p_begin,
            int p_end, Visitor&& vis) const {
    const double t0 = part_.times.front();
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int p = p_begin; p < p_end; ++p) {
      auto rng = make_stream(seed, static_cast<std::uint64_t>(p));
      double x = x0 ? *x0 : fam_->at(t0).quantile(u01(rng));
      vis.begin_path(p, t0, x);
      for (std::size_t k = 0; k < couplings_.size(); ++k) {
        const double xn = couplings_[k].sample(x, u01(rng));
        vis.step({part_.times[k], x, part_.times[k + 1], xn, xn != x, x});
        x = xn;
      }
      vis.end_path(p, x);
    }
  }

 private:
  std::shared_ptr<const marginal_family> fam_;
  partition part_;
  std::vector<one_period_coupling> couplings_;
};

namespace detail {

inline path_ensemble make_ensemble(scheme_kind scheme, double t0,
                                   std::uint64_t seed, double dt,
                                   int n_periods, int n_paths,
                                   std::vector<double> report_times,
                                   bool record_paths) {
  path_ensemble e;
  e.scheme = scheme;
  e.seed = seed;
  e.t0 = t0;
  e.dt = dt;
  e.n_periods = n_periods;
  e.n_paths = n_paths;
  e.report_times = std::move(report_times);
  e.values.assign(e.report_times.size(),
                  std::vector<double>(static_cast<std::size_t>(n_paths), 0.0));
  if (record_paths) e.paths.resize(static_cast<std::size_t>(n_paths));
  return e;
}

}  // namespace detail

inline path_ensemble run_sde(const cont_characteristics& chars,
                             const sde_options& opt) {
  const double t0 = chars.family().t_min();
  detail::check_path_count(opt.n_paths);
  if (!(opt.dt > 0.0)) throw validation_error("dt must be positive");
  detail::check_report_times(opt.report_times, t0);
  auto e = detail::make_ensemble(scheme_kind::continuous_sde, t0, opt.seed,
                                 opt.dt, 0, opt.n_paths, opt.report_times,
                                 opt.record_paths);
  detail::run_over_threads(opt.n_paths, opt.threads, [&](int lo, int hi) {
    detail::ensemble_collector col(e, opt.record_paths);
    walk_sde(chars, opt, lo, hi, col);
  });
  return e;
}

inline path_ensemble run_increasing_uniform(const marginal_family& fam,
                                            const sde_options& opt) {
  const double t0 = fam.t_min();
  detail::check_path_count(opt.n_paths);
  if (!(opt.dt > 0.0)) throw validation_error("dt must be positive");
  detail::check_report_times(opt.report_times, t0);
  auto e = detail::make_ensemble(scheme_kind::increasing_uniform, t0, opt.seed,
                                 opt.dt, 0, opt.n_paths, opt.report_times,
                                 opt.record_paths);
  detail::run_over_threads(opt.n_paths, opt.threads, [&](int lo, int hi) {
    detail::ensemble_collector col(e, opt.record_paths);
    walk_increasing_uniform(fam, opt, lo, hi, col);
  });
  return e;
}

inline path_ensemble run_discrete_chain(
    std::shared_ptr<const marginal_family> fam, const partition& part,
    const chain_options& opt) {
  const double t0 = fam->t_min();
  detail::check_path_count(opt.n_paths);
  detail::check_report_times(opt.report_times, t0);
  chain_walker walker(std::move(fam), part, opt.copt);
  auto e = detail::make_ensemble(
      scheme_kind::discrete_chain, t0, opt.seed, part.mesh(),
      static_cast<int>(part.times.size()) - 1, opt.n_paths, opt.report_times,
      opt.record_paths);
  detail::run_over_threads(opt.n_paths, opt.threads, [&](int lo, int hi) {
    detail::ensemble_collector col(e, opt.record_paths);
    walker.walk(opt.seed, opt.x0, lo, hi, col);
  });
  return e;
}

/// Summary row for one report time.
struct stat_row {
  double t = 0.0;
  double mean = 0.0;
  double var = 0.0;
  double ks = 0.0;          ///< KS distance to F(t, .); NaN if degenerate
  bool degenerate = false;  ///< all values identical (KS not meaningful)
};

/// Binned conditional drift between two consecutive report times.
struct drift_check {
  double t_from = 0.0;
  double t_to = 0.0;
  int violations = 0;  ///< bins with mean drift > 3 SE
  double worst = 0.0;  ///< max over bins of mean - 3*SE (<= 0 is good)
};

struct ensemble_statistics {
  std::vector<stat_row> rows;
  std::vector<drift_check> drift;
  std::vector<std::int64_t> jump_count_hist;  ///< [k] = #paths with k jumps
  double largest_jump = 0.0;
};

inline ensemble_statistics path_statistics(const path_ensemble& e,
                                           const marginal_family& fam,
                                           int drift_bins = 30) {
  ensemble_statistics st;
  for (std::size_t i = 0; i < e.report_times.size(); ++i) {
    stat_row row;
    row.t = e.report_times[i];
    const auto mom = sample_moments(e.values[i]);
    row.mean = mom.mean;
    row.var = mom.var;
    row.degenerate = mom.var == 0.0;
    if (row.degenerate) {
      row.ks = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double t = row.t;
      row.ks = ks_distance(e.values[i],
                           [&](double x) { return fam.cdf(t, x); });
    }
    st.rows.push_back(row);
  }
  for (std::size_t i = 0; i + 1 < e.report_times.size(); ++i) {
    drift_check dc;
    dc.t_from = e.report_times[i];
    dc.t_to = e.report_times[i + 1];
    std::vector<double> delta(e.values[i].size());
    for (std::size_t p = 0; p < delta.size(); ++p) {
      delta[p] = e.values[i + 1][p] - e.values[i][p];
    }
    dc.worst = -std::numeric_limits<double>::infinity();
    for (const auto& b : binned_mean(e.values[i], delta, drift_bins)) {
      if (b.count < 2) continue;
      dc.worst = std::max(dc.worst, b.mean - 3.0 * b.se);
      if (b.mean > 3.0 * b.se) ++dc.violations;
    }
    st.drift.push_back(dc);
  }
  for (const auto& path : e.paths) {
    const std::size_t k = path.events.size();
    if (st.jump_count_hist.size() <= k) st.jump_count_hist.resize(k + 1, 0);
    ++st.jump_count_hist[k];
    for (const auto& ev : path.events) {
      st.largest_jump = std::max(st.largest_jump, std::fabs(ev.post - ev.pre));
    }
  }
  return st;
}

}  // namespace smot
