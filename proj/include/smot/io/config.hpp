// SPDX-License-Identifier: MIT
#pragma once

/// @file config.hpp
/// @brief Versioned JSON run configuration: schema, validation, round-trip.
///
/// The schema is strict by design: a `schema_version` field is mandatory and
/// unknown fields are rejected with their full dotted path, so that a config
/// that parses today parses identically tomorrow (or fails loudly).  The
/// normalized echo written into every run manifest re-parses to an equal
/// configuration.

#include <cstdint>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "smot/errors.hpp"
#include "smot/families.hpp"
#include "smot/io/csv.hpp"
#include "smot/tabulated.hpp"
#include "smot/version.hpp"

namespace smot {

struct family_config {
  std::string name = "uniform";  ///< uniform | bachelier | gbm | tabulated
  double delta = 0.05;           ///< initial-law width for bachelier / gbm
  std::string table_path;        ///< CSV `t,x,f`, required for tabulated
};

struct coupling_config {
  double t = 0.0;        ///< first marginal time
  double epsilon = 0.5;  ///< second marginal at t + epsilon
  int grid = 201;        ///< quantile grid for the CSV dump
};

struct curve_config {
  int n_times = 101;             ///< sample count on [t_min, 1]
  std::vector<double> epsilons;  ///< optional x1^eps sweep columns
};

struct simulate_config {
  std::string scheme = "sde";  ///< sde | chain | increasing
  double dt = 1e-3;            ///< SDE step
  int n_periods = 64;          ///< chain periods
  int n_paths = 10000;
  std::vector<double> report_times{0.25, 0.5, 0.75, 1.0};
  int dump_paths = 100;  ///< cap on paths written to paths.csv (0 = none)
};

struct duality_config {
  std::string cost = "exp";    ///< exp | zero | quadratic
  std::string scheme = "sde";  ///< ensemble for the hedge check: sde | chain
  double dt = 1e-3;
  int n_periods = 16;
  int n_paths = 10000;
  int t_nodes = 128;    ///< time nodes for the value quadrature
  int t_slices = 257;   ///< dual time slices
  int band_nodes = 129; ///< dual band nodes per slice
  int cont_nodes = 129; ///< dual continuation nodes per slice
  double tol_hedge = 1e-3;
  double violation_threshold = 0.01;  ///< exit code 4 above this fraction
};

struct run_config {
  int schema_version = config_schema_version;
  family_config family;
  std::uint64_t seed = 12345;
  int threads = 0;  ///< 0 = resolve from SMOT_THREADS, else 1
  std::string out_dir = "out";
  coupling_config coupling;
  curve_config curve;
  simulate_config simulate;
  duality_config duality;
};

namespace detail {

/// Context-carrying reader: every lookup is checked and every unknown key
/// is reported with its dotted path.
class json_reader {
 public:
  json_reader(const nlohmann::json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw validation_error("config: '" + path_ + "' must be an object");
    }
  }

  template <class T>
  void get(const char* key, T& out) {
    if (auto it = j_.find(key); it != j_.end()) {
      read(*it, key, out);
      seen_.insert(key);
    }
  }

  template <class T>
  void require(const char* key, T& out) {
    auto it = j_.find(key);
    if (it == j_.end()) {
      throw validation_error("config: missing required field '" + join(key) +
                             "'");
    }
    read(*it, key, out);
    seen_.insert(key);
  }

  /// Marks a sub-object as consumed and returns a reader for it.
  [[nodiscard]] const nlohmann::json* sub(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    if (!it->is_object()) {
      throw validation_error("config: '" + join(key) + "' must be an object");
    }
    seen_.insert(key);
    return &*it;
  }

  /// Call after all fields were consumed.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (seen_.count(it.key()) == 0) {
        throw validation_error("config: unknown field '" + join(it.key()) +
                               "'");
      }
    }
  }

  [[nodiscard]] std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  template <class T>
  void read(const nlohmann::json& v, const char* key, T& out) {
    try {
      out = v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw validation_error("config: field '" + join(key) +
                             "' has the wrong type");
    }
  }

  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

[[nodiscard]] inline run_config parse_config(const nlohmann::json& j) {
  run_config cfg;
  detail::json_reader top(j, "");
  top.require("schema_version", cfg.schema_version);
  if (cfg.schema_version != config_schema_version) {
    throw validation_error(
        "config: schema_version " + std::to_string(cfg.schema_version) +
        " unsupported (expected " + std::to_string(config_schema_version) +
        ")");
  }
  if (const auto* jf = top.sub("family")) {
    detail::json_reader r(*jf, "family");
    r.require("family", cfg.family.name);
    r.get("delta", cfg.family.delta);
    r.get("table_path", cfg.family.table_path);
    r.finish();
  } else {
    throw validation_error("config: missing required field 'family'");
  }
  top.get("seed", cfg.seed);
  top.get("threads", cfg.threads);
  top.get("out_dir", cfg.out_dir);
  if (const auto* jc = top.sub("coupling")) {
    detail::json_reader r(*jc, "coupling");
    r.get("t", cfg.coupling.t);
    r.get("epsilon", cfg.coupling.epsilon);
    r.get("grid", cfg.coupling.grid);
    r.finish();
  }
  if (const auto* jc = top.sub("curve")) {
    detail::json_reader r(*jc, "curve");
    r.get("n_times", cfg.curve.n_times);
    r.get("epsilons", cfg.curve.epsilons);
    r.finish();
  }
  if (const auto* js = top.sub("simulate")) {
    detail::json_reader r(*js, "simulate");
    r.get("scheme", cfg.simulate.scheme);
    r.get("dt", cfg.simulate.dt);
    r.get("n_periods", cfg.simulate.n_periods);
    r.get("n_paths", cfg.simulate.n_paths);
    r.get("report_times", cfg.simulate.report_times);
    r.get("dump_paths", cfg.simulate.dump_paths);
    r.finish();
  }
  if (const auto* jd = top.sub("duality")) {
    detail::json_reader r(*jd, "duality");
    r.get("cost", cfg.duality.cost);
    r.get("scheme", cfg.duality.scheme);
    r.get("dt", cfg.duality.dt);
    r.get("n_periods", cfg.duality.n_periods);
    r.get("n_paths", cfg.duality.n_paths);
    r.get("t_nodes", cfg.duality.t_nodes);
    r.get("t_slices", cfg.duality.t_slices);
    r.get("band_nodes", cfg.duality.band_nodes);
    r.get("cont_nodes", cfg.duality.cont_nodes);
    r.get("tol_hedge", cfg.duality.tol_hedge);
    r.get("violation_threshold", cfg.duality.violation_threshold);
    r.finish();
  }
  top.finish();

  // Cross-field validation, before any compute.
  auto bad = [](const std::string& msg) {
    throw validation_error("config: " + msg);
  };
  const std::set<std::string> families{"uniform", "bachelier", "gbm",
                                       "tabulated"};
  if (families.count(cfg.family.name) == 0) {
    bad("family '" + cfg.family.name +
        "' unknown (uniform | bachelier | gbm | tabulated)");
  }
  if (cfg.family.name == "tabulated" && cfg.family.table_path.empty()) {
    bad("family.table_path is required for the tabulated family");
  }
  if (!(cfg.family.delta > 0.0)) bad("family.delta must be > 0");
  if (!(cfg.coupling.epsilon > 0.0)) bad("coupling.epsilon must be > 0");
  if (!(cfg.coupling.t >= 0.0) || cfg.coupling.t + cfg.coupling.epsilon > 1.0 + 1e-12) {
    bad("coupling times must satisfy 0 <= t and t + epsilon <= 1");
  }
  if (cfg.coupling.grid < 2) bad("coupling.grid must be >= 2");
  if (cfg.curve.n_times < 2) bad("curve.n_times must be >= 2");
  for (double e : cfg.curve.epsilons) {
    if (!(e > 0.0 && e < 1.0)) bad("curve.epsilons entries must be in (0, 1)");
  }
  if (cfg.simulate.scheme != "sde" && cfg.simulate.scheme != "chain" &&
      cfg.simulate.scheme != "increasing") {
    bad("simulate.scheme must be sde | chain | increasing");
  }
  if (cfg.simulate.scheme == "increasing" && cfg.family.name != "uniform") {
    bad("simulate.scheme 'increasing' supports only the uniform family "
        "(the construction degenerates for unbounded supports)");
  }
  if (!(cfg.simulate.dt > 0.0 && cfg.simulate.dt <= 0.1)) {
    bad("simulate.dt must be in (0, 0.1]");
  }
  if (cfg.simulate.n_periods < 1) bad("simulate.n_periods must be >= 1");
  if (cfg.simulate.n_paths < 1) bad("simulate.n_paths must be >= 1");
  if (cfg.simulate.dump_paths < 0) bad("simulate.dump_paths must be >= 0");
  for (double t : cfg.simulate.report_times) {
    if (!(t <= 1.0 + 1e-12)) bad("simulate.report_times must lie in [t_min, 1]");
  }
  if (cfg.duality.cost != "exp" && cfg.duality.cost != "zero" &&
      cfg.duality.cost != "quadratic") {
    bad("duality.cost must be exp | zero | quadratic");
  }
  if (cfg.duality.scheme != "sde" && cfg.duality.scheme != "chain") {
    bad("duality.scheme must be sde | chain");
  }
  if (!(cfg.duality.dt > 0.0 && cfg.duality.dt <= 0.1)) {
    bad("duality.dt must be in (0, 0.1]");
  }
  if (cfg.duality.n_periods < 1) bad("duality.n_periods must be >= 1");
  if (cfg.duality.n_paths < 1) bad("duality.n_paths must be >= 1");
  if (cfg.duality.t_nodes < 2) bad("duality.t_nodes must be >= 2");
  if (cfg.duality.t_slices < 5) bad("duality.t_slices must be >= 5");
  if (cfg.duality.band_nodes < 9) bad("duality.band_nodes must be >= 9");
  if (cfg.duality.cont_nodes < 9) bad("duality.cont_nodes must be >= 9");
  if (!(cfg.duality.tol_hedge > 0.0)) bad("duality.tol_hedge must be > 0");
  if (!(cfg.duality.violation_threshold > 0.0)) {
    bad("duality.violation_threshold must be > 0");
  }
  if (cfg.threads < 0) bad("threads must be >= 0");
  return cfg;
}

[[nodiscard]] inline run_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw validation_error("config: cannot open '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("config: '" + path + "' is not valid JSON: " +
                           e.what());
  }
  return parse_config(j);
}

/// Normalized echo: every accepted field with defaults materialized.
[[nodiscard]] inline nlohmann::json config_to_json(const run_config& cfg) {
  nlohmann::json j;
  j["schema_version"] = cfg.schema_version;
  j["family"] = {{"family", cfg.family.name}, {"delta", cfg.family.delta}};
  if (!cfg.family.table_path.empty()) {
    j["family"]["table_path"] = cfg.family.table_path;
  }
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["out_dir"] = cfg.out_dir;
  j["coupling"] = {{"t", cfg.coupling.t},
                   {"epsilon", cfg.coupling.epsilon},
                   {"grid", cfg.coupling.grid}};
  j["curve"] = {{"n_times", cfg.curve.n_times},
                {"epsilons", cfg.curve.epsilons}};
  j["simulate"] = {{"scheme", cfg.simulate.scheme},
                   {"dt", cfg.simulate.dt},
                   {"n_periods", cfg.simulate.n_periods},
                   {"n_paths", cfg.simulate.n_paths},
                   {"report_times", cfg.simulate.report_times},
                   {"dump_paths", cfg.simulate.dump_paths}};
  j["duality"] = {{"cost", cfg.duality.cost},
                  {"scheme", cfg.duality.scheme},
                  {"dt", cfg.duality.dt},
                  {"n_periods", cfg.duality.n_periods},
                  {"n_paths", cfg.duality.n_paths},
                  {"t_nodes", cfg.duality.t_nodes},
                  {"t_slices", cfg.duality.t_slices},
                  {"band_nodes", cfg.duality.band_nodes},
                  {"cont_nodes", cfg.duality.cont_nodes},
                  {"tol_hedge", cfg.duality.tol_hedge},
                  {"violation_threshold", cfg.duality.violation_threshold}};
  return j;
}

/// Instantiates the marginal family named in the config (loading the
/// tabulated CSV when needed).
[[nodiscard]] inline std::shared_ptr<const marginal_family> make_family(
    const family_config& fc) {
  if (fc.name == "uniform") return make_uniform_family();
  if (fc.name == "bachelier") return make_bachelier_family(fc.delta);
  if (fc.name == "gbm") return make_gbm_family(fc.delta);
  if (fc.name == "tabulated") {
    marginal_table tab = read_marginal_table(fc.table_path);
    return std::make_shared<tabulated_family>(
        std::move(tab.times), std::move(tab.xs), std::move(tab.fs));
  }
  throw validation_error("config: family '" + fc.name + "' unknown");
}

}  // namespace smot
