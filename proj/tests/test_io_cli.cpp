// SPDX-License-Identifier: MIT

/// @file test_io_cli.cpp
/// @brief I/O layer and command driver: CSV formatting, config schema
/// validation, round-trips, manifests and end-to-end binary runs.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "smot/cli/commands.hpp"
#include "smot/errors.hpp"
#include "smot/io/config.hpp"
#include "smot/io/csv.hpp"

namespace fs = std::filesystem;

namespace {

fs::path test_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "smot_test_io" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST(csv, escaping_follows_rfc4180) {
  EXPECT_EQ(smot::csv_escape("plain"), "plain");
  EXPECT_EQ(smot::csv_escape("with,comma"), "\"with,comma\"");
  EXPECT_EQ(smot::csv_escape("with\"quote"), "\"with\"\"quote\"");
  EXPECT_EQ(smot::csv_escape("line\nbreak"), "\"line\nbreak\"");
}

TEST(csv, numbers_round_trip_at_full_precision) {
  for (double v : {0.1, 1.0 / 3.0, -2.718281828459045e-5, 1e300, 0.0,
                   123456789.123456789}) {
    const std::string s = smot::csv_num(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
}

TEST(csv, writer_produces_unix_lines) {
  const fs::path dir = test_dir("csv_writer");
  {
    smot::csv_writer w((dir / "t.csv").string());
    w.row({"a", "b"});
    w.numeric_row({1.5, -2.0});
  }
  const std::string text = slurp(dir / "t.csv");
  EXPECT_EQ(text, "a,b\n1.5,-2\n");
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(config, minimal_config_gets_defaults) {
  const auto cfg = smot::parse_config(nlohmann::json{
      {"schema_version", 1}, {"family", {{"family", "uniform"}}}});
  EXPECT_EQ(cfg.family.name, "uniform");
  EXPECT_EQ(cfg.seed, 12345u);
  EXPECT_EQ(cfg.threads, 0);
  EXPECT_EQ(cfg.simulate.scheme, "sde");
  EXPECT_GT(cfg.duality.t_slices, 4);
}

TEST(config, unknown_fields_are_rejected_with_path) {
  try {
    (void)smot::parse_config(nlohmann::json{
        {"schema_version", 1},
        {"family", {{"family", "uniform"}}},
        {"simulate", {{"scheme", "sde"}, {"bogus_knob", 1}}}});
    FAIL() << "expected validation_error";
  } catch (const smot::validation_error& e) {
    EXPECT_NE(std::string(e.what()).find("simulate.bogus_knob"),
              std::string::npos)
        << e.what();
  }
}

TEST(config, schema_version_and_family_are_required) {
  EXPECT_THROW((void)smot::parse_config(
                   nlohmann::json{{"family", {{"family", "uniform"}}}}),
               smot::validation_error);
  EXPECT_THROW((void)smot::parse_config(nlohmann::json{{"schema_version", 1}}),
               smot::validation_error);
  EXPECT_THROW(
      (void)smot::parse_config(nlohmann::json{
          {"schema_version", 99}, {"family", {{"family", "uniform"}}}}),
      smot::validation_error);
}

TEST(config, cross_field_rules) {
  // tabulated needs a table path
  EXPECT_THROW((void)smot::parse_config(nlohmann::json{
                   {"schema_version", 1},
                   {"family", {{"family", "tabulated"}}}}),
               smot::validation_error);
  // increasing scheme exists for the uniform family only
  EXPECT_THROW((void)smot::parse_config(nlohmann::json{
                   {"schema_version", 1},
                   {"family", {{"family", "gbm"}}},
                   {"simulate", {{"scheme", "increasing"}}}}),
               smot::validation_error);
  // one-period window must stay inside [t, 1]
  EXPECT_THROW((void)smot::parse_config(nlohmann::json{
                   {"schema_version", 1},
                   {"family", {{"family", "uniform"}}},
                   {"coupling", {{"t", 0.9}, {"epsilon", 0.5}}}}),
               smot::validation_error);
}

TEST(config, echo_round_trips_exactly) {
  const nlohmann::json src{
      {"schema_version", 1},
      {"family", {{"family", "bachelier"}, {"delta", 0.02}}},
      {"seed", 99},
      {"threads", 2},
      {"out_dir", "elsewhere"},
      {"curve", {{"n_times", 11}, {"epsilons", {0.1, 0.05}}}},
      {"duality", {{"cost", "exp"}, {"n_paths", 123}}}};
  const auto cfg = smot::parse_config(src);
  const nlohmann::json echo = smot::config_to_json(cfg);
  const auto cfg2 = smot::parse_config(echo);
  EXPECT_EQ(echo, smot::config_to_json(cfg2));
  EXPECT_EQ(cfg2.curve.n_times, 11);
  EXPECT_EQ(cfg2.duality.n_paths, 123);
  EXPECT_EQ(cfg2.family.delta, 0.02);
}

TEST(config, threads_resolution_order) {
  smot::run_config cfg;
  cfg.threads = 3;
  EXPECT_EQ(smot::resolve_threads(cfg), 3);
  cfg.threads = 0;
  ::setenv("SMOT_THREADS", "5", 1);
  EXPECT_EQ(smot::resolve_threads(cfg), 5);
  ::unsetenv("SMOT_THREADS");
  EXPECT_EQ(smot::resolve_threads(cfg), 1);
}

TEST(commands, dump_coupling_writes_manifest_and_tables) {
  const fs::path dir = test_dir("dump_coupling");
  smot::run_config cfg;
  cfg.out_dir = dir.string();
  cfg.coupling.t = 0.0;
  cfg.coupling.epsilon = std::log(2.0);
  cfg.coupling.grid = 51;
  EXPECT_EQ(smot::cmd_dump_coupling(cfg), 0);

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["status"], "ok");
  EXPECT_EQ(manifest["command"], "dump-coupling");
  // the ln(2) window pins the uniform phase point at the origin
  EXPECT_NEAR(manifest["numbers"]["x1"].get<double>(), 0.0, 1e-9);
  EXPECT_LT(std::fabs(manifest["numbers"]["mass_residual"].get<double>()),
            1e-8);
  // config echo re-parses to the identical normalized form
  const auto echoed = smot::parse_config(manifest["config"]);
  EXPECT_EQ(smot::config_to_json(echoed), manifest["config"]);

  const std::string csv = slurp(dir / "coupling.csv");
  EXPECT_EQ(csv.rfind("x,T_d,T_u,q\n", 0), 0u);
  const auto block = nlohmann::json::parse(slurp(dir / "coupling.json"));
  EXPECT_NEAR(block["m_upper"].get<double>(), 1.0, 1e-8);
}

TEST(commands, failures_still_write_manifests) {
  const fs::path dir = test_dir("failure_manifest");
  smot::run_config cfg;
  cfg.out_dir = dir.string();
  cfg.family.name = "uniform";
  cfg.duality.cost = "quadratic";  // rejected by the admissibility check
  EXPECT_EQ(smot::cmd_duality_gap(cfg), smot::exit_validation);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["status"], "error");
  EXPECT_EQ(manifest["error"]["type"], "validation");
  EXPECT_NE(manifest["error"]["message"].get<std::string>().find("c_xy"),
            std::string::npos);
}

TEST(commands, unknown_command_is_a_validation_error) {
  smot::run_config cfg;
  EXPECT_THROW((void)smot::run_named_command("frobnicate", cfg),
               smot::validation_error);
}

#ifdef SMOT_CLI_PATH

int run_cli(const std::string& args, const fs::path& capture) {
  const std::string cmd =
      std::string(SMOT_CLI_PATH) + " " + args + " > " + capture.string() +
      " 2>&1";
  const int raw = std::system(cmd.c_str());
  return WEXITSTATUS(raw);
}

TEST(cli_binary, version_and_usage) {
  const fs::path dir = test_dir("cli_version");
  EXPECT_EQ(run_cli("--version", dir / "v.txt"), 0);
  EXPECT_NE(slurp(dir / "v.txt").find("0.1.0"), std::string::npos);
  // missing required --config is an input validation failure
  EXPECT_EQ(run_cli("simulate", dir / "u.txt"), 2);
}

TEST(cli_binary, missing_family_field_names_it) {
  const fs::path dir = test_dir("cli_nofam");
  {
    std::ofstream out(dir / "cfg.json");
    out << R"({"schema_version": 1, "seed": 3})";
  }
  const int code = run_cli("dump-coupling --config " +
                               (dir / "cfg.json").string() + " --out " +
                               (dir / "out").string(),
                           dir / "log.txt");
  EXPECT_EQ(code, 2);
  EXPECT_NE(slurp(dir / "log.txt").find("family"), std::string::npos);
  // even the failed run leaves a manifest with the error detail
  const auto manifest =
      nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["status"], "error");
}

TEST(cli_binary, seed_repeat_is_byte_identical) {
  const fs::path dir = test_dir("cli_repeat");
  {
    std::ofstream out(dir / "cfg.json");
    out << R"({"schema_version": 1, "family": {"family": "uniform"},
               "seed": 31,
               "simulate": {"scheme": "chain", "n_periods": 8,
                            "n_paths": 2000, "report_times": [0.5, 1.0],
                            "dump_paths": 10}})";
  }
  const std::string base = "simulate --config " + (dir / "cfg.json").string();
  ASSERT_EQ(run_cli(base + " --out " + (dir / "a").string(), dir / "l1.txt"),
            0);
  ASSERT_EQ(run_cli(base + " --out " + (dir / "b").string(), dir / "l2.txt"),
            0);
  EXPECT_EQ(slurp(dir / "a" / "stats.csv"), slurp(dir / "b" / "stats.csv"));
  EXPECT_EQ(slurp(dir / "a" / "paths.csv"), slurp(dir / "b" / "paths.csv"));

  ASSERT_EQ(run_cli(base + " --seed 32 --out " + (dir / "c").string(),
                    dir / "l3.txt"),
            0);
  EXPECT_NE(slurp(dir / "a" / "stats.csv"), slurp(dir / "c" / "stats.csv"));
}

TEST(cli_binary, zero_cost_duality_gap_is_exactly_zero) {
  const fs::path dir = test_dir("cli_zero_cost");
  {
    std::ofstream out(dir / "cfg.json");
    out << R"({"schema_version": 1, "family": {"family": "uniform"},
               "duality": {"cost": "zero", "scheme": "chain",
                           "n_periods": 8, "n_paths": 500}})";
  }
  const int code = run_cli("duality-gap --config " +
                               (dir / "cfg.json").string() + " --out " +
                               (dir / "out").string(),
                           dir / "log.txt");
  EXPECT_EQ(code, 0);
  const auto manifest =
      nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["numbers"]["quadrature_value"].get<double>(), 0.0);
  EXPECT_GE(manifest["numbers"]["residual_min"].get<double>(), -1e-12);
}

TEST(cli_binary, unwritable_out_dir_fails_loudly) {
  const fs::path dir = test_dir("cli_unwritable");
  const int code = run_cli("dump-coupling --config " +
                               std::string(SMOT_CONFIG_DIR) +
                               "/uniform_coupling.json --out /dev/null/x",
                           dir / "log.txt");
  EXPECT_NE(code, 0);
  EXPECT_NE(slurp(dir / "log.txt").find("manifest.json"), std::string::npos);
}

#endif  // SMOT_CLI_PATH

}  // namespace
