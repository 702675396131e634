#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ncota/config.hpp"
#include "ncota/experiment.hpp"
#include "ncota/results.hpp"

namespace ncota {
namespace {

namespace fs = std::filesystem;

ExperimentConfig from_text(const std::string& text, const ConfigOverrides& overrides = {}) {
  std::istringstream in(text);
  return parse_config(in, overrides);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("ncota_harness_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void expect_metrics_sane(const ExperimentResult& r) {
  for (const RunRecord& rec : r.records) {
    ASSERT_TRUE(std::isfinite(rec.normalized_error) && std::isfinite(rec.subopt_gap) && std::isfinite(rec.test_error));
    EXPECT_GE(rec.normalized_error, 0.0);
    EXPECT_GE(rec.subopt_gap, -1e-9);
    EXPECT_GE(rec.test_error, 0.0);
  }
}

// Small quadratic network that mixes well within a few hundred iterations.
const char* const kQuadraticOracle =
    "nodes = 10\n"
    "area_radius_m = 50\n"
    "objective = quadratic-toy\n"
    "estimator = oracle\n"
    "iterations = 2000\n"
    "realizations = 1\n";

// Small logistic network where the air interface matters.
const char* const kSmallLogistic =
    "nodes = 10\n"
    "features = 5\n"
    "mu = 0.01\n"
    "delta = 0.0079\n"
    "gamma0 = 1e8\n"
    "iterations = 600\n"
    "realizations = 1\n"
    "metrics_stride = 50\n";

TEST(Config, EmptyFileGivesReferenceDefaults) {
  const ExperimentConfig c = from_text("");
  EXPECT_EQ(c.nodes, 200u);
  EXPECT_EQ(c.area_radius_m, 2000.0);
  EXPECT_EQ(c.carrier_frequency_hz, 3e9);
  EXPECT_EQ(c.bandwidth_hz, 5e6);
  EXPECT_EQ(c.tx_power_dbm, 20.0);
  EXPECT_EQ(c.noise_psd_dbm_hz, -173.0);
  EXPECT_EQ(c.p_tx, 0.34);
  EXPECT_EQ(c.pilot_length, 10u);
  EXPECT_EQ(c.realizations, 20u);
  EXPECT_EQ(c.gamma0, 1.7e7);
  EXPECT_EQ(c.mu, 0.001);
  EXPECT_EQ(c.metrics_stride, 10u);
  EXPECT_EQ(c.estimator, Estimator::kIrNcota);
  EXPECT_EQ(c.dim(), 450u);
  const Schedule s = c.schedule(c.mu, c.mu + 2.0);
  EXPECT_NEAR(s.eta0, 2.0 / 2.002, 1e-15);
  EXPECT_NEAR(s.delta, 5.0 / (4.0 * 0.001 * s.eta0), 1e-9);
}

TEST(Config, DbmConvertsToWatts) {
  const ExperimentConfig c = from_text("tx_power_dbm = 20\n");
  EXPECT_NEAR(c.tx_power_w(), 0.1, 1e-16);
  EXPECT_NEAR(c.radio().energy_per_sample(), 2e-8, 1e-22);
  EXPECT_NEAR(c.noise_psd_w_per_hz(), 5.011872336272715e-21, 1e-33);
}

TEST(Config, RejectsInvalidInput) {
  EXPECT_THROW(from_text("p_tx = 1.5\n"), ConfigError);
  EXPECT_THROW(from_text("bogus_key = 1\n"), ConfigError);
  EXPECT_THROW(from_text("nodes 10\n"), ConfigError);
  EXPECT_THROW(from_text("nodes = ten\n"), ConfigError);
  EXPECT_THROW(from_text("estimator = coherent\n"), ConfigError);
  EXPECT_THROW(from_text("nodes = 15\n"), ConfigError);  // not a multiple of the class count
  EXPECT_THROW(from_text("objective = logistic-fmnist\nfmnist_train_images = a\n"), ConfigError);
}

TEST(Config, CommentsAndOverrides) {
  const ExperimentConfig c = from_text("# header\nnodes = 30   # trailing\n\n", {{"nodes", "40"}, {"seed", "9"}});
  EXPECT_EQ(c.nodes, 40u);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, Eta0OverrideRederivesDelta) {
  const ExperimentConfig c = from_text("eta0 = 0.5\n");
  const Schedule s = c.schedule(0.001, 2.001);
  EXPECT_EQ(s.eta0, 0.5);
  EXPECT_DOUBLE_EQ(s.delta, 5.0 / (4.0 * 0.001 * 0.5));
  const Schedule t = from_text("eta0 = 0.5\ndelta = 0.01\n").schedule(0.001, 2.001);
  EXPECT_EQ(t.delta, 0.01);
}

TEST(Experiment, OracleQuadraticConvergesMonotonically) {
  const ExperimentConfig cfg = from_text(kQuadraticOracle);
  const ExperimentResult r = run_experiment(cfg);
  expect_metrics_sane(r);
  ASSERT_EQ(r.records.front().iteration, 0u);
  ASSERT_EQ(r.records.back().iteration, 2000u);
  const double initial = r.records.front().normalized_error;
  EXPECT_DOUBLE_EQ(initial, 1.0);
  for (std::size_t k = 1; k < r.records.size(); ++k) {
    EXPECT_LT(r.records[k].normalized_error, r.records[k - 1].normalized_error) << r.records[k].iteration;
  }
  // Recorded baseline for this seed: 2.30e-3.
  EXPECT_LT(r.records.back().normalized_error, 1e-2 * initial);
}

TEST(Experiment, CsvCardinalityAndHeader) {
  const ExperimentConfig cfg =
      from_text(kQuadraticOracle, {{"realizations", "2"}, {"iterations", "20"}, {"metrics_stride", "10"}});
  const ExperimentResult r = run_experiment(cfg);
  const fs::path dir = scratch_dir("cardinality");
  emit_results(cfg, r, dir);
  std::ifstream in(dir / "runs.csv");
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "realization,iteration,air_time_s,normalized_error,subopt_gap,test_error");
  int rows = 0;
  while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  EXPECT_EQ(rows, 6);
  fs::remove_all(dir);
}

TEST(Experiment, AirTimeIsIterationTimesFrame) {
  const ExperimentConfig cfg = from_text(kSmallLogistic, {{"iterations", "100"}, {"estimator", "ncota"}});
  const ExperimentResult r = run_experiment(cfg);
  EXPECT_EQ(r.frame_duration_s, 91.0 / 5e6);
  for (const RunRecord& rec : r.records) EXPECT_EQ(rec.air_time_s, rec.iteration * r.frame_duration_s);
}

TEST(Experiment, SummaryReportsIrFrameDurationAtReferenceDimension) {
  const ExperimentConfig cfg = from_text("nodes = 10\niterations = 1\nrealizations = 1\n");
  const ExperimentResult r = run_experiment(cfg);
  const nlohmann::json j = nlohmann::json::parse(summary_json(cfg, r).dump());
  EXPECT_EQ(j["frame_duration_s"].get<double>(), 1.822e-4);
  EXPECT_EQ(j["samples_per_frame"].get<std::size_t>(), 911u);
  EXPECT_EQ(j["dim"].get<std::size_t>(), 450u);
  EXPECT_EQ(j["config"]["estimator"], "ir-ncota");
  EXPECT_EQ(j["mean"]["normalized_error"].size(), 2u);
}

TEST(Experiment, RerunIsByteIdentical) {
  const ExperimentConfig cfg =
      from_text(kSmallLogistic, {{"interference", "gaussian-jammer"}, {"realizations", "2"}, {"iterations", "200"}});
  const fs::path a = scratch_dir("rerun_a"), b = scratch_dir("rerun_b");
  emit_results(cfg, run_experiment(cfg), a);
  emit_results(cfg, run_experiment(cfg), b);
  EXPECT_EQ(slurp(a / "runs.csv"), slurp(b / "runs.csv"));
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, RealizationsDependOnlyOnTheirIndex) {
  const ExperimentConfig three =
      from_text(kSmallLogistic, {{"realizations", "3"}, {"iterations", "150"}, {"threads", "3"}});
  const ExperimentResult all = run_experiment(three);
  const RealizationOutput alone = run_realization(three, 2, nullptr);
  std::vector<RunRecord> rows;
  for (const RunRecord& rec : all.records) {
    if (rec.realization == 2) rows.push_back(rec);
  }
  ASSERT_EQ(rows.size(), alone.records.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].normalized_error, alone.records[k].normalized_error);
    EXPECT_EQ(rows[k].subopt_gap, alone.records[k].subopt_gap);
  }
  // Thread count must not change anything.
  const ExperimentResult serial = run_experiment(from_text(
      kSmallLogistic, {{"realizations", "3"}, {"iterations", "150"}, {"threads", "1"}}));
  std::ostringstream x, y;
  write_runs_csv(x, all.records);
  write_runs_csv(y, serial.records);
  EXPECT_EQ(x.str(), y.str());
}

TEST(Experiment, OracleDominatesOverTheAirEstimates) {
  int wins_ncota = 0, wins_ir = 0;
  constexpr int seeds = 5;
  for (int seed = 0; seed < seeds; ++seed) {
    auto final_error = [&](const char* estimator) {
      const ExperimentResult r = run_experiment(
          from_text(kSmallLogistic,
                    {{"seed", std::to_string(seed)}, {"estimator", estimator}, {"interference", "gaussian-jammer"}}));
      expect_metrics_sane(r);
      return r.mean.back().normalized_error;
    };
    const double oracle = final_error("oracle");
    wins_ncota += oracle <= final_error("ncota") ? 1 : 0;
    wins_ir += oracle <= final_error("ir-ncota") ? 1 : 0;
  }
  EXPECT_GT(wins_ncota, seeds / 2);
  EXPECT_GT(wins_ir, seeds / 2);
}

TEST(Experiment, ErrorsCarryRealizationContext) {
  // A huge learning step overflows on the first update.
  const ExperimentConfig cfg = from_text(
      kQuadraticOracle, {{"eta0", "1e308"}, {"delta", "0"}, {"quadratic_spread", "5"}, {"realizations", "2"}});
  try {
    run_experiment(cfg);
    FAIL() << "expected ExperimentError";
  } catch (const ExperimentError& e) {
    EXPECT_EQ(e.realization(), 0u);
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos) << e.what();
  }
}

#ifdef NCOTA_SIM_PATH
TEST(Cli, ConfigErrorIsMachineReadable) {
  const fs::path dir = scratch_dir("cli");
  std::ofstream(dir / "bad.cfg") << "p_tx = 1.5\n";
  const std::string cmd = std::string(NCOTA_SIM_PATH) + " run " + (dir / "bad.cfg").string() + " --quiet 2> " +
                          (dir / "err.txt").string();
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 3);
  const nlohmann::json j = nlohmann::json::parse(slurp(dir / "err.txt"));
  EXPECT_EQ(j["error"], "config");
  EXPECT_NE(j["message"].get<std::string>().find("p_tx"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, RunWritesOutputs) {
  const fs::path dir = scratch_dir("cli_run");
  std::ofstream(dir / "q.cfg") << kQuadraticOracle;
  const std::string cmd = std::string(NCOTA_SIM_PATH) + " run " + (dir / "q.cfg").string() +
                          " --quiet --iterations 30 --out " + (dir / "out").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "runs.csv"));
  const nlohmann::json j = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(j["config"]["iterations"], 30);
  fs::remove_all(dir);
}
#endif

}  // namespace
}  // namespace ncota
