// Command-line driver: `ncota_sim run <config> [--seed ...] [--out ...]`.
//
// Exit code 0 on success. On failure a single JSON line
// {"error": <kind>, "message": <text>} is written to stderr and the exit code
// is nonzero.

#include <iostream>
#include <string>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include "ncota/config.hpp"
#include "ncota/experiment.hpp"
#include "ncota/results.hpp"

namespace {

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized gradient descent over simulated wireless channels"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run an experiment described by a config file");
  std::string config_path;
  std::string out_dir = "results";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> estimator;
  std::optional<std::string> interference;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> realizations;
  std::vector<std::string> sets;
  bool quiet = false;
  run->add_option("config", config_path, "Config file (key = value lines)")->required();
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory for runs.csv and summary.json");
  run->add_option("--estimator", estimator, "ncota | ir-ncota | oracle");
  run->add_option("--interference", interference, "none | gaussian-jammer | single-sample");
  run->add_option("--iterations", iterations, "Number of DGD iterations");
  run->add_option("--realizations", realizations, "Number of independent realizations");
  run->add_option("--set", sets, "Override any config key: --set key=value");
  run->add_flag("--quiet", quiet, "Suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  ncota::ConfigOverrides overrides;
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) return fail("usage", "--set expects key=value, got '" + s + "'", 2);
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (seed) overrides.emplace_back("seed", std::to_string(*seed));
  if (estimator) overrides.emplace_back("estimator", *estimator);
  if (interference) overrides.emplace_back("interference", *interference);
  if (iterations) overrides.emplace_back("iterations", std::to_string(*iterations));
  if (realizations) overrides.emplace_back("realizations", std::to_string(*realizations));

  ncota::ExperimentConfig cfg;
  try {
    cfg = ncota::load_config(config_path, overrides);
  } catch (const ncota::ConfigError& e) {
    return fail("config", e.what(), 3);
  }

  try {
    if (!quiet) {
      std::cerr << "estimator=" << ncota::to_string(cfg.estimator)
                << " interference=" << ncota::to_string(cfg.interference) << " nodes=" << cfg.nodes
                << " dim=" << cfg.dim() << " iterations=" << cfg.iterations
                << " realizations=" << cfg.realizations << '\n';
    }
    ncota::ProgressCallback progress;
    if (!quiet) {
      progress = [](std::size_t r, const ncota::RealizationOutput& o) {
        const ncota::RunRecord& last = o.records.back();
        std::cerr << "realization " << r << ": normalized_error=" << last.normalized_error
                  << " subopt_gap=" << last.subopt_gap << " test_error=" << last.test_error << '\n';
      };
    }
    const ncota::ExperimentResult result = ncota::run_experiment(cfg, progress);
    ncota::emit_results(cfg, result, out_dir);
    if (!quiet && !result.mean.empty()) {
      const ncota::MeanRecord& m = result.mean.back();
      std::cerr << "mean final: normalized_error=" << m.normalized_error << " subopt_gap=" << m.subopt_gap
                << " test_error=" << m.test_error << " (written to " << out_dir << ")\n";
    }
  } catch (const ncota::ExperimentError& e) {
    return fail("experiment", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 5);
  }
  return 0;
}
