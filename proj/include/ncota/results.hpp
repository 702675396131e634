#pragma once

// runs.csv and summary.json emission.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "ncota/config.hpp"
#include "ncota/experiment.hpp"

namespace ncota {

inline constexpr std::string_view kRunsCsvHeader =
    "realization,iteration,air_time_s,normalized_error,subopt_gap,test_error";

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << kRunsCsvHeader << '\n';
  for (const RunRecord& r : records) {
    os << r.realization << ',' << r.iteration << ',' << detail::format_double(r.air_time_s) << ','
       << detail::format_double(r.normalized_error) << ',' << detail::format_double(r.subopt_gap) << ','
       << detail::format_double(r.test_error) << '\n';
  }
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["nodes"] = c.nodes;
  j["area_radius_m"] = c.area_radius_m;
  j["carrier_frequency_hz"] = c.carrier_frequency_hz;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["tx_power_dbm"] = c.tx_power_dbm;
  j["tx_power_w"] = c.tx_power_w();
  j["noise_psd_dbm_hz"] = c.noise_psd_dbm_hz;
  j["noise_psd_w_per_hz"] = c.noise_psd_w_per_hz();
  j["p_tx"] = c.p_tx;
  j["estimator"] = to_string(c.estimator);
  j["interference"] = to_string(c.interference);
  j["jammer_x_m"] = c.jammer_x_m;
  j["jammer_y_m"] = c.jammer_y_m;
  j["rotation_mode"] = to_string(c.rotation_mode);
  j["n_P"] = c.pilot_length;
  j["iterations"] = c.iterations;
  j["realizations"] = c.realizations;
  j["metrics_stride"] = c.metrics_stride;
  j["objective"] = to_string(c.objective);
  j["mu"] = c.mu;
  j["classes"] = c.classes;
  j["features"] = c.features;
  j["samples_per_node"] = c.samples_per_node;
  j["test_per_class"] = c.test_per_class;
  j["synthetic_noise"] = c.synthetic_noise;
  j["quadratic_dim"] = c.quadratic_dim;
  j["quadratic_spread"] = c.quadratic_spread;
  j["fmnist_train_images"] = c.fmnist_train_images;
  j["fmnist_train_labels"] = c.fmnist_train_labels;
  j["fmnist_test_images"] = c.fmnist_test_images;
  j["fmnist_test_labels"] = c.fmnist_test_labels;
  j["gamma0"] = c.gamma0;
  j["eta0"] = c.eta0 ? nlohmann::ordered_json(*c.eta0) : nlohmann::ordered_json(nullptr);
  j["delta"] = c.delta ? nlohmann::ordered_json(*c.delta) : nlohmann::ordered_json(nullptr);
  return j;
}

inline nlohmann::ordered_json summary_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(cfg);
  j["dim"] = cfg.dim();
  j["samples_per_frame"] = result.samples_per_frame;
  j["frame_duration_s"] = result.frame_duration_s;

  nlohmann::ordered_json mean;
  for (const char* key : {"iteration", "air_time_s", "normalized_error", "subopt_gap", "test_error"}) {
    mean[key] = nlohmann::ordered_json::array();
  }
  for (const MeanRecord& m : result.mean) {
    mean["iteration"].push_back(m.iteration);
    mean["air_time_s"].push_back(m.air_time_s);
    mean["normalized_error"].push_back(m.normalized_error);
    mean["subopt_gap"].push_back(m.subopt_gap);
    mean["test_error"].push_back(m.test_error);
  }
  j["mean"] = std::move(mean);

  nlohmann::ordered_json final_values;
  if (!result.mean.empty()) {
    const MeanRecord& last = result.mean.back();
    final_values["iteration"] = last.iteration;
    final_values["air_time_s"] = last.air_time_s;
    final_values["normalized_error"] = last.normalized_error;
    final_values["subopt_gap"] = last.subopt_gap;
    final_values["test_error"] = last.test_error;
  }
  j["final"] = std::move(final_values);

  nlohmann::ordered_json reals = nlohmann::ordered_json::array();
  for (const RealizationSummary& s : result.realizations) {
    nlohmann::ordered_json r;
    r["realization"] = s.realization;
    r["radius"] = s.radius;
    r["optimum_value"] = s.optimum_value;
    r["optimum_norm"] = s.optimum_norm;
    r["optimum_test_error"] = s.optimum_test_error;
    r["solver_iterations"] = s.solver_iterations;
    r["solver_converged"] = s.solver_converged;
    r["mean_incoming_gain_sum"] = s.gain_sum_mean;
    r["gamma0"] = s.schedule.gamma0;
    r["eta0"] = s.schedule.eta0;
    r["delta"] = s.schedule.delta;
    reals.push_back(std::move(r));
  }
  j["realizations"] = std::move(reals);
  return j;
}

/// Writes runs.csv and summary.json (and deployment_<r>.csv when requested) into `dir`.
inline void emit_results(const ExperimentConfig& cfg, const ExperimentResult& result,
                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto open = [](const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
  };
  {
    auto os = open(dir / "runs.csv");
    write_runs_csv(os, result.records);
  }
  {
    auto os = open(dir / "summary.json");
    os << summary_json(cfg, result).dump(2) << '\n';
  }
  if (cfg.dump_deployment) {
    for (const RealizationSummary& s : result.realizations) {
      auto os = open(dir / ("deployment_" + std::to_string(s.realization) + ".csv"));
      write_deployment_csv(os, s.deployment);
    }
  }
}

}  // namespace ncota
