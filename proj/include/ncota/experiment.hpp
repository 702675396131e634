#pragma once

// Realization loop: deployment, data, optimum, then the DGD iterations with the
// selected disagreement estimator. Realizations are independent (all streams
// are keyed by realization index) and run on a small worker pool.

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

#include "ncota/channel.hpp"
#include "ncota/config.hpp"
#include "ncota/dgd.hpp"
#include "ncota/exchange.hpp"
#include "ncota/idx.hpp"
#include "ncota/objective.hpp"

namespace ncota {

class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(std::size_t realization, const std::string& what)
      : std::runtime_error("realization " + std::to_string(realization) + ": " + what), realization_(realization) {}
  std::size_t realization() const { return realization_; }

 private:
  std::size_t realization_;
};

struct RealizationSummary {
  std::size_t realization = 0;
  double radius = 0.0;
  double optimum_value = 0.0;
  double optimum_norm = 0.0;
  double optimum_test_error = 0.0;
  std::size_t solver_iterations = 0;
  bool solver_converged = false;
  double gain_sum_mean = 0.0;
  Schedule schedule;
  Deployment deployment;
};

struct MeanRecord {
  std::size_t iteration = 0;
  double air_time_s = 0.0;
  double normalized_error = 0.0;
  double subopt_gap = 0.0;
  double test_error = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> records;  // realization-major, iteration ascending
  std::vector<MeanRecord> mean;
  std::vector<RealizationSummary> realizations;
  double frame_duration_s = 0.0;
  std::size_t samples_per_frame = 0;
};

/// Training and test features loaded once and shared by every realization.
struct FmnistCorpus {
  std::vector<Feature> train;
  std::vector<Feature> test;

  static FmnistCorpus load(const ExperimentConfig& cfg) {
    return {ingest_fashion_mnist(cfg.fmnist_train_images, cfg.fmnist_train_labels),
            ingest_fashion_mnist(cfg.fmnist_test_images, cfg.fmnist_test_labels)};
  }
};

inline std::unique_ptr<Problem> build_problem(const ExperimentConfig& cfg, std::size_t realization,
                                              const FmnistCorpus* corpus = nullptr) {
  Stream data = derive_stream(cfg.seed, StreamKey::shared(StreamLabel::kDataShuffle, realization, 0));
  switch (cfg.objective) {
    case ObjectiveKind::kQuadraticToy: {
      const double base = 1.0 / std::sqrt(static_cast<double>(cfg.quadratic_dim));
      std::vector<Vector> centers(cfg.nodes, Vector(cfg.quadratic_dim));
      for (Vector& c : centers) {
        for (double& v : c) v = base + cfg.quadratic_spread * data.normal();
      }
      return std::make_unique<QuadraticProblem>(std::move(centers));
    }
    case ObjectiveKind::kLogisticSynthetic: {
      SyntheticSpec spec{cfg.classes, cfg.features, cfg.samples_per_node, cfg.nodes, cfg.synthetic_noise,
                         cfg.test_per_class};
      SyntheticData generated = synthetic_dataset(spec, data);
      return std::make_unique<LogisticProblem>(LogisticRegression(cfg.classes, cfg.features, cfg.mu),
                                               std::move(generated.datasets), std::move(generated.test_set));
    }
    case ObjectiveKind::kLogisticFmnist: {
      if (corpus == nullptr) throw std::invalid_argument("build_problem: Fashion-MNIST corpus not loaded");
      auto datasets = assign_by_class(corpus->train, cfg.classes, cfg.nodes, cfg.samples_per_node, data);
      Stream test_stream = derive_stream(cfg.seed, StreamKey::shared(StreamLabel::kDataShuffle, realization, 1));
      auto test = balanced_subset(corpus->test, cfg.classes, cfg.test_per_class, test_stream);
      return std::make_unique<LogisticProblem>(LogisticRegression(cfg.classes, cfg.features, cfg.mu),
                                               std::move(datasets), std::move(test));
    }
  }
  throw std::logic_error("unhandled objective");
}

struct RealizationOutput {
  std::vector<RunRecord> records;
  RealizationSummary summary;
};

inline RealizationOutput run_realization(const ExperimentConfig& cfg, std::size_t realization,
                                         const FmnistCorpus* corpus = nullptr) {
  RealizationOutput out;
  RealizationSummary& sum = out.summary;
  sum.realization = realization;

  Stream placement = derive_stream(cfg.seed, StreamKey::shared(StreamLabel::kDeployment, realization, 0));
  sum.deployment = deploy(cfg.nodes, cfg.area_radius_m, placement);
  const GainMatrix gains = GainMatrix::from_deployment(sum.deployment, cfg.carrier_frequency_hz);
  const RadioParameters radio = cfg.radio();
  const InterferenceSource interference =
      cfg.interference == InterferenceKind::kNone
          ? InterferenceSource::none(cfg.nodes)
          : InterferenceSource::at(cfg.interference, {cfg.jammer_x_m, cfg.jammer_y_m}, radio.energy_per_sample(),
                                   sum.deployment, cfg.carrier_frequency_hz);
  for (std::size_t i = 0; i < cfg.nodes; ++i) sum.gain_sum_mean += gains.incoming_sum(i) / cfg.nodes;

  const std::unique_ptr<Problem> problem = build_problem(cfg, realization, corpus);
  const Optimum optimum = solve_optimum(*problem);
  sum.optimum_value = optimum.value;
  sum.optimum_norm = norm(optimum.w);
  sum.optimum_test_error = problem->test_error(optimum.w);
  sum.solver_iterations = optimum.iterations;
  sum.solver_converged = optimum.converged;

  const double mu = problem->strong_convexity();
  sum.radius = radius_from_optimum(mu, global_objective(*problem, Vector(problem->dim(), 0.0)).gradient);
  sum.schedule = cfg.schedule(mu, problem->smoothness());

  const Codebook cb(problem->dim(), sum.radius);
  const AirInterface air{&gains, &interference, radio, cfg.p_tx, cfg.pilot_length, cfg.rotation_mode};
  const double frame = cfg.frame_duration();

  NetworkState state = NetworkState::zeros(cfg.nodes, problem->dim(), sum.radius);
  out.records.push_back(compute_metrics(state, *problem, optimum, frame, realization));
  std::vector<Vector> gradients(cfg.nodes);
  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    const ExchangeKey key{cfg.seed, realization, k};
    const std::vector<DisagreementEstimate> estimates =
        exchange(cfg.estimator, state.parameters, cb, air, key);
    std::vector<Vector> d_hat(cfg.nodes);
    for (std::size_t i = 0; i < cfg.nodes; ++i) {
      d_hat[i] = estimates[i].vector;
      gradients[i] = problem->local_gradient(i, state.parameters[i]);
    }
    const Schedule::Steps steps = sum.schedule.at(k);
    dgd_step(state, d_hat, gradients, steps.consensus, steps.learning);
    if (state.iteration % cfg.metrics_stride == 0 || state.iteration == cfg.iterations) {
      out.records.push_back(compute_metrics(state, *problem, optimum, frame, realization));
    }
  }
  return out;
}

inline std::vector<MeanRecord> across_realization_mean(const std::vector<std::vector<RunRecord>>& per_realization) {
  std::vector<MeanRecord> mean;
  if (per_realization.empty()) return mean;
  const std::size_t points = per_realization.front().size();
  const double inv = 1.0 / static_cast<double>(per_realization.size());
  for (std::size_t p = 0; p < points; ++p) {
    MeanRecord m{per_realization.front()[p].iteration, per_realization.front()[p].air_time_s};
    for (const auto& run : per_realization) {
      m.normalized_error += run[p].normalized_error * inv;
      m.subopt_gap += run[p].subopt_gap * inv;
      m.test_error += run[p].test_error * inv;
    }
    mean.push_back(m);
  }
  return mean;
}

using ProgressCallback = std::function<void(std::size_t realization, const RealizationOutput&)>;

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProgressCallback& progress = {}) {
  validate(cfg);
  std::unique_ptr<FmnistCorpus> corpus;
  if (cfg.objective == ObjectiveKind::kLogisticFmnist) corpus = std::make_unique<FmnistCorpus>(FmnistCorpus::load(cfg));

  std::vector<RealizationOutput> outputs(cfg.realizations);
  std::vector<std::exception_ptr> errors(cfg.realizations);
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.realizations; r = next++) {
      try {
        outputs[r] = run_realization(cfg, r, corpus.get());
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(r, outputs[r]);
        }
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  std::size_t threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.realizations);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (std::size_t r = 0; r < cfg.realizations; ++r) {
    if (!errors[r]) continue;
    try {
      std::rethrow_exception(errors[r]);
    } catch (const std::exception& e) {
      throw ExperimentError(r, e.what());
    }
  }

  ExperimentResult result;
  result.frame_duration_s = cfg.frame_duration();
  result.samples_per_frame = samples_per_frame(cfg.estimator, cfg.dim(), cfg.pilot_length);
  std::vector<std::vector<RunRecord>> per_realization;
  for (RealizationOutput& o : outputs) {
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
    per_realization.push_back(std::move(o.records));
    result.realizations.push_back(std::move(o.summary));
  }
  result.mean = across_realization_mean(per_realization);
  return result;
}

}  // namespace ncota
