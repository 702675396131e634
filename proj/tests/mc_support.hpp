#pragma once

// Shared fixture for the Monte-Carlo estimator checks: a fixed 5-node
// topology in d = 4 with hand-picked gains and parameter vectors.

#include <cmath>
#include <functional>

#include "ncota/exchange.hpp"

namespace ncota::testing {

/// Running mean and standard error per coordinate.
class MeanAccumulator {
 public:
  explicit MeanAccumulator(std::size_t dim) : sum_(dim, 0.0), sum_sq_(dim, 0.0) {}

  void add(std::span<const double> x) {
    for (std::size_t k = 0; k < sum_.size(); ++k) {
      sum_[k] += x[k];
      sum_sq_[k] += x[k] * x[k];
    }
    ++count_;
  }

  std::size_t count() const { return count_; }
  double mean(std::size_t k) const { return sum_[k] / static_cast<double>(count_); }
  double standard_error(std::size_t k) const {
    const double n = static_cast<double>(count_);
    const double var = (sum_sq_[k] - sum_[k] * sum_[k] / n) / (n - 1.0);
    return std::sqrt(var / n);
  }
  /// Largest |mean - target| / standard error across coordinates.
  double max_z(std::span<const double> target) const {
    double worst = 0.0;
    for (std::size_t k = 0; k < sum_.size(); ++k) {
      worst = std::max(worst, std::abs(mean(k) - target[k]) / standard_error(k));
    }
    return worst;
  }

 private:
  Vector sum_;
  Vector sum_sq_;
  std::size_t count_ = 0;
};

struct FiveNodeFixture {
  static constexpr std::size_t kNodes = 5;
  static constexpr std::size_t kDim = 4;

  GainMatrix gains{kNodes};
  std::vector<Vector> parameters{
      {0.2, -0.1, 0.3, 0.0},
      {0.5, 0.2, -0.4, 0.1},
      {-0.3, 0.6, 0.1, -0.2},
      {0.1, -0.5, -0.2, 0.4},
      {-0.6, 0.1, 0.3, 0.3},
  };
  Codebook codebook{kDim, 1.0};
  RadioParameters radio{3e9, 1.0, 1.0, 0.05};  // E = 1 J/sample, N0 = 0.05
  double p_tx = 0.34;
  std::vector<double> interferer_gains{0.6, 0.4, 0.8, 0.3, 0.5};

  FiveNodeFixture() {
    gains.set(0, 1, 0.8);
    gains.set(0, 2, 0.3);
    gains.set(0, 3, 0.5);
    gains.set(0, 4, 0.1);
    gains.set(1, 2, 0.6);
    gains.set(1, 3, 0.2);
    gains.set(1, 4, 0.4);
    gains.set(2, 3, 0.7);
    gains.set(2, 4, 0.25);
    gains.set(3, 4, 0.9);
  }

  InterferenceSource interference(InterferenceKind kind) const {
    if (kind == InterferenceKind::kNone) return InterferenceSource::none(kNodes);
    return {kind, {}, radio.energy_per_sample(), interferer_gains};
  }

  /// sum_{j != i} Lambda_ij w_j, computed by an explicit loop.
  Vector weighted_neighbour_sum(std::size_t i) const {
    Vector s(kDim, 0.0);
    for (std::size_t j = 0; j < kNodes; ++j) {
      if (j == i) continue;
      for (std::size_t k = 0; k < kDim; ++k) s[k] += gains(i, j) * parameters[j][k];
    }
    return s;
  }

  double incoming_gain_sum(std::size_t i) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < kNodes; ++j) acc += j == i ? 0.0 : gains(i, j);
    return acc;
  }

  /// sum_{j != i} Lambda_ij (w_j - w_i), computed independently of the library.
  Vector disagreement(std::size_t i) const {
    Vector d = weighted_neighbour_sum(i);
    const double total = incoming_gain_sum(i);
    for (std::size_t k = 0; k < kDim; ++k) d[k] -= total * parameters[i][k];
    return d;
  }

  /// Runs `frames` independent exchanges and hands node i's estimate to `sink`.
  void run(Estimator estimator, InterferenceKind kind, std::size_t frames, std::uint64_t seed, std::size_t node,
           const std::function<void(const DisagreementEstimate&)>& sink,
           RotationMode mode = RotationMode::kSignFlip) const {
    const InterferenceSource src = interference(kind);
    const AirInterface air{&gains, &src, radio, p_tx, 10, mode};
    for (std::size_t k = 0; k < frames; ++k) {
      const auto estimates = exchange(estimator, parameters, codebook, air, ExchangeKey{seed, 0, k});
      sink(estimates[node]);
    }
  }
};

}  // namespace ncota::testing
