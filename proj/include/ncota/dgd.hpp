#pragma once

// Decentralized gradient descent: schedules, the projected update, metrics.

#include <cmath>
#include <stdexcept>
#include <string>

#include "ncota/linalg.hpp"
#include "ncota/objective.hpp"

namespace ncota {

/// gamma_k = gamma0 / (1 + k delta)^(3/4), eta_k = eta0 / (1 + k delta).
struct Schedule {
  double gamma0 = 1.7e7;
  double eta0 = 1.0;
  double delta = 1.0;

  struct Steps {
    double consensus;
    double learning;
  };

  Steps at(std::size_t k) const {
    const double base = 1.0 + static_cast<double>(k) * delta;
    return {gamma0 / std::pow(base, 0.75), eta0 / base};
  }

  /// eta0 = 2 / (mu + L), delta = 5 / (4 mu eta0).
  static Schedule standard(double mu, double smoothness, double gamma0 = 1.7e7) {
    if (!(mu > 0.0)) throw std::invalid_argument("Schedule: mu must be positive");
    const double eta0 = 2.0 / (mu + smoothness);
    return {gamma0, eta0, 5.0 / (4.0 * mu * eta0)};
  }
};

struct NetworkState {
  std::vector<Vector> parameters;
  std::size_t iteration = 0;
  double radius = 0.0;

  static NetworkState zeros(std::size_t nodes, std::size_t dim, double radius) {
    return {std::vector<Vector>(nodes, Vector(dim, 0.0)), 0, radius};
  }
};

/// Euclidean projection onto the closed radius-r ball.
inline void project_onto_ball(std::span<double> w, double radius) {
  const double n = norm(w);
  if (n <= radius) return;
  const double scale = radius / n;
  for (double& v : w) v *= scale;
}

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(std::size_t node, std::size_t iteration)
      : std::runtime_error("non-finite parameter at node " + std::to_string(node) + ", iteration " +
                           std::to_string(iteration)),
        node_(node),
        iteration_(iteration) {}

  std::size_t node() const { return node_; }
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t node_;
  std::size_t iteration_;
};

/// w_i <- Proj(w_i + gamma d_hat_i - eta grad_i) for every node.
inline void dgd_step(NetworkState& state, std::span<const Vector> estimates, std::span<const Vector> gradients,
                     double gamma, double eta) {
  const std::size_t n = state.parameters.size();
  if (estimates.size() != n || gradients.size() != n) throw std::invalid_argument("dgd_step: node count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    Vector& w = state.parameters[i];
    if (estimates[i].size() != w.size() || gradients[i].size() != w.size()) {
      throw std::invalid_argument("dgd_step: dimension mismatch at node " + std::to_string(i));
    }
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] += gamma * estimates[i][k] - eta * gradients[i][k];
      if (!std::isfinite(w[k])) throw NonFiniteError(i, state.iteration);
    }
    project_onto_ball(w, state.radius);
  }
  ++state.iteration;
}

struct RunRecord {
  std::size_t realization = 0;
  std::size_t iteration = 0;
  double air_time_s = 0.0;
  double normalized_error = 0.0;
  double subopt_gap = 0.0;
  double test_error = 0.0;
};

inline RunRecord compute_metrics(const NetworkState& state, const Problem& problem, const Optimum& optimum,
                                 double frame_duration_s, std::size_t realization) {
  const double ref = squared_norm(optimum.w);
  if (!(ref > 0.0)) throw std::invalid_argument("normalized error is undefined for w* = 0");
  double err = 0.0;
  for (const Vector& w : state.parameters) err += squared_distance(w, optimum.w);
  err /= ref * static_cast<double>(state.parameters.size());

  const Vector average = mean_of(state.parameters);
  const double gap = global_value(problem, average) - optimum.value;
  return {realization,
          state.iteration,
          static_cast<double>(state.iteration) * frame_duration_s,
          err,
          gap,
          problem.test_error(average)};
}

}  // namespace ncota
