#pragma once

// Local objectives, the global average, and the centralized optimum.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "ncota/linalg.hpp"
#include "ncota/rng.hpp"

namespace ncota {

struct Feature {
  Vector x;
  std::size_t label = 0;
};

struct LocalDataset {
  std::vector<Feature> samples;
  std::size_t owner_label = 0;
};

inline void normalize_in_place(Vector& x) {
  const double n = norm(x);
  if (n == 0.0) throw std::domain_error("cannot normalize a zero feature vector");
  for (double& v : x) v /= n;
}

/// Multiclass logistic regression with class 0 pinned to zero weights.
///
/// The parameter vector concatenates the blocks w^(1) .. w^(C-1), each of
/// length F, so d = (C - 1) F. Scores are f . w^(c), with score 0 for class 0.
class LogisticRegression {
 public:
  LogisticRegression(std::size_t classes, std::size_t features, double mu)
      : classes_(classes), features_(features), mu_(mu) {
    if (classes < 2) throw std::invalid_argument("LogisticRegression: need at least two classes");
    if (features == 0) throw std::invalid_argument("LogisticRegression: need at least one feature");
    if (!(mu >= 0.0)) throw std::invalid_argument("LogisticRegression: regularizer must be nonnegative");
  }

  std::size_t classes() const { return classes_; }
  std::size_t features() const { return features_; }
  std::size_t dim() const { return (classes_ - 1) * features_; }
  double mu() const { return mu_; }

  /// Smoothness constant for unit-norm features.
  double smoothness() const { return mu_ + 2.0; }

  void scores(std::span<const double> x, std::span<const double> w, std::span<double> out) const {
    check(x, w);
    out[0] = 0.0;
    for (std::size_t c = 1; c < classes_; ++c) {
      out[c] = dot(x, w.subspan((c - 1) * features_, features_));
    }
  }

  double loss(const Feature& f, std::span<const double> w) const {
    check_label(f.label);
    Vector s(classes_);
    scores(f.x, w, s);
    return 0.5 * mu_ * squared_norm(w) + log_sum_exp(s) - s[f.label];
  }

  /// grad += weight * gradient of the data term of loss(f, .) (no regularizer).
  void add_data_gradient(const Feature& f, std::span<const double> w, double weight, std::span<double> grad) const {
    check_label(f.label);
    Vector s(classes_);
    scores(f.x, w, s);
    const double lse = log_sum_exp(s);
    for (std::size_t c = 1; c < classes_; ++c) {
      const double coeff = weight * (std::exp(s[c] - lse) - (f.label == c ? 1.0 : 0.0));
      axpy(coeff, f.x, grad.subspan((c - 1) * features_, features_));
    }
  }

  std::size_t predict(std::span<const double> x, std::span<const double> w) const {
    Vector s(classes_);
    scores(x, w, s);
    return static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
  }

  double local_value(const LocalDataset& data, std::span<const double> w) const {
    if (data.samples.empty()) throw std::invalid_argument("local_value: empty dataset");
    double acc = 0.0;
    for (const Feature& f : data.samples) acc += loss(f, w);
    return acc / static_cast<double>(data.samples.size());
  }

  Vector local_gradient(const LocalDataset& data, std::span<const double> w) const {
    if (data.samples.empty()) throw std::invalid_argument("local_gradient: empty dataset");
    Vector grad(dim(), 0.0);
    const double weight = 1.0 / static_cast<double>(data.samples.size());
    for (const Feature& f : data.samples) add_data_gradient(f, w, weight, grad);
    axpy(mu_, w, grad);
    return grad;
  }

  double error_rate(std::span<const Feature> samples, std::span<const double> w) const {
    if (samples.empty()) return 0.0;
    std::size_t wrong = 0;
    for (const Feature& f : samples) wrong += predict(f.x, w) != f.label ? 1 : 0;
    return static_cast<double>(wrong) / static_cast<double>(samples.size());
  }

 private:
  static double log_sum_exp(std::span<const double> s) {
    const double top = *std::max_element(s.begin(), s.end());
    double acc = 0.0;
    for (double v : s) acc += std::exp(v - top);
    return top + std::log(acc);
  }

  void check(std::span<const double> x, std::span<const double> w) const {
    if (x.size() != features_) throw std::invalid_argument("feature length mismatch");
    if (w.size() != dim()) throw std::invalid_argument("parameter length mismatch");
  }

  void check_label(std::size_t label) const {
    if (label >= classes_) {
      throw std::out_of_range("label " + std::to_string(label) + " outside [0, " + std::to_string(classes_) + ")");
    }
  }

  std::size_t classes_;
  std::size_t features_;
  double mu_;
};

/// A network-wide problem F(w) = (1/N) sum_i f_i(w).
class Problem {
 public:
  virtual ~Problem() = default;
  virtual std::size_t dim() const = 0;
  virtual std::size_t nodes() const = 0;
  virtual double strong_convexity() const = 0;
  virtual double smoothness() const = 0;
  virtual double local_value(std::size_t node, std::span<const double> w) const = 0;
  virtual Vector local_gradient(std::size_t node, std::span<const double> w) const = 0;
  /// Misclassification rate of w on held-out data; 0 where not applicable.
  virtual double test_error(std::span<const double>) const { return 0.0; }
};

class LogisticProblem final : public Problem {
 public:
  LogisticProblem(LogisticRegression model, std::vector<LocalDataset> datasets, std::vector<Feature> test_set)
      : model_(model), datasets_(std::move(datasets)), test_set_(std::move(test_set)) {
    if (datasets_.empty()) throw std::invalid_argument("LogisticProblem: no datasets");
  }

  const LogisticRegression& model() const { return model_; }
  const std::vector<LocalDataset>& datasets() const { return datasets_; }
  const std::vector<Feature>& test_set() const { return test_set_; }

  std::size_t dim() const override { return model_.dim(); }
  std::size_t nodes() const override { return datasets_.size(); }
  double strong_convexity() const override { return model_.mu(); }
  double smoothness() const override { return model_.smoothness(); }
  double local_value(std::size_t node, std::span<const double> w) const override {
    return model_.local_value(datasets_.at(node), w);
  }
  Vector local_gradient(std::size_t node, std::span<const double> w) const override {
    return model_.local_gradient(datasets_.at(node), w);
  }
  double test_error(std::span<const double> w) const override { return model_.error_rate(test_set_, w); }

 private:
  LogisticRegression model_;
  std::vector<LocalDataset> datasets_;
  std::vector<Feature> test_set_;
};

/// f_i(w) = 0.5 ||w - c_i||^2; mu = L = 1 and w* is the mean of the centres.
class QuadraticProblem final : public Problem {
 public:
  explicit QuadraticProblem(std::vector<Vector> centers) : centers_(std::move(centers)) {
    if (centers_.empty()) throw std::invalid_argument("QuadraticProblem: no centres");
  }

  const std::vector<Vector>& centers() const { return centers_; }

  std::size_t dim() const override { return centers_.front().size(); }
  std::size_t nodes() const override { return centers_.size(); }
  double strong_convexity() const override { return 1.0; }
  double smoothness() const override { return 1.0; }
  double local_value(std::size_t node, std::span<const double> w) const override {
    return 0.5 * squared_distance(w, centers_.at(node));
  }
  Vector local_gradient(std::size_t node, std::span<const double> w) const override {
    Vector g(w.begin(), w.end());
    axpy(-1.0, centers_.at(node), g);
    return g;
  }

 private:
  std::vector<Vector> centers_;
};

inline double global_value(const Problem& problem, std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < problem.nodes(); ++i) acc += problem.local_value(i, w);
  return acc / static_cast<double>(problem.nodes());
}

struct ObjectiveValue {
  double value = 0.0;
  Vector gradient;
};

/// F(w) and grad F(w), averaged over all nodes.
inline ObjectiveValue global_objective(const Problem& problem, std::span<const double> w) {
  ObjectiveValue out{0.0, Vector(problem.dim(), 0.0)};
  const double inv_n = 1.0 / static_cast<double>(problem.nodes());
  for (std::size_t i = 0; i < problem.nodes(); ++i) {
    out.value += problem.local_value(i, w) * inv_n;
    axpy(inv_n, problem.local_gradient(i, w), out.gradient);
  }
  return out;
}

struct Optimum {
  Vector w;
  double value = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct SolverOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 1'000'000;
};

/// Full-batch gradient descent with step 2 / (mu + L).
inline Optimum solve_optimum(const Problem& problem, Vector start = {}, SolverOptions opts = {}) {
  if (start.empty()) start.assign(problem.dim(), 0.0);
  if (start.size() != problem.dim()) throw std::invalid_argument("solve_optimum: start has wrong length");
  const double step = 2.0 / (problem.strong_convexity() + problem.smoothness());
  Optimum opt{std::move(start)};
  for (;;) {
    ObjectiveValue fv = global_objective(problem, opt.w);
    opt.value = fv.value;
    opt.gradient_norm = norm(fv.gradient);
    if (opt.gradient_norm <= opts.tolerance) {
      opt.converged = true;
      return opt;
    }
    if (opt.iterations == opts.max_iterations) return opt;
    axpy(-step, fv.gradient, opt.w);
    ++opt.iterations;
  }
}

/// Radius ||grad F(0)|| / mu of a ball guaranteed to contain w*.
inline double radius_from_optimum(double mu, std::span<const double> gradient_at_zero) {
  if (!(mu > 0.0)) throw std::invalid_argument("radius_from_optimum: mu must be positive");
  return norm(gradient_at_zero) / mu;
}

struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t features = 10;
  std::size_t per_node = 5;
  std::size_t nodes = 20;
  double noise = 0.5;
  std::size_t test_per_class = 100;
};

struct SyntheticData {
  std::vector<LocalDataset> datasets;
  std::vector<Feature> test_set;
};

/// Unit-norm features around random class directions; node i owns class i mod C.
inline SyntheticData synthetic_dataset(const SyntheticSpec& spec, Stream& stream) {
  if (spec.classes < 2 || spec.features == 0 || spec.per_node == 0) {
    throw std::invalid_argument("synthetic_dataset: invalid shape");
  }
  if (spec.nodes == 0 || spec.nodes % spec.classes != 0) {
    throw std::invalid_argument("synthetic_dataset: node count " + std::to_string(spec.nodes) +
                                " is not a multiple of the class count " + std::to_string(spec.classes));
  }
  std::vector<Vector> means(spec.classes, Vector(spec.features));
  for (Vector& m : means) {
    for (double& v : m) v = stream.normal();
    normalize_in_place(m);
  }
  const double sigma = spec.noise / std::sqrt(static_cast<double>(spec.features));
  auto draw = [&](std::size_t label) {
    Feature f{means[label], label};
    for (double& v : f.x) v += sigma * stream.normal();
    normalize_in_place(f.x);
    return f;
  };
  SyntheticData out;
  out.datasets.resize(spec.nodes);
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    LocalDataset& ds = out.datasets[i];
    ds.owner_label = i % spec.classes;
    for (std::size_t s = 0; s < spec.per_node; ++s) ds.samples.push_back(draw(ds.owner_label));
  }
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t s = 0; s < spec.test_per_class; ++s) out.test_set.push_back(draw(c));
  }
  return out;
}

}  // namespace ncota
