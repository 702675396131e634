#include <gtest/gtest.h>

#include <cmath>

#include "ncota/objective.hpp"

namespace ncota {
namespace {

Vector random_unit(std::size_t n, Stream& s) {
  Vector v(n);
  for (double& x : v) x = s.normal();
  normalize_in_place(v);
  return v;
}

LocalDataset random_dataset(std::size_t classes, std::size_t features, std::size_t count, Stream& s) {
  LocalDataset ds;
  for (std::size_t k = 0; k < count; ++k) ds.samples.push_back({random_unit(features, s), s.below(classes)});
  return ds;
}

std::unique_ptr<LogisticProblem> small_problem(double mu, std::uint64_t seed) {
  Stream s = derive_stream(seed, StreamKey::shared(StreamLabel::kDataShuffle, 0, 0));
  SyntheticSpec spec;
  spec.features = 6;
  spec.nodes = 10;
  const SyntheticData data = synthetic_dataset(spec, s);
  return std::make_unique<LogisticProblem>(LogisticRegression(10, 6, mu), data.datasets, data.test_set);
}

TEST(Loss, ZeroWeightsGiveLogClassCount) {
  Stream s = derive_stream(1, StreamKey::shared(StreamLabel::kDataShuffle, 0, 0));
  const LogisticRegression model(10, 50, 0.3);
  const Vector w(model.dim(), 0.0);
  EXPECT_EQ(model.dim(), 450u);
  for (std::size_t label = 0; label < 10; ++label) {
    EXPECT_NEAR(model.loss({random_unit(50, s), label}, w), 2.302585092994046, 1e-12);
  }
}

TEST(Loss, VanishesAsTrueClassDominates) {
  const LogisticRegression model(3, 2, 0.0);
  const Feature f{{1.0, 0.0}, 2};
  double previous = model.loss(f, Vector(4, 0.0));
  for (double a = 1.0; a <= 64.0; a *= 2.0) {
    const double l = model.loss(f, Vector{0.0, 0.0, a, 0.0});
    EXPECT_LT(l, previous);
    previous = l;
  }
  EXPECT_LT(previous, 1e-20);
}

TEST(Loss, BoundedBelowByRegularizer) {
  Stream s = derive_stream(2, StreamKey::shared(StreamLabel::kDataShuffle, 0, 0));
  const LogisticRegression model(5, 4, 0.7);
  for (int trial = 0; trial < 200; ++trial) {
    Vector w(model.dim());
    for (double& v : w) v = 3.0 * s.normal();
    const Feature f{random_unit(4, s), s.below(5)};
    EXPECT_GE(model.loss(f, w), 0.35 * squared_norm(w));
  }
}

TEST(Loss, RejectsBadLabelAndShape) {
  const LogisticRegression model(3, 2, 0.1);
  EXPECT_THROW(model.loss({{1.0, 0.0}, 3}, Vector(4, 0.0)), std::out_of_range);
  EXPECT_THROW(model.loss({{1.0, 0.0, 0.0}, 1}, Vector(4, 0.0)), std::invalid_argument);
  EXPECT_THROW(model.loss({{1.0, 0.0}, 1}, Vector(5, 0.0)), std::invalid_argument);
}

TEST(LocalGradient, MatchesCentralDifferences) {
  Stream s = derive_stream(3, StreamKey::shared(StreamLabel::kDataShuffle, 0, 0));
  const LogisticRegression model(10, 8, 0.001);
  const double h = 1e-5;
  double worst = 0.0;
  for (int probe = 0; probe < 20; ++probe) {
    const LocalDataset ds = random_dataset(10, 8, 5, s);
    Vector w(model.dim());
    for (double& v : w) v = s.normal();
    const Vector g = model.local_gradient(ds, w);
    Vector fd(model.dim());
    for (std::size_t k = 0; k < w.size(); ++k) {
      Vector plus = w, minus = w;
      plus[k] += h;
      minus[k] -= h;
      fd[k] = (model.local_value(ds, plus) - model.local_value(ds, minus)) / (2 * h);
    }
    worst = std::max(worst, std::sqrt(squared_distance(g, fd)) / norm(fd));
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(LocalGradient, ZeroWeightsLabelZeroGivesTenthOfFeature) {
  Stream s = derive_stream(4, StreamKey::shared(StreamLabel::kDataShuffle, 0, 0));
  const LogisticRegression model(10, 5, 0.25);
  const Vector f = random_unit(5, s);
  const Vector g = model.local_gradient(LocalDataset{{{f, 0}}, 0}, Vector(model.dim(), 0.0));
  for (std::size_t c = 1; c < 10; ++c) {
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(g[(c - 1) * 5 + k], f[k] / 10.0, 1e-15);
  }
}

TEST(LocalGradient, RejectsEmptyDataset) {
  const LogisticRegression model(3, 2, 0.1);
  EXPECT_THROW(model.local_gradient(LocalDataset{}, Vector(4, 0.0)), std::invalid_argument);
  EXPECT_THROW(model.local_value(LocalDataset{}, Vector(4, 0.0)), std::invalid_argument);
}

TEST(GlobalObjective, SingleNodeEqualsLocal) {
  Stream s = derive_stream(5, StreamKey::shared(StreamLabel::kDataShuffle, 0, 0));
  const LogisticRegression model(4, 3, 0.1);
  const LocalDataset ds = random_dataset(4, 3, 7, s);
  const LogisticProblem problem(model, {ds}, {});
  Vector w(model.dim());
  for (double& v : w) v = s.normal();
  const ObjectiveValue fv = global_objective(problem, w);
  EXPECT_DOUBLE_EQ(fv.value, model.local_value(ds, w));
  EXPECT_EQ(fv.gradient, model.local_gradient(ds, w));
  EXPECT_DOUBLE_EQ(global_value(problem, w), fv.value);
}

TEST(GlobalObjective, GradientIsAverageOfLocalGradients) {
  const auto problem = small_problem(0.01, 6);
  Stream s = derive_stream(6, StreamKey::shared(StreamLabel::kDataShuffle, 0, 1));
  Vector w(problem->dim());
  for (double& v : w) v = s.normal();
  Vector avg(problem->dim(), 0.0);
  for (std::size_t i = 0; i < problem->nodes(); ++i) {
    axpy(1.0 / problem->nodes(), problem->local_gradient(i, w), avg);
  }
  const Vector g = global_objective(*problem, w).gradient;
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(g[k], avg[k], 1e-12);
}

TEST(GlobalObjective, StronglyConvexAndSmoothOnRandomPairs) {
  const double mu = 0.001;
  const auto problem = small_problem(mu, 7);
  const double big_l = problem->smoothness();
  EXPECT_DOUBLE_EQ(big_l, mu + 2.0);
  Stream s = derive_stream(7, StreamKey::shared(StreamLabel::kDataShuffle, 0, 1));
  for (int pair = 0; pair < 100; ++pair) {
    Vector a(problem->dim()), b(problem->dim());
    for (double& v : a) v = 2.0 * s.normal();
    for (double& v : b) v = 2.0 * s.normal();
    Vector diff_g = global_objective(*problem, a).gradient;
    axpy(-1.0, global_objective(*problem, b).gradient, diff_g);
    Vector diff_w = a;
    axpy(-1.0, b, diff_w);
    const double curvature = dot(diff_g, diff_w);
    const double dist2 = squared_norm(diff_w);
    EXPECT_GE(curvature, mu * dist2 * (1 - 1e-12));
    EXPECT_LE(curvature, big_l * dist2);
  }
}

TEST(SolveOptimum, QuadraticToyGivesMeanOfCentres) {
  const std::vector<Vector> centres{{1.0, 2.0, -1.0}, {3.0, 0.0, 1.0}, {-1.0, 1.0, 3.0}};
  const QuadraticProblem problem(centres);
  const Optimum opt = solve_optimum(problem);
  ASSERT_TRUE(opt.converged);
  EXPECT_NEAR(opt.w[0], 1.0, 1e-8);
  EXPECT_NEAR(opt.w[1], 1.0, 1e-8);
  EXPECT_NEAR(opt.w[2], 1.0, 1e-8);
}

TEST(SolveOptimum, StopsOnGradientToleranceAtDeskScale) {
  const auto problem = small_problem(0.01, 8);
  const Optimum opt = solve_optimum(*problem);
  ASSERT_TRUE(opt.converged);
  EXPECT_LE(opt.gradient_norm, 1e-9);
  EXPECT_LE(norm(global_objective(*problem, opt.w).gradient), 1e-9);
}

TEST(SolveOptimum, IndependentOfStartingPoint) {
  const auto problem = small_problem(0.01, 9);
  Stream s = derive_stream(9, StreamKey::shared(StreamLabel::kDataShuffle, 0, 1));
  Vector start(problem->dim());
  for (double& v : start) v = 5.0 * s.normal();
  const Optimum a = solve_optimum(*problem);
  const Optimum b = solve_optimum(*problem, start);
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_LT(std::sqrt(squared_distance(a.w, b.w)), 1e-6);
}

TEST(SolveOptimum, ReportsIterationCap) {
  const auto problem = small_problem(0.01, 10);
  const Optimum opt = solve_optimum(*problem, {}, SolverOptions{1e-9, 3});
  EXPECT_FALSE(opt.converged);
  EXPECT_EQ(opt.iterations, 3u);
}

TEST(Radius, TightForCentredQuadratic) {
  const QuadraticProblem problem({{3.0, 4.0}});
  const Vector g0 = global_objective(problem, Vector(2, 0.0)).gradient;
  const double r = radius_from_optimum(1.0, g0);
  EXPECT_DOUBLE_EQ(r, 5.0);
  EXPECT_NEAR(norm(solve_optimum(problem).w), r, 1e-9);
  EXPECT_DOUBLE_EQ(radius_from_optimum(2.0, g0), 2.5);
  EXPECT_THROW(radius_from_optimum(0.0, g0), std::invalid_argument);
}

TEST(Radius, ContainsOptimumOfLogisticTask) {
  const auto problem = small_problem(0.01, 11);
  const double r = radius_from_optimum(0.01, global_objective(*problem, Vector(problem->dim(), 0.0)).gradient);
  EXPECT_LE(norm(solve_optimum(*problem).w), r);
}

TEST(Synthetic, UnitNormFeaturesAndTwoNodesPerClass) {
  Stream s = derive_stream(12, StreamKey::shared(StreamLabel::kDataShuffle, 0, 0));
  const SyntheticData data = synthetic_dataset(SyntheticSpec{}, s);
  ASSERT_EQ(data.datasets.size(), 20u);
  std::vector<int> owners(10, 0);
  for (const LocalDataset& ds : data.datasets) {
    ++owners[ds.owner_label];
    ASSERT_EQ(ds.samples.size(), 5u);
    for (const Feature& f : ds.samples) {
      EXPECT_EQ(f.label, ds.owner_label);
      EXPECT_NEAR(norm(f.x), 1.0, 1e-9);
    }
  }
  for (int n : owners) EXPECT_EQ(n, 2);
  EXPECT_EQ(data.test_set.size(), 1000u);
}

TEST(Synthetic, RejectsIndivisibleNodeCount) {
  Stream s = derive_stream(12, StreamKey::shared(StreamLabel::kDataShuffle, 0, 0));
  SyntheticSpec spec;
  spec.nodes = 15;
  EXPECT_THROW(synthetic_dataset(spec, s), std::invalid_argument);
}

TEST(Synthetic, SeparableAtLowNoise) {
  Stream s = derive_stream(13, StreamKey::shared(StreamLabel::kDataShuffle, 0, 0));
  SyntheticSpec spec;
  spec.noise = 0.1;
  const SyntheticData data = synthetic_dataset(spec, s);
  const LogisticProblem problem(LogisticRegression(10, spec.features, 0.001), data.datasets, data.test_set);
  const Optimum opt = solve_optimum(problem);
  std::vector<Feature> train;
  for (const LocalDataset& ds : data.datasets) train.insert(train.end(), ds.samples.begin(), ds.samples.end());
  EXPECT_LT(problem.model().error_rate(train, opt.w), 0.05);
}

TEST(Predict, LowestIndexWinsTies) {
  const LogisticRegression model(3, 1, 0.0);
  EXPECT_EQ(model.predict(Vector{1.0}, Vector{0.0, 0.0}), 0u);
  EXPECT_EQ(model.predict(Vector{1.0}, Vector{2.0, 2.0}), 1u);
}

}  // namespace
}  // namespace ncota
