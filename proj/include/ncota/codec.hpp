#pragma once

// Energy-simplex representation of parameter vectors.
//
// A vector w with ||w|| <= r is written as a convex combination of the
// M = 2d+1 codewords {+sqrt(d) r e_m, -sqrt(d) r e_m, 0}. The combination
// weights p are nonnegative and sum to one, so they can drive the per-sample
// energy of a transmitted frame. Codewords are never materialized.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ncota/linalg.hpp"
#include "ncota/rng.hpp"

namespace ncota {

class Codebook {
 public:
  Codebook(std::size_t dim, double radius) : dim_(dim), radius_(radius) {
    if (dim == 0) throw std::invalid_argument("Codebook: dimension must be positive");
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw std::invalid_argument("Codebook: radius must be positive and finite");
    }
  }

  std::size_t dim() const { return dim_; }
  double radius() const { return radius_; }
  std::size_t size() const { return 2 * dim_ + 1; }

  /// Magnitude sqrt(d) * r of the nonzero codewords.
  double scale() const { return std::sqrt(static_cast<double>(dim_)) * radius_; }

  /// Codeword m (0-based): m < d is +scale e_m, d <= m < 2d is -scale e_{m-d},
  /// m == 2d is the zero vector.
  Vector codeword(std::size_t m) const {
    if (m >= size()) throw std::out_of_range("Codebook::codeword: index out of range");
    Vector z(dim_, 0.0);
    if (m < dim_) {
      z[m] = scale();
    } else if (m < 2 * dim_) {
      z[m - dim_] = -scale();
    }
    return z;
  }

  /// sum_m weights[m] * z_m, for any real weights of length M.
  Vector combine(std::span<const double> weights) const {
    if (weights.size() != size()) {
      throw std::invalid_argument("Codebook::combine: expected " + std::to_string(size()) +
                                  " weights, got " + std::to_string(weights.size()));
    }
    Vector out(dim_);
    const double s = scale();
    for (std::size_t k = 0; k < dim_; ++k) out[k] = s * (weights[k] - weights[dim_ + k]);
    return out;
  }

 private:
  std::size_t dim_;
  double radius_;
};

struct EnergyProfile {
  Vector weights;

  std::size_t size() const { return weights.size(); }
};

inline constexpr double kSimplexTolerance = 1e-12;

// Relative slack accepted on ball membership; projected iterates can land a
// few ulps outside the sphere.
inline constexpr double kBallTolerance = 1e-12;

inline EnergyProfile encode(std::span<const double> w, const Codebook& cb) {
  if (w.size() != cb.dim()) {
    throw std::invalid_argument("encode: vector length does not match codebook dimension");
  }
  if (norm(w) > cb.radius() * (1.0 + kBallTolerance)) {
    throw std::domain_error("encode: vector lies outside the radius-" +
                            std::to_string(cb.radius()) + " ball");
  }
  const std::size_t d = cb.dim();
  const double inv_scale = 1.0 / cb.scale();
  EnergyProfile p{Vector(cb.size(), 0.0)};
  double used = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    p.weights[k] = std::max(w[k], 0.0) * inv_scale;
    p.weights[d + k] = std::max(-w[k], 0.0) * inv_scale;
    used += p.weights[k] + p.weights[d + k];
  }
  double residual = 1.0 - used;
  if (residual < 0.0) {
    if (residual < -kSimplexTolerance) {
      throw std::domain_error("encode: l1 norm exceeds sqrt(d) r");
    }
    residual = 0.0;
    for (std::size_t m = 0; m + 1 < cb.size(); ++m) p.weights[m] /= used;
  }
  p.weights.back() = residual;
  return p;
}

inline void check_simplex(const EnergyProfile& p, std::size_t expected_size) {
  if (p.size() != expected_size) {
    throw std::invalid_argument("energy profile has wrong length");
  }
  double total = 0.0;
  for (double v : p.weights) {
    if (v < -kSimplexTolerance || !std::isfinite(v)) {
      throw std::domain_error("energy profile has a negative or non-finite weight");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::domain_error("energy profile weights do not sum to one");
  }
}

inline Vector reconstruct(const EnergyProfile& p, const Codebook& cb) {
  check_simplex(p, cb.size());
  return cb.combine(p.weights);
}

/// Real nonnegative frame x = sqrt(E M) sqrt(p); energy per sample is exactly E.
inline Frame transmit_signal(const EnergyProfile& p, double energy_per_sample) {
  if (!(energy_per_sample > 0.0)) {
    throw std::invalid_argument("transmit_signal: energy per sample must be positive");
  }
  const double amplitude = std::sqrt(energy_per_sample * static_cast<double>(p.size()));
  Frame x(p.size());
  for (std::size_t m = 0; m < p.size(); ++m) {
    if (p.weights[m] < 0.0) throw std::domain_error("transmit_signal: negative weight");
    x[m] = amplitude * std::sqrt(p.weights[m]);
  }
  return x;
}

/// Uniform draw from the radius-r ball in R^d: uniform direction, radius r u^(1/d).
inline Vector sample_in_ball(std::size_t dim, double radius, Stream& stream) {
  Vector w(dim);
  double n2 = 0.0;
  do {
    for (double& v : w) v = stream.normal();
    n2 = squared_norm(w);
  } while (n2 == 0.0);
  const double target = radius * std::pow(stream.uniform(), 1.0 / static_cast<double>(dim));
  const double scale = target / std::sqrt(n2);
  for (double& v : w) v *= scale;
  return w;
}

}  // namespace ncota
