#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ncota {

using Vector = std::vector<double>;
using Complex = std::complex<double>;

/// Complex baseband samples as seen on the air (transmit, receive, or pilot).
using Frame = std::vector<Complex>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

inline double l1_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += std::abs(v);
  return acc;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("squared_distance: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("axpy: length mismatch");
  }
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

inline double squared_norm(std::span<const Complex> a) {
  double acc = 0.0;
  for (const Complex& v : a) acc += std::norm(v);
  return acc;
}

/// Arithmetic mean of a set of equal-length vectors.
inline Vector mean_of(std::span<const Vector> vectors) {
  if (vectors.empty()) {
    throw std::invalid_argument("mean_of: empty set");
  }
  Vector out(vectors.front().size(), 0.0);
  for (const Vector& v : vectors) axpy(1.0, v, out);
  for (double& v : out) v /= static_cast<double>(vectors.size());
  return out;
}

}  // namespace ncota
