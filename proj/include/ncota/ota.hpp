#pragma once

// Non-coherent over-the-air disagreement estimation.
//
// Baseline (NCOTA): receivers measure per-sample energy, subtract the known
// noise floor, and read the disagreement directly off the codebook.
//
// Interference-robust (IR-NCOTA): transmitters encode a network-common random
// rotation of their vector and additionally send a shared pseudo-random pilot.
// The receiver estimates the gain-weighted neighbour sum from raw energies
// (rotated back), and the incoming gain sum from the pilot cross terms. Any
// interference energy that is independent of the rotation and pilot phases then
// contributes zero mean to both estimates.

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ncota/channel.hpp"
#include "ncota/codec.hpp"
#include "ncota/linalg.hpp"
#include "ncota/rng.hpp"

namespace ncota {

/// Half-duplex roles for one iteration. receiving[i] is chi_i (1 = receiver).
struct RoleAssignment {
  std::vector<std::uint8_t> receiving;
  double p_tx = 0.0;

  std::size_t size() const { return receiving.size(); }
  bool is_receiver(std::size_t i) const { return receiving[i] != 0; }
  bool is_transmitter(std::size_t i) const { return receiving[i] == 0; }
};

inline void check_transmit_probability(double p_tx) {
  if (!(p_tx > 0.0 && p_tx < 1.0)) {
    throw std::invalid_argument("transmit probability must lie in (0, 1), got " + std::to_string(p_tx));
  }
}

inline RoleAssignment draw_roles(std::size_t nodes, double p_tx, Stream& stream) {
  check_transmit_probability(p_tx);
  RoleAssignment roles{std::vector<std::uint8_t>(nodes), p_tx};
  for (auto& flag : roles.receiving) flag = stream.bernoulli(p_tx) ? 0 : 1;
  return roles;
}

/// Normalisation (1 - p_tx) p_tx E n shared by the energy and pilot estimators.
inline double estimator_normalisation(double p_tx, double energy_per_sample, std::size_t samples) {
  return (1.0 - p_tx) * p_tx * energy_per_sample * static_cast<double>(samples);
}

/// Baseline received-energy vector with noise-floor compensation. Entries may be negative.
inline Vector ncota_energy(std::span<const Complex> y, bool receiving, double noise_variance, double p_tx,
                           double energy_per_sample) {
  Vector r(y.size(), 0.0);
  if (!receiving) return r;
  const double inv = 1.0 / estimator_normalisation(p_tx, energy_per_sample, y.size());
  for (std::size_t m = 0; m < y.size(); ++m) r[m] = (std::norm(y[m]) - noise_variance) * inv;
  return r;
}

/// d_hat = sum_m r_m (z_m - w).
inline Vector ncota_estimate(std::span<const double> raw_energy, std::span<const double> w, const Codebook& cb) {
  if (w.size() != cb.dim()) throw std::invalid_argument("ncota_estimate: dimension mismatch");
  Vector d_hat = cb.combine(raw_energy);
  const double total = std::accumulate(raw_energy.begin(), raw_energy.end(), 0.0);
  axpy(-total, w, d_hat);
  return d_hat;
}

enum class RotationMode { kSignFlip, kSignedPermutation };

constexpr std::string_view to_string(RotationMode mode) {
  return mode == RotationMode::kSignFlip ? "sign-flip" : "signed-permutation";
}

inline RotationMode parse_rotation_mode(std::string_view text) {
  if (text == "sign-flip") return RotationMode::kSignFlip;
  if (text == "signed-permutation") return RotationMode::kSignedPermutation;
  throw std::invalid_argument("unknown rotation mode '" + std::string(text) + "'");
}

/// Zero-mean orthogonal map shared by the whole network for one iteration.
class Rotation {
 public:
  static Rotation sign_flip(double sign) {
    Rotation u;
    u.mode_ = RotationMode::kSignFlip;
    u.sign_ = sign;
    return u;
  }

  /// (U w)[k] = signs[k] * w[permutation[k]].
  static Rotation signed_permutation(std::vector<std::size_t> permutation, std::vector<double> signs) {
    if (permutation.size() != signs.size()) throw std::invalid_argument("Rotation: size mismatch");
    Rotation u;
    u.mode_ = RotationMode::kSignedPermutation;
    u.permutation_ = std::move(permutation);
    u.signs_ = std::move(signs);
    return u;
  }

  RotationMode mode() const { return mode_; }
  double sign() const { return sign_; }
  const std::vector<std::size_t>& permutation() const { return permutation_; }
  const std::vector<double>& signs() const { return signs_; }

  Vector apply(std::span<const double> w) const {
    if (mode_ == RotationMode::kSignFlip) return scaled(w, sign_);
    check_dim(w.size());
    Vector out(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) out[k] = signs_[k] * w[permutation_[k]];
    return out;
  }

  Vector apply_transpose(std::span<const double> y) const {
    if (mode_ == RotationMode::kSignFlip) return scaled(y, sign_);
    check_dim(y.size());
    Vector out(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) out[permutation_[k]] = signs_[k] * y[k];
    return out;
  }

  friend bool operator==(const Rotation&, const Rotation&) = default;

 private:
  static Vector scaled(std::span<const double> w, double s) {
    Vector out(w.begin(), w.end());
    for (double& v : out) v *= s;
    return out;
  }

  void check_dim(std::size_t n) const {
    if (n != permutation_.size()) throw std::invalid_argument("Rotation: dimension mismatch");
  }

  RotationMode mode_ = RotationMode::kSignFlip;
  double sign_ = 1.0;
  std::vector<std::size_t> permutation_;
  std::vector<double> signs_;
};

/// Draws U from the network-common rotation stream.
inline Rotation draw_rotation(std::size_t dim, Stream& shared, RotationMode mode) {
  if (mode == RotationMode::kSignFlip) {
    return Rotation::sign_flip(shared.bernoulli(0.5) ? 1.0 : -1.0);
  }
  std::vector<std::size_t> perm(dim);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t k = dim; k > 1; --k) std::swap(perm[k - 1], perm[shared.below(k)]);
  std::vector<double> signs(dim);
  for (double& s : signs) s = shared.bernoulli(0.5) ? 1.0 : -1.0;
  return Rotation::signed_permutation(std::move(perm), std::move(signs));
}

/// Raw received energy without noise compensation; always nonnegative.
inline Vector ir_energy(std::span<const Complex> y, bool receiving, double p_tx, double energy_per_sample) {
  return ncota_energy(y, receiving, 0.0, p_tx, energy_per_sample);
}

/// s_hat = U^T sum_m r_m z_m, the estimate of the gain-weighted neighbour sum.
inline Vector ir_s_estimate(std::span<const double> raw_energy, const Rotation& u, const Codebook& cb) {
  return u.apply_transpose(cb.combine(raw_energy));
}

struct PilotSequence {
  std::vector<double> phases;
  double amplitude = 0.0;

  std::size_t size() const { return phases.size(); }

  Frame samples() const {
    Frame x(phases.size());
    for (std::size_t m = 0; m < phases.size(); ++m) x[m] = std::polar(amplitude, phases[m]);
    return x;
  }
};

inline PilotSequence pilot_sequence(std::size_t length, double energy_per_sample, Stream& shared) {
  if (length < 2) throw std::invalid_argument("pilot_sequence: pilot length must be at least 2");
  if (!(energy_per_sample > 0.0)) throw std::invalid_argument("pilot_sequence: energy must be positive");
  PilotSequence pilot{std::vector<double>(length), std::sqrt(energy_per_sample)};
  for (double& phi : pilot.phases) phi = shared.phase();
  return pilot;
}

/// Pilot-based estimate of the incoming gain sum; single draws may be negative.
inline double lambda_estimate(std::span<const Complex> y_pilot, const PilotSequence& pilot, bool receiving,
                              double p_tx, double energy_per_sample) {
  if (y_pilot.size() != pilot.size()) throw std::invalid_argument("lambda_estimate: pilot length mismatch");
  if (!receiving) return 0.0;
  const std::size_t n = pilot.size();
  const Frame x = pilot.samples();
  Complex correlation{};
  for (std::size_t m = 0; m < n; ++m) correlation += std::conj(x[m]) * y_pilot[m];
  const double cross = std::norm(correlation) / energy_per_sample - squared_norm(y_pilot);
  return cross / (estimator_normalisation(p_tx, energy_per_sample, n) * static_cast<double>(n - 1));
}

/// d_hat = s_hat - Lambda_hat w.
inline Vector ir_combine(std::span<const double> s_hat, double lambda_hat, std::span<const double> w) {
  Vector d_hat(s_hat.begin(), s_hat.end());
  axpy(-lambda_hat, w, d_hat);
  return d_hat;
}

/// Exact expected disagreement sum_{j != i} Lambda_ij (w_j - w_i).
inline Vector disagreement_oracle(std::span<const Vector> parameters, const GainMatrix& gains, std::size_t i) {
  if (parameters.size() != gains.size()) throw std::invalid_argument("disagreement_oracle: node count mismatch");
  const Vector& wi = parameters[i];
  Vector d(wi.size(), 0.0);
  for (std::size_t j = 0; j < parameters.size(); ++j) {
    if (j == i || gains(i, j) == 0.0) continue;
    const double g = gains(i, j);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += g * (parameters[j][k] - wi[k]);
  }
  return d;
}

}  // namespace ncota
