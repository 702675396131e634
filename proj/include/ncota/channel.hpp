#pragma once

// Node deployment, free-space average gains, Rayleigh fading draws,
// interference sources and received-signal superposition.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ncota/linalg.hpp"
#include "ncota/rng.hpp"

namespace ncota {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

struct Position {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Convert a power level in dBm (or a density in dBm/Hz) to watts (or W/Hz).
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

struct RadioParameters {
  double carrier_frequency_hz = 3e9;
  double bandwidth_hz = 5e6;
  double tx_power_w = 0.1;
  double noise_psd_w_per_hz = dbm_to_watts(-173.0);

  double wavelength_m() const { return kSpeedOfLight / carrier_frequency_hz; }

  /// Transmit energy per complex sample, E = P_tx / W.
  double energy_per_sample() const { return tx_power_w / bandwidth_hz; }

  /// Thermal noise variance per complex sample; equals N0 in joules.
  double noise_variance() const { return noise_psd_w_per_hz; }
};

struct Deployment {
  std::vector<Position> positions;
  double area_radius_m = 0.0;

  std::size_t size() const { return positions.size(); }
};

/// N points i.i.d. uniform over a disc centred at the origin. Coincident
/// points are redrawn.
inline Deployment deploy(std::size_t nodes, double area_radius_m, Stream& stream) {
  if (nodes < 2) throw std::invalid_argument("deploy: need at least two nodes");
  if (!(area_radius_m > 0.0)) throw std::invalid_argument("deploy: area radius must be positive");
  Deployment dep{{}, area_radius_m};
  dep.positions.reserve(nodes);
  while (dep.positions.size() < nodes) {
    const double rho = area_radius_m * std::sqrt(stream.uniform());
    const double angle = stream.phase();
    const Position candidate{rho * std::cos(angle), rho * std::sin(angle)};
    bool coincident = false;
    for (const Position& p : dep.positions) {
      if (distance(p, candidate) == 0.0) {
        coincident = true;
        break;
      }
    }
    if (!coincident) dep.positions.push_back(candidate);
  }
  return dep;
}

inline void write_deployment_csv(std::ostream& os, const Deployment& dep) {
  os << "node_index,x_m,y_m\n";
  os.precision(17);
  for (std::size_t i = 0; i < dep.size(); ++i) {
    os << i << ',' << dep.positions[i].x << ',' << dep.positions[i].y << '\n';
  }
}

/// Free-space (Friis) power gain (lambda / (4 pi d))^2.
inline double friis_gain(double distance_m, double carrier_frequency_hz) {
  if (!(distance_m > 0.0)) throw std::domain_error("friis_gain: distance must be positive");
  if (!(carrier_frequency_hz > 0.0)) throw std::domain_error("friis_gain: frequency must be positive");
  const double ratio = kSpeedOfLight / carrier_frequency_hz / (4.0 * std::numbers::pi * distance_m);
  return ratio * ratio;
}

/// Symmetric N x N matrix of average channel gains with zero diagonal.
class GainMatrix {
 public:
  GainMatrix() = default;
  explicit GainMatrix(std::size_t n) : n_(n), gains_(n * n, 0.0) {}

  static GainMatrix from_deployment(const Deployment& dep, double carrier_frequency_hz) {
    GainMatrix g(dep.size());
    for (std::size_t i = 0; i < dep.size(); ++i) {
      for (std::size_t j = i + 1; j < dep.size(); ++j) {
        g.set(i, j, friis_gain(distance(dep.positions[i], dep.positions[j]), carrier_frequency_hz));
      }
    }
    return g;
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return gains_[i * n_ + j]; }

  /// Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double gain) {
    if (i == j) throw std::invalid_argument("GainMatrix: diagonal is fixed at zero");
    if (!(gain >= 0.0)) throw std::invalid_argument("GainMatrix: gains must be nonnegative");
    gains_[i * n_ + j] = gain;
    gains_[j * n_ + i] = gain;
  }

  /// Sum of the gains incoming into node i.
  double incoming_sum(std::size_t i) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += (*this)(i, j);
    return acc;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> gains_;
};

/// One iteration's fading coefficients h_ij (receiver i, transmitter j).
class ChannelRealization {
 public:
  ChannelRealization() = default;
  explicit ChannelRealization(std::size_t n) : n_(n), h_(n * n) {}

  std::size_t size() const { return n_; }
  Complex operator()(std::size_t i, std::size_t j) const { return h_[i * n_ + j]; }
  Complex& operator()(std::size_t i, std::size_t j) { return h_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<Complex> h_;
};

/// h_ij = sqrt(Lambda_ij) z_ij with z_ij ~ CN(0,1); directions drawn independently.
inline ChannelRealization sample_channels(const GainMatrix& gains, Stream& stream) {
  const std::size_t n = gains.size();
  ChannelRealization h(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      h(i, j) = std::sqrt(gains(i, j)) * stream.complex_normal();
    }
  }
  return h;
}

enum class InterferenceKind { kNone, kGaussianJammer, kSingleSample };

constexpr std::string_view to_string(InterferenceKind kind) {
  switch (kind) {
    case InterferenceKind::kNone: return "none";
    case InterferenceKind::kGaussianJammer: return "gaussian-jammer";
    case InterferenceKind::kSingleSample: return "single-sample";
  }
  return "unknown";
}

inline InterferenceKind parse_interference_kind(std::string_view text) {
  if (text == "none") return InterferenceKind::kNone;
  if (text == "gaussian-jammer") return InterferenceKind::kGaussianJammer;
  if (text == "single-sample") return InterferenceKind::kSingleSample;
  throw std::invalid_argument("unknown interference kind '" + std::string(text) + "'");
}

/// External interferer. `gains` holds the average gain Gamma_i towards every node.
struct InterferenceSource {
  InterferenceKind kind = InterferenceKind::kNone;
  Position position;
  double energy_per_sample = 0.0;
  std::vector<double> gains;

  static InterferenceSource none(std::size_t nodes) {
    return {InterferenceKind::kNone, {}, 0.0, std::vector<double>(nodes, 0.0)};
  }

  static InterferenceSource at(InterferenceKind kind, Position position, double energy_per_sample,
                               const Deployment& dep, double carrier_frequency_hz) {
    InterferenceSource src{kind, position, energy_per_sample, std::vector<double>(dep.size(), 0.0)};
    if (kind == InterferenceKind::kNone) return src;
    for (std::size_t i = 0; i < dep.size(); ++i) {
      src.gains[i] = friis_gain(distance(position, dep.positions[i]), carrier_frequency_hz);
    }
    return src;
  }
};

/// The jammer's emitted waveform v ~ CN(0, E I) for one slot, shared by all receivers.
/// Empty for sources that emit no common waveform.
inline Frame draw_jammer_waveform(const InterferenceSource& source, std::size_t length, Stream& stream) {
  if (source.kind != InterferenceKind::kGaussianJammer) return {};
  Frame v(length);
  const double amplitude = std::sqrt(source.energy_per_sample);
  for (Complex& s : v) s = amplitude * stream.complex_normal();
  return v;
}

/// Interference observed at one receiver over one slot (thermal noise excluded).
/// `fading` supplies the receiver's draw of g_i ~ CN(0, Gamma_i).
inline Frame interference_frame(const InterferenceSource& source, std::size_t receiver, std::size_t length,
                                std::span<const Complex> jammer_waveform, Stream& fading) {
  Frame n(length, Complex{});
  if (source.kind == InterferenceKind::kNone || length == 0) return n;
  if (receiver >= source.gains.size()) throw std::out_of_range("interference_frame: receiver index");
  const Complex g = std::sqrt(source.gains[receiver]) * fading.complex_normal();
  if (source.kind == InterferenceKind::kGaussianJammer) {
    if (jammer_waveform.size() != length) {
      throw std::invalid_argument("interference_frame: jammer waveform length mismatch");
    }
    for (std::size_t m = 0; m < length; ++m) n[m] = g * jammer_waveform[m];
  } else {
    n[0] = g * std::sqrt(source.energy_per_sample * static_cast<double>(length));
  }
  return n;
}

/// Adds CN(0, variance I) thermal noise in place.
inline void add_thermal_noise(std::span<Complex> frame, double variance, Stream& stream) {
  if (variance == 0.0) return;
  const double amplitude = std::sqrt(variance);
  for (Complex& s : frame) s += amplitude * stream.complex_normal();
}

struct Transmission {
  std::size_t node;
  std::span<const Complex> frame;
};

/// y_i = sum_j h_ij x_j + impairment, where the sum runs over active transmitters.
inline Frame superpose(std::span<const Transmission> transmitters, std::size_t receiver,
                       const ChannelRealization& h, std::span<const Complex> impairment) {
  Frame y(impairment.begin(), impairment.end());
  for (const Transmission& tx : transmitters) {
    if (tx.frame.size() != y.size()) throw std::invalid_argument("superpose: frame length mismatch");
    if (tx.node == receiver) throw std::invalid_argument("superpose: receiver cannot transmit to itself");
    const Complex coeff = h(receiver, tx.node);
    for (std::size_t m = 0; m < y.size(); ++m) y[m] += coeff * tx.frame[m];
  }
  return y;
}

}  // namespace ncota
