#pragma once

// One iteration's over-the-air exchange for the whole network.
//
// Draws roles, the shared rotation and pilot, fading and impairments from
// streams keyed by (realization, iteration[, node]), lets every transmitter put
// its frame on the air, and runs the selected estimator at every receiver.

#include <cstdint>
#include <string>
#include <string_view>

#include "ncota/channel.hpp"
#include "ncota/codec.hpp"
#include "ncota/ota.hpp"
#include "ncota/rng.hpp"

namespace ncota {

enum class Estimator { kNcota, kIrNcota, kOracle };

constexpr std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::kNcota: return "ncota";
    case Estimator::kIrNcota: return "ir-ncota";
    case Estimator::kOracle: return "oracle";
  }
  return "unknown";
}

inline Estimator parse_estimator(std::string_view text) {
  if (text == "ncota") return Estimator::kNcota;
  if (text == "ir-ncota") return Estimator::kIrNcota;
  if (text == "oracle") return Estimator::kOracle;
  throw std::invalid_argument("unknown estimator '" + std::string(text) + "'");
}

/// Complex samples occupied by one iteration on the air. The oracle reports the
/// baseline frame since it stands in for NCOTA without consuming the channel.
inline std::size_t samples_per_frame(Estimator e, std::size_t dim, std::size_t pilot_length) {
  const std::size_t data = 2 * dim + 1;
  return e == Estimator::kIrNcota ? data + pilot_length : data;
}

inline double frame_duration_s(Estimator e, std::size_t dim, std::size_t pilot_length, double bandwidth_hz) {
  return static_cast<double>(samples_per_frame(e, dim, pilot_length)) / bandwidth_hz;
}

struct DisagreementEstimate {
  Vector vector;
  Vector raw_energy;
  double gain_estimate = 0.0;
};

/// Static description of the air interface for one realization.
struct AirInterface {
  const GainMatrix* gains = nullptr;
  const InterferenceSource* interference = nullptr;
  RadioParameters radio;
  double p_tx = 0.34;
  std::size_t pilot_length = 10;
  RotationMode rotation_mode = RotationMode::kSignFlip;
};

struct ExchangeKey {
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
  std::uint64_t iteration = 0;

  Stream stream(StreamLabel label) const {
    return derive_stream(seed, StreamKey::shared(label, realization, iteration));
  }
  Stream stream(StreamLabel label, std::size_t node) const {
    return derive_stream(seed, StreamKey::local(label, realization, iteration, node));
  }
};

namespace detail {

/// Impairment n_i for one slot: external interference plus thermal noise.
/// Data slot consumes the streams first, the pilot slot second.
inline Frame impairment(const AirInterface& air, std::size_t receiver, std::size_t length,
                        std::span<const Complex> jammer_waveform, Stream& interference_fading,
                        Stream& noise) {
  Frame n = interference_frame(*air.interference, receiver, length, jammer_waveform, interference_fading);
  add_thermal_noise(n, air.radio.noise_variance(), noise);
  return n;
}

}  // namespace detail

/// Runs one exchange. `parameters` must all lie in the codebook's ball.
inline std::vector<DisagreementEstimate> exchange(Estimator estimator, std::span<const Vector> parameters,
                                                  const Codebook& cb, const AirInterface& air,
                                                  const ExchangeKey& key) {
  const std::size_t n = parameters.size();
  const GainMatrix& gains = *air.gains;
  if (gains.size() != n) throw std::invalid_argument("exchange: gain matrix does not match node count");
  std::vector<DisagreementEstimate> out(n);

  if (estimator == Estimator::kOracle) {
    for (std::size_t i = 0; i < n; ++i) out[i].vector = disagreement_oracle(parameters, gains, i);
    return out;
  }

  const double energy = air.radio.energy_per_sample();
  const std::size_t frame_len = cb.size();
  const bool robust = estimator == Estimator::kIrNcota;

  Stream role_stream = key.stream(StreamLabel::kRoles);
  const RoleAssignment roles = draw_roles(n, air.p_tx, role_stream);

  Rotation rotation = Rotation::sign_flip(1.0);
  PilotSequence pilot;
  Frame pilot_samples;
  if (robust) {
    Stream rot_stream = key.stream(StreamLabel::kSharedRotation);
    rotation = draw_rotation(cb.dim(), rot_stream, air.rotation_mode);
    Stream pilot_stream = key.stream(StreamLabel::kSharedPilot);
    pilot = pilot_sequence(air.pilot_length, energy, pilot_stream);
    pilot_samples = pilot.samples();
  }

  std::vector<Frame> tx_frames;
  std::vector<Transmission> data_tx;
  std::vector<Transmission> pilot_tx;
  tx_frames.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!roles.is_transmitter(j)) continue;
    const EnergyProfile p = robust ? encode(rotation.apply(parameters[j]), cb) : encode(parameters[j], cb);
    tx_frames.push_back(transmit_signal(p, energy));
  }
  for (std::size_t j = 0, t = 0; j < n; ++j) {
    if (!roles.is_transmitter(j)) continue;
    data_tx.push_back({j, tx_frames[t++]});
    if (robust) pilot_tx.push_back({j, pilot_samples});
  }

  Stream channel_stream = key.stream(StreamLabel::kChannel);
  const ChannelRealization h = sample_channels(gains, channel_stream);

  Stream jammer_stream = key.stream(StreamLabel::kInterference);
  const Frame jammer_data = draw_jammer_waveform(*air.interference, frame_len, jammer_stream);
  const Frame jammer_pilot =
      robust ? draw_jammer_waveform(*air.interference, air.pilot_length, jammer_stream) : Frame{};

  for (std::size_t i = 0; i < n; ++i) {
    DisagreementEstimate& est = out[i];
    if (!roles.is_receiver(i)) {
      est.vector.assign(cb.dim(), 0.0);
      est.raw_energy.assign(frame_len, 0.0);
      continue;
    }
    Stream fading = key.stream(StreamLabel::kInterference, i);
    Stream noise = key.stream(StreamLabel::kNoise, i);
    const Frame y = superpose(data_tx, i, h, detail::impairment(air, i, frame_len, jammer_data, fading, noise));
    if (!robust) {
      est.raw_energy = ncota_energy(y, true, air.radio.noise_variance(), air.p_tx, energy);
      est.vector = ncota_estimate(est.raw_energy, parameters[i], cb);
      continue;
    }
    const Frame y_pilot =
        superpose(pilot_tx, i, h, detail::impairment(air, i, air.pilot_length, jammer_pilot, fading, noise));
    est.raw_energy = ir_energy(y, true, air.p_tx, energy);
    est.gain_estimate = lambda_estimate(y_pilot, pilot, true, air.p_tx, energy);
    est.vector = ir_combine(ir_s_estimate(est.raw_energy, rotation, cb), est.gain_estimate, parameters[i]);
  }
  return out;
}

}  // namespace ncota
