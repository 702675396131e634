#pragma once

// Named, reproducible random streams.
//
// Every stream is a Philox4x32-10 counter sequence whose key and counter
// prefix are derived from (master seed, StreamKey). Two handles built from the
// same inputs produce bit-identical sequences; handles with different keys are
// independent substreams. Sampling transforms are written out explicitly
// (Box-Muller, Lemire bounded integers) so draws do not depend on the
// standard library's distribution implementations.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>

#include "ncota/linalg.hpp"

namespace ncota {

enum class StreamLabel : std::uint32_t {
  kSharedRotation = 1,
  kSharedPilot = 2,
  kChannel = 3,
  kNoise = 4,
  kRoles = 5,
  kInterference = 6,
  kDataShuffle = 7,
  kDeployment = 8,
};

constexpr std::string_view to_string(StreamLabel label) {
  switch (label) {
    case StreamLabel::kSharedRotation: return "shared-rotation";
    case StreamLabel::kSharedPilot: return "shared-pilot";
    case StreamLabel::kChannel: return "channel";
    case StreamLabel::kNoise: return "noise";
    case StreamLabel::kRoles: return "roles";
    case StreamLabel::kInterference: return "interference";
    case StreamLabel::kDataShuffle: return "data-shuffle";
    case StreamLabel::kDeployment: return "deployment";
  }
  return "unknown";
}

struct StreamKey {
  StreamLabel label;
  std::uint64_t realization = 0;
  std::uint64_t iteration = 0;
  std::optional<std::uint64_t> node;

  /// Network-common keys: every node that derives them sees the same draws.
  static StreamKey shared(StreamLabel label, std::uint64_t realization, std::uint64_t iteration) {
    return {label, realization, iteration, std::nullopt};
  }
  static StreamKey local(StreamLabel label, std::uint64_t realization, std::uint64_t iteration,
                         std::uint64_t node) {
    return {label, realization, iteration, node};
  }

  bool is_network_common() const {
    return label == StreamLabel::kSharedRotation || label == StreamLabel::kSharedPilot;
  }
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ splitmix64(v + 0x632BE59BD9B4E019ULL));
}

}  // namespace detail

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9U;
        key[1] += 0xBB67AE85U;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53U} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57U} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Single-consumer handle on one substream.
class Stream {
 public:
  Stream(std::uint64_t key, std::uint64_t nonce)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        nonce_(nonce) {}

  std::uint64_t next_u64() {
    if (lane_ == 2) refill();
    return buffer_[lane_++];
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's nearly-divisionless method.
    unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  bool bernoulli(double probability) { return uniform() < probability; }

  double phase() { return 2.0 * std::numbers::pi * uniform(); }

  /// Circularly symmetric unit-variance complex Gaussian (Box-Muller, polar form).
  Complex complex_normal() {
    const double radius = std::sqrt(-std::log(1.0 - uniform()));
    const double angle = phase();
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  /// Standard real Gaussian; pairs are produced together and the second is cached.
  double normal() {
    if (cached_normal_) {
      const double v = *cached_normal_;
      cached_normal_.reset();
      return v;
    }
    const Complex z = complex_normal() * std::numbers::sqrt2;
    cached_normal_ = z.imag();
    return z.real();
  }

 private:
  void refill() {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(nonce_),
                                  static_cast<std::uint32_t>(nonce_ >> 32)};
    const auto out = Philox4x32::generate(ctr, key_);
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    ++block_;
    lane_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t nonce_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  std::size_t lane_ = 2;
  std::optional<double> cached_normal_;
};

inline Stream derive_stream(std::uint64_t master_seed, const StreamKey& key) {
  if (key.is_network_common() && key.node.has_value()) {
    throw std::invalid_argument("derive_stream: network-common streams carry no node index");
  }
  std::uint64_t h = detail::splitmix64(master_seed);
  h = detail::hash_combine(h, static_cast<std::uint64_t>(key.label));
  h = detail::hash_combine(h, key.realization);
  h = detail::hash_combine(h, key.iteration);
  h = detail::hash_combine(h, key.node.has_value() ? 1 : 0);
  h = detail::hash_combine(h, key.node.value_or(0));
  const std::uint64_t nonce = detail::hash_combine(h, 0xA0761D6478BD642FULL);
  return Stream(h, nonce);
}

inline std::vector<Complex> standard_complex_gaussian(Stream& stream, std::size_t n) {
  std::vector<Complex> out(n);
  for (Complex& z : out) z = stream.complex_normal();
  return out;
}

}  // namespace ncota
