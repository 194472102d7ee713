// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number generation.
//
// Every stochastic quantity in the project is drawn from an Rng obtained
// through substream(): a SplitMix64-derived xoshiro256** stream keyed by
// (seed, stream id, index). Streams for different purposes never overlap,
// so a single 64-bit seed reproduces channels, pilots, LO phases, noise,
// parameter init and shuffles bit-for-bit. std::random distributions are
// implementation-defined and are deliberately not used.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace raqr {

// SplitMix64 finalizer step. Used for seeding and substream derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return mix64(state_ += kGolden); }

 private:
  std::uint64_t state_;
};

// xoshiro256** by Blackman & Vigna (public domain reference implementation).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1): rejects the exact 0.
  double uniform_open01() {
    double u;
    do {
      u = uniform01();
    } while (u == 0.0);
    return u;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the second deviate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(1.0 - uniform01()));
    const double a = 2.0 * kPi * uniform01();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Circularly symmetric complex normal with E|z|^2 = variance.
  // Draws a fresh Box-Muller pair; does not interact with the normal() cache.
  std::complex<double> normal_complex(double variance = 1.0) {
    const double r = std::sqrt(-variance * std::log(1.0 - uniform01()));
    const double a = 2.0 * kPi * uniform01();
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Named substreams. Adding a stream id never perturbs existing ones.
enum class StreamId : std::uint64_t {
  channel = 1,       // per-ray gains and DoAs
  pilots = 2,        // pilot phases
  lo = 3,            // LO phases
  noise = 4,         // measurement noise
  param_init = 5,    // network weight init
  shuffle = 6,       // dataset split / epoch shuffles
  trial = 7,         // per-trial seeds in sweeps
  filternet_fit = 8, // bessel-ratio pre-fit
  dataset = 9,       // per-sample scenario draws
};

// Independent stream keyed by (seed, id, index).
inline Rng substream(std::uint64_t seed, StreamId id, std::uint64_t index = 0) {
  std::uint64_t h = mix64(seed + kGolden * static_cast<std::uint64_t>(id));
  h = mix64(h + kGolden * index);
  return Rng(h);
}

// Derived 64-bit seed for nested substreams (per-trial, per-sample).
inline std::uint64_t derive_seed(std::uint64_t seed, StreamId id,
                                 std::uint64_t index = 0) {
  std::uint64_t h = mix64(seed + kGolden * static_cast<std::uint64_t>(id));
  return mix64(h + kGolden * index);
}

}  // namespace raqr
