#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace heatvar {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the independent stream number `index` under `seed`.
///
/// Streams are keyed by index only, so stream k is the same whatever
/// other streams exist (e.g. whatever the number of Fourier modes).
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_mix(splitmix64_mix(seed ^ 0x6a09e667f3bcc909ULL) +
                        splitmix64_mix(index + 0x9e3779b97f4a7c15ULL));
}

/// xoshiro256++ (Blackman & Vigna) seeded through SplitMix64.
/// Satisfies std::uniform_random_bit_generator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

/// Standard normal variates from one xoshiro stream (ziggurat method).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed);
  NormalStream(std::uint64_t seed, std::uint64_t index) : NormalStream(substream(seed, index)) {}

  double operator()() { return unit_(engine_); }
  Xoshiro256pp& engine() { return engine_; }

 private:
  Xoshiro256pp engine_;
  boost::random::normal_distribution<double> unit_;
};

// Reserved stream indices; Fourier mode k uses stream k (k >= 1).
inline constexpr std::uint64_t kRemainderStream = 0xfeed'0000'0000'0000ULL;
inline constexpr std::uint64_t kAuxStream = 0xbeef'0000'0000'0000ULL;

}  // namespace heatvar
