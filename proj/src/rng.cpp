#include "heatvar/rng.hpp"

namespace heatvar {

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  std::uint64_t z = seed;
  for (auto& word : s_) {
    z += 0x9e3779b97f4a7c15ULL;
    word = splitmix64_mix(z);
  }
}

NormalStream::NormalStream(std::uint64_t seed) : engine_(seed) {}

}  // namespace heatvar
