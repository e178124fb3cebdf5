#pragma once

#include <cstdint>

namespace rcquad {

// SplitMix64 finaliser.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Counter-based generator: every draw is a pure function of
// (seed, chain, stream, sweep, index), so coupled chains can share draws and
// parallel runs reproduce serial ones.
class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t seed, std::uint64_t chain, std::uint64_t stream = 0)
      : key_(mix64(mix64(seed) ^ mix64(chain * 0xd1342543de82ef95ULL + 1) ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t bits(std::uint64_t sweep, std::uint64_t index) const {
    return mix64(key_ ^ mix64(sweep * 0x9e3779b97f4a7c15ULL + mix64(index)));
  }
  double uniform(std::uint64_t sweep, std::uint64_t index) const { return to_unit(bits(sweep, index)); }
  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
};

// Sequential stream on top of the counter generator.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t chain, std::uint64_t stream = 0) : rng_(seed, chain, stream) {}

  std::uint64_t next() { return rng_.bits(0, counter_++); }
  double uniform() { return to_unit(next()); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n; }
  std::uint64_t counter() const { return counter_; }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace rcquad
