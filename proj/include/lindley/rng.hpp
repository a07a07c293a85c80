#pragma once

#include <cstdint>

namespace lindley {

// Counter-based generator: output n is a hash of (key, n), so streams derived
// from (seed, stream-index) are independent and replications can run on any
// thread layout with identical results.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // Stream `stream` of a run seeded with `seed`.
  static CounterRng derive(std::uint64_t seed, std::uint64_t stream) {
    return CounterRng(mix(mix(seed ^ 0x6a09e667f3bcc909ULL) + stream));
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace lindley
