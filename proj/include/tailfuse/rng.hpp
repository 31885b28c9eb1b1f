#pragma once

#include <cstdint>

#include "tailfuse/math.hpp"

namespace tailfuse {

/// Counter-based pseudo-random generator. A draw is a pure function of
/// (seed, stream, counter), so replications can own disjoint streams and
/// produce identical output regardless of evaluation order or thread count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  double uniform_at(std::uint64_t counter) const {
    const std::uint64_t h = mix(seed_, stream_, counter);
    // 53 mantissa bits offset by half an ulp: strictly inside (0,1)
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal_at(std::uint64_t counter) const { return normal_quantile(uniform_at(counter)); }

  double next_uniform() { return uniform_at(counter_++); }
  double next_normal() { return normal_at(counter_++); }

  std::uint64_t stream() const { return stream_; }

 private:
  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t h = finalize(seed + 0x9E3779B97F4A7C15ull);
    h = finalize(h ^ (stream + 0xD1B54A32D192ED03ull));
    h = finalize(h ^ (counter + 0x8CB92BA72F3D8DD7ull));
    return h;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace tailfuse
