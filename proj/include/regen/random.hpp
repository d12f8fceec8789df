#pragma once

// Seeded uniform streams. Every Monte Carlo unit of work (one renewal path,
// one coupling trace) draws from its own substream derived from
// (master seed, tag, index), so results do not depend on how work is split
// across threads.

#include <cstdint>
#include <random>

namespace regen {

/// Substream tags; distinct consumers never share a substream.
enum class StreamTag : std::uint32_t {
  renewal = 1,
  coupling = 2,
  plain_first = 3,
  plain_second = 4,
  histogram = 5,
  lemma = 6,
};

class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  UniformStream(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
  }

  /// Uniform variate on [0, 1) with 53 random bits.
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double operator()() { return next(); }

 private:
  std::mt19937_64 engine_;
};

/// Master seed plus worker count for batch Monte Carlo operations.
struct MonteCarlo {
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  UniformStream substream(StreamTag tag, std::uint64_t index) const {
    return UniformStream(seed, tag, index);
  }
};

}  // namespace regen
