#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fastpol {

/// Splittable pseudo-random source.
///
/// Every stream is identified by a 64-bit key. Child streams are derived from
/// the key alone (never from the generator state), so a pulse batch can be
/// regenerated from (seed, pulse_index) in any order and on any number of
/// workers. Output is xoshiro256++ seeded through SplitMix64.
///
/// Satisfies UniformRandomBitGenerator, so the <random> distributions apply.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Independent stream labelled by `index`; does not advance this stream.
  RandomStream substream(std::uint64_t index) const;

  std::uint64_t key() const { return key_; }

  /// Uniform double in [0, 1).
  double uniform();

 private:
  struct FromKey {};
  RandomStream(FromKey, std::uint64_t key);

  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_{};
};

/// Stage labels used when deriving per-pulse substreams.
enum class StreamTag : std::uint64_t {
  Incident = 1,
  Detection = 2,
  Readout = 3,
  Spin = 4,
  FirstPulse = 5,
  SecondPulse = 6,
  SweepPoint = 7,
};

/// Binomial(n, p); returns 0 for n <= 0 and handles p at the bounds.
std::int64_t draw_binomial(std::int64_t n, double p, RandomStream& rng);
/// Poisson(mean); 0 for mean <= 0.
std::int64_t draw_poisson(double mean, RandomStream& rng);
/// Normal(mean, sd); returns mean exactly when sd == 0.
double draw_normal(double mean, double sd, RandomStream& rng);

inline RandomStream substream(const RandomStream& parent, StreamTag tag) {
  return parent.substream(static_cast<std::uint64_t>(tag));
}

}  // namespace fastpol
