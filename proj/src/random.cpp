#include "fastpol/random.hpp"

#include <random>

namespace fastpol {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += kGolden);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b * kGolden);
  std::uint64_t h = splitmix64(x);
  return splitmix64(h);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : RandomStream(FromKey{}, mix(seed, 0x5eed)) {}

RandomStream::RandomStream(FromKey, std::uint64_t key) : key_(key) {
  std::uint64_t x = key;
  for (auto& s : state_) s = splitmix64(x);
}

RandomStream::result_type RandomStream::operator()() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

RandomStream RandomStream::substream(std::uint64_t index) const {
  return RandomStream(FromKey{}, mix(key_, index + 1));
}

double RandomStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::int64_t draw_binomial(std::int64_t n, double p, RandomStream& rng) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(rng);
}

std::int64_t draw_poisson(double mean, RandomStream& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

double draw_normal(double mean, double sd, RandomStream& rng) {
  if (sd == 0.0) return mean;
  std::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

}  // namespace fastpol
