#include "sketchattn/rng.hpp"

#include <cmath>
#include <numbers>

namespace sketchattn {

namespace {

constexpr std::uint64_t kSplitMixIncrement = 0x9E3779B97F4A7C15ull;

std::uint64_t rotl64(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += kSplitMixIncrement;
  return Rng::mix64(state);
}

}  // namespace

std::uint64_t Rng::mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64_next(state);
  // splitmix64 output never yields four zero words for any seed in practice,
  // but the xoshiro state must not be all zero.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = kSplitMixIncrement;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t out = rotl64(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl64(s_[3], 45);
  return out;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_double_open_zero() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::next_normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = next_double_open_zero();
  const double u2 = next_double();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection of the biased low range.
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

Rng Rng::derive(std::uint64_t base_seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(base_seed);
  for (std::uint64_t tag : path) h = mix64(h ^ (tag + kSplitMixIncrement));
  return Rng(h);
}

}  // namespace sketchattn
