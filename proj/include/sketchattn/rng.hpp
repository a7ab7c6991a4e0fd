#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace sketchattn {

/// Deterministic random stream, identical on every platform.
///
/// Core generator is xoshiro256++ (Blackman/Vigna): with state s[0..3],
///   out  = rotl64(s[0] + s[3], 23) + s[0]
///   t    = s[1] << 17
///   s[2]^=s[0]; s[3]^=s[1]; s[1]^=s[2]; s[0]^=s[3]; s[2]^=t; s[3]=rotl64(s[3],45)
/// State is filled from the 64-bit seed by four steps of splitmix64
/// (increment 0x9E3779B97F4A7C15, finalizer mixes 30/27/31 with the usual
/// multipliers). Normals come from Box-Muller on 53-bit uniforms, cosine
/// variate first. std::mt19937 / std::normal_distribution are deliberately
/// not used: their streams differ across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1), 53 random bits.
  double next_double();

  /// Uniform on (0, 1]; safe to pass to log().
  double next_double_open_zero();

  /// Standard normal via Box-Muller; generates pairs, caches the second.
  double next_normal();

  /// Uniform on {0, ..., bound-1}, unbiased (multiply-shift with rejection).
  std::uint64_t next_below(std::uint64_t bound);

  /// splitmix64 finalizer; bijective on 64-bit words.
  static std::uint64_t mix64(std::uint64_t x);

  /// Child stream for a grid cell. Streams for different paths under the
  /// same base seed are distinct; the derivation is part of the output
  /// contract, so reruns reproduce every cell exactly.
  static Rng derive(std::uint64_t base_seed, std::initializer_list<std::uint64_t> path);

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace sketchattn
