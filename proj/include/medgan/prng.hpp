#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "medgan/tensor.hpp"

namespace medgan {

// splitmix64 output finalizer (Steele, Lea, Flood 2014). Used to expand seeds
// and to derive per-sample seeds; the exact constants are part of the
// reproducibility contract documented in the README.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic per-sample seed: one splitmix64 step from the global seed
// advanced by (id + 1) increments folded together.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t id) {
  std::uint64_t s = global_seed + 0x9e3779b97f4a7c15ull * (id + 1);
  return splitmix64_next(s);
}

// xoshiro256++ (Blackman, Vigna 2019), state seeded via four splitmix64 draws.
// Same seed gives the same sequence on every platform.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  std::uint64_t next() {
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

  // Uniform in [0, 1), 53 mantissa bits.
  double uniform() {
    return double(next() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  // Standard normal via Box-Muller. Draws come in (cos, sin) pairs from two
  // uniforms; the spare is kept only within one fill call, never across calls.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  void discard_spare() { have_spare_ = false; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Fills a tensor with N(mean, stddev^2) draws in flat row-major order.
// Draws are always generated in 64-bit and rounded to the target scalar, so
// the float and double paths see the same underlying sequence.
// stddev == 0 fills the mean and consumes no draws.
template <typename S>
Tensor<S> sample_normal(Prng& prng, double mean, double stddev, Shape4 shape) {
  if (stddev < 0.0) {
    throw ShapeError("sample_normal: negative stddev");
  }
  Tensor<S> out(shape);
  if (stddev == 0.0) {
    out.array() = S(mean);
    return out;
  }
  prng.discard_spare();
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out[i] = S(mean + stddev * prng.normal());
  }
  prng.discard_spare();
  return out;
}

}  // namespace medgan
