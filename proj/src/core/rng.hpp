#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bg {

//! Counter-free deterministic RNG stream (xoshiro256++ with splitmix64 seeding).
//! Distributions are hand-rolled so sequences do not depend on the standard
//! library implementation; state is 4 words and snapshots exactly.
class RngStream {
 public:
  RngStream() : RngStream(0) {}

  explicit RngStream(uint64_t seed) { reseed(seed); }

  void reseed(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  //! Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  //! exp(U(ln lo, ln hi)) — log-uniform multiplier.
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  //! Standard normal via Box-Muller; two uniform draws per call, no cached spare.
  double normal() {
    double u1 = uniform01();
    const double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  //! Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  //! Derives an independent child stream; (seed, tag) fully determines it.
  RngStream child(uint64_t tag) const {
    uint64_t mix = state_[0] ^ rotl(state_[2], 29) ^ (tag * 0x9E3779B97F4A7C15ull);
    return RngStream(mix);
  }

  std::array<uint64_t, 4> snapshot() const { return state_; }
  void restore(const std::array<uint64_t, 4>& s) { state_ = s; }

  static uint64_t mix_seed(uint64_t a, uint64_t b) {
    uint64_t x = a ^ (b * 0x9E3779B97F4A7C15ull + 0x2545F4914F6CDD1Dull);
    return splitmix64(x);
  }

 private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::array<uint64_t, 4> state_{};
};

}  // namespace bg
