#pragma once

#include <cstdint>
#include <random>

namespace bb {

// Single-owner deterministic generator. Never share one between concurrent
// trials; derive a child seed per trial instead.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  // Uniform integer in [0, bound) by masked rejection. bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) from the top 53 bits.
  double unit();

  // Standard normal via Box-Muller (portable across standard libraries).
  double normal();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic child seed for (seed, index), used for per-trial streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace bb
