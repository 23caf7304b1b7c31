#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "basisbreak/ff.hpp"

namespace bb {

// How the TEE combines the K static basis vectors per query.
struct SamplingStrategy {
  enum class Kind { kAllK, kSubsetT };

  Kind kind = Kind::kAllK;
  std::size_t t = 0;  // subset size, only for kSubsetT

  static SamplingStrategy all_k() { return {}; }
  static SamplingStrategy subset(std::size_t t) { return {Kind::kSubsetT, t}; }

  // Throws ConfigError unless 1 <= t <= k for subset sampling.
  void validate(std::size_t k) const;
  std::string describe() const;

  // Coefficient vector of length k. AllK: every coefficient uniform over
  // F_P. SubsetT: t positions chosen without replacement, each given a
  // uniform nonzero coefficient; the rest are zero.
  std::vector<std::uint64_t> draw(std::size_t k, const FieldModulus& m,
                                  SeededRng& rng) const;
};

}  // namespace bb
