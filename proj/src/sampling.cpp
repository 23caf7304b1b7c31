#include "basisbreak/sampling.hpp"

#include <numeric>

namespace bb {

void SamplingStrategy::validate(std::size_t k) const {
  if (kind == Kind::kSubsetT && (t < 1 || t > k)) {
    throw ConfigError("subset size T=" + std::to_string(t) +
                      " must satisfy 1 <= T <= K=" + std::to_string(k));
  }
}

std::string SamplingStrategy::describe() const {
  return kind == Kind::kAllK ? "all" : "subset" + std::to_string(t);
}

std::vector<std::uint64_t> SamplingStrategy::draw(std::size_t k,
                                                  const FieldModulus& m,
                                                  SeededRng& rng) const {
  std::vector<std::uint64_t> alpha(k, 0);
  if (kind == Kind::kAllK) {
    for (auto& a : alpha) a = m.sample(rng);
    return alpha;
  }
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < t; ++i) {
    const std::size_t j = i + rng.below(k - i);
    std::swap(idx[i], idx[j]);
    alpha[idx[i]] = m.sample_nonzero(rng);
  }
  return alpha;
}

}  // namespace bb
