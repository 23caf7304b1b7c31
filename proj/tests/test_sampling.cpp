#include <gtest/gtest.h>

#include <algorithm>

#include "basisbreak/sampling.hpp"

namespace bb {
namespace {

TEST(Sampling, ValidateBounds) {
  EXPECT_THROW(SamplingStrategy::subset(0).validate(10), ConfigError);
  EXPECT_THROW(SamplingStrategy::subset(11).validate(10), ConfigError);
  EXPECT_NO_THROW(SamplingStrategy::subset(10).validate(10));
  EXPECT_NO_THROW(SamplingStrategy::all_k().validate(1));
}

TEST(Sampling, SubsetDrawsExactlyTNonzero) {
  const FieldModulus m(3);
  SeededRng rng(4);
  for (std::size_t t : {1u, 3u, 10u}) {
    const SamplingStrategy s = SamplingStrategy::subset(t);
    std::vector<int> hits(10, 0);
    for (int i = 0; i < 5000; ++i) {
      const auto a = s.draw(10, m, rng);
      ASSERT_EQ(a.size(), 10u);
      ASSERT_EQ(static_cast<std::size_t>(std::count_if(
                    a.begin(), a.end(), [](auto x) { return x != 0; })),
                t);
      for (std::size_t j = 0; j < 10; ++j) hits[j] += a[j] != 0;
    }
    // Every index is chosen with probability t/10.
    for (int h : hits) EXPECT_NEAR(h / 5000.0, t / 10.0, 0.05);
  }
}

TEST(Sampling, AllKDrawsUniformCoefficients) {
  const FieldModulus m(kMersenne31);
  SeededRng rng(8);
  const auto a = SamplingStrategy::all_k().draw(1000, m, rng);
  std::size_t zeros = std::count(a.begin(), a.end(), 0u);
  EXPECT_LE(zeros, 1u);
  EXPECT_EQ(SamplingStrategy::subset(3).describe(), "subset3");
}

}  // namespace
}  // namespace bb
