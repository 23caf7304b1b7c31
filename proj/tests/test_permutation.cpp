#include <gtest/gtest.h>

#include <map>

#include "basisbreak/permutation.hpp"

namespace bb {
namespace {

TEST(Permutation, RejectsNonBijections) {
  EXPECT_THROW(Permutation({0, 0, 1}), ConfigError);
  EXPECT_THROW(Permutation({0, 3}), ConfigError);
  EXPECT_NO_THROW(Permutation({2, 0, 1}));
}

TEST(Permutation, ApplyMatchesMatrixProduct) {
  const FieldModulus m(kMersenne31);
  SeededRng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Permutation p = Permutation::random(9, rng);
    const FieldVector x = random_vector(9, m, rng);
    ASSERT_EQ(apply(x, p), mul(x, p.as_matrix(m)));
    for (std::size_t j = 0; j < 9; ++j) ASSERT_EQ(apply(x, p)[p[j]], x[j]);
    ASSERT_EQ(apply(apply(x, p), p.inverse()), x);
  }
}

TEST(Permutation, LockingIsTransposedMatrixProduct) {
  const FieldModulus m(kMersenne31);
  SeededRng rng(2);
  const Permutation p = Permutation::random(6, rng);
  const FieldMatrix w = random_matrix(6, 4, m, rng);
  const FieldMatrix pm = p.as_matrix(m);
  EXPECT_EQ(lock_rows(p, w), pm.transpose() * w);
  EXPECT_EQ(unlock_rows(p, lock_rows(p, w)), w);
  const FieldMatrix v = random_matrix(4, 6, m, rng);
  EXPECT_EQ(permute_cols(v, p), v * pm);
  // (x P)(P^T W) = x W
  const FieldVector x = random_vector(6, m, rng);
  EXPECT_EQ(mul(apply(x, p), lock_rows(p, w)), mul(x, w));
}

TEST(Permutation, RandomIsSeededAndUniformOnS3) {
  SeededRng a(5), b(5);
  EXPECT_EQ(Permutation::random(20, a), Permutation::random(20, b));
  SeededRng rng(6);
  std::map<std::vector<std::size_t>, int> counts;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    const Permutation p = Permutation::random(3, rng);
    counts[{p.image().begin(), p.image().end()}]++;
  }
  ASSERT_EQ(counts.size(), 6u);
  double chi = 0;
  for (const auto& [k, c] : counts) chi += (c - n / 6.0) * (c - n / 6.0) / (n / 6.0);
  EXPECT_LT(chi, 20.52);  // 0.999 quantile, 5 degrees of freedom
}

}  // namespace
}  // namespace bb
