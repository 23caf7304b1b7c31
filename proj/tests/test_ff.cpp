#include <gtest/gtest.h>

#include "basisbreak/ff.hpp"

namespace bb {
namespace {

bool trial_division_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

TEST(Primality, MatchesTrialDivisionBelow20000) {
  for (std::uint64_t n = 0; n < 20000; ++n) {
    ASSERT_EQ(is_prime_u64(n), trial_division_prime(n)) << n;
  }
}

TEST(Primality, KnownLargeValues) {
  EXPECT_TRUE(is_prime_u64(kMersenne31));
  EXPECT_TRUE(is_prime_u64(18446744073709551557ULL));  // largest 64-bit prime
  EXPECT_FALSE(is_prime_u64(3215031751ULL));           // strong pseudoprime to 2,3,5,7
  EXPECT_FALSE(is_prime_u64((1ULL << 32) + 1));        // 641 * 6700417
}

TEST(FieldModulus, RejectsComposite) {
  EXPECT_THROW(FieldModulus(1), ConfigError);
  EXPECT_THROW(FieldModulus(4), ConfigError);
  EXPECT_THROW(FieldModulus(kMersenne31 + 2), ConfigError);
  EXPECT_NO_THROW(FieldModulus(2));
}

TEST(FieldModulus, MersenneReductionAgreesWithGenericProduct) {
  const FieldModulus m(kMersenne31);
  ASSERT_TRUE(m.is_mersenne31());
  SeededRng rng(7);
  const std::uint64_t edge[] = {0, 1, kMersenne31 - 1, kMersenne31 - 2,
                                1ULL << 30, (1ULL << 30) + 1};
  for (std::uint64_t a : edge) {
    for (std::uint64_t b : edge) {
      const auto want = static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(a) * b) % kMersenne31);
      ASSERT_EQ(m.mul(a, b), want);
    }
  }
  for (int i = 0; i < 200000; ++i) {
    const std::uint64_t a = m.sample(rng), b = m.sample(rng);
    ASSERT_EQ(m.mul(a, b), m.mul_generic(a, b));
  }
}

TEST(FieldModulus, ReduceHandlesFull64BitInputs) {
  const FieldModulus m(kMersenne31);
  SeededRng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const std::uint64_t x = rng.next_u64();
    ASSERT_EQ(m.reduce(x), x % kMersenne31);
  }
  EXPECT_EQ(m.reduce(~0ULL), (~0ULL) % kMersenne31);
}

TEST(FieldModulus, ExhaustiveSmallPrimeTables) {
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 13ULL}) {
    const FieldModulus m(p);
    for (std::uint64_t a = 0; a < p; ++a) {
      for (std::uint64_t b = 0; b < p; ++b) {
        ASSERT_EQ(m.add(a, b), (a + b) % p);
        ASSERT_EQ(m.sub(a, b), (a + p - b) % p);
        ASSERT_EQ(m.mul(a, b), (a * b) % p);
      }
      ASSERT_EQ(m.neg(a), (p - a) % p);
      if (a != 0) {
        ASSERT_EQ(m.mul(a, m.inv(a)), 1u);
      }
    }
  }
}

TEST(FieldModulus, InverseAndFermat) {
  const FieldModulus m(kMersenne31);
  SeededRng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t a = m.sample_nonzero(rng);
    ASSERT_EQ(m.mul(a, m.inv(a)), 1u);
    ASSERT_EQ(m.pow(a, kMersenne31 - 1), 1u);
    ASSERT_EQ(m.inv(a), m.pow(a, kMersenne31 - 2));
  }
  EXPECT_THROW(m.inv(0), DivisionByZero);
}

TEST(FieldModulus, FromSigned) {
  const FieldModulus m(7);
  EXPECT_EQ(m.from_signed(-1), 6u);
  EXPECT_EQ(m.from_signed(-14), 0u);
  EXPECT_EQ(m.from_signed(15), 1u);
}

TEST(FieldElement, ModulusMismatchIsRejected) {
  const FieldElement a(3, FieldModulus(7));
  const FieldElement b(3, FieldModulus(11));
  EXPECT_THROW(add(a, b), ConfigError);
  EXPECT_THROW(mul(a, b), ConfigError);
  EXPECT_EQ((a + a).value(), 6u);
  EXPECT_EQ((a * a).value(), 2u);
  EXPECT_EQ((a - FieldElement(5, FieldModulus(7))).value(), 5u);
  EXPECT_EQ(inv(a).value(), 5u);
  EXPECT_THROW(inv(FieldElement(0, FieldModulus(7))), DivisionByZero);
}

TEST(FieldModulus, SamplingIsUniformOnSmallField) {
  const FieldModulus m(5);
  SeededRng rng(19);
  int counts[5] = {};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[m.sample(rng)];
  // Chi-square with 4 degrees of freedom; 18.47 is the 0.999 quantile.
  double chi = 0;
  for (int c : counts) chi += (c - n / 5.0) * (c - n / 5.0) / (n / 5.0);
  EXPECT_LT(chi, 18.47);
  for (int i = 0; i < 1000; ++i) ASSERT_NE(m.sample_nonzero(rng), 0u);
}

TEST(Rng, DerivedSeedsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(1, 5), derive_seed(1, 5));
  EXPECT_NE(derive_seed(1, 5), derive_seed(1, 6));
  EXPECT_NE(derive_seed(1, 5), derive_seed(2, 5));
  SeededRng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

}  // namespace
}  // namespace bb
