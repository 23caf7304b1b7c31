#include <gtest/gtest.h>

#include "basisbreak/victim_soter.hpp"

namespace bb {
namespace {

SoterConfig small(std::uint64_t p = kMersenne31) {
  SoterConfig c;
  c.d = 16;
  c.d_out = 8;
  c.k = 3;
  c.batch_size = 3;
  c.modulus = FieldModulus(p);
  return c;
}

std::vector<FieldVector> honest(const SoterService& s,
                                const std::vector<FieldVector>& batch) {
  std::vector<FieldVector> r;
  for (const auto& v : batch) r.push_back(s.gpu_compute(v));
  return r;
}

TEST(SoterService, HonestResultsPass) {
  SoterService s(small(), 1);
  for (int i = 0; i < 50; ++i) {
    const auto batch = s.next_batch();
    ASSERT_EQ(batch.size(), 4u);
    ASSERT_EQ(s.submit(honest(s, batch)), Verdict::kPass);
  }
  EXPECT_EQ(s.aborts(), 0u);
  EXPECT_EQ(s.modified_results(), 0u);
}

TEST(SoterService, VerificationSoundnessPairAtSmallField) {
  // Tampering a genuine entry always passes; tampering the challenge always
  // aborts. Exhaustive over every position and every nonzero shift at p = 5.
  SoterService s(small(5), 2);
  for (int round = 0; round < 40; ++round) {
    for (std::size_t pos = 0; pos < 4; ++pos) {
      for (std::uint64_t shift = 1; shift < 5; ++shift) {
        const auto batch = s.next_batch();
        auto r = honest(s, batch);
        r[pos].set(0, s.config().modulus.add(r[pos][0], shift));
        const bool is_challenge = pos == s.pending().hidden_index();
        ASSERT_EQ(s.submit(r), is_challenge ? Verdict::kAbort : Verdict::kPass);
      }
    }
  }
}

TEST(SoterService, ChallengesAreCombinationsOfCornerstones) {
  SoterService s(small(), 3);
  const SubspaceBasis span = s.state().cornerstone_span();
  EXPECT_EQ(span.rank(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s.state().f_of_m[i], mul(s.state().cornerstones[i], s.state().operator_f));
  }
  for (int i = 0; i < 30; ++i) {
    const auto batch = s.next_batch();
    const auto& c = s.pending().challenges.at(0);
    FieldVector expect(s.config().modulus, 16);
    for (std::size_t j = 0; j < 3; ++j) expect.axpy(c.alpha[j], s.state().cornerstones[j]);
    ASSERT_EQ(batch[c.index], expect);
    s.submit(honest(s, batch));
  }
}

TEST(SoterService, HiddenPositionIsUniform) {
  SoterService s(small(), 4);
  std::vector<int> counts(4, 0);
  const int n = 8000;
  for (int i = 0; i < n; ++i) {
    s.next_batch();
    ++counts[s.pending().hidden_index()];
  }
  double chi = 0;
  for (int c : counts) chi += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
  EXPECT_LT(chi, 16.27);  // 0.999 quantile, 3 degrees of freedom
}

TEST(SoterService, ProtocolErrors) {
  SoterService s(small(), 5);
  EXPECT_THROW(s.submit({}), ProtocolError);
  const auto batch = s.next_batch();
  auto r = honest(s, batch);
  r.pop_back();
  EXPECT_THROW(s.submit(r), DimensionMismatch);
  SoterConfig c = small();
  c.fingerprints_per_batch = 0;
  EXPECT_THROW(SoterService(c, 1), ConfigError);
}

TEST(SoterService, FreshFingerprintDoubleStillVerifies) {
  SoterConfig c = small();
  c.fresh_fingerprints = true;
  SoterService s(c, 6);
  const SubspaceBasis span = s.state().cornerstone_span();
  for (int i = 0; i < 20; ++i) {
    const auto batch = s.next_batch();
    ASSERT_FALSE(span.contains(batch[s.pending().hidden_index()]));
    auto r = honest(s, batch);
    ASSERT_EQ(s.submit(r), Verdict::kPass);
  }
  const auto batch = s.next_batch();
  auto r = honest(s, batch);
  r[s.pending().hidden_index()].set(0, 0);
  r[s.pending().hidden_index()].set(1, 0);
  EXPECT_EQ(s.submit(r), Verdict::kAbort);
}

TEST(SoterService, GaussianActivationsAreSmallSignedIntegers) {
  SoterConfig c = small();
  c.activations = ActivationSource::kGaussianQuantized;
  c.gaussian_scale = 4.0;
  SoterService s(c, 7);
  const auto batch = s.next_batch();
  const std::uint64_t p = c.modulus.p();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (i == s.pending().hidden_index()) continue;
    for (auto e : batch[i].values()) ASSERT_TRUE(e < 64 || e > p - 64);
  }
}

}  // namespace
}  // namespace bb
