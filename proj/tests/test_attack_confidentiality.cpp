#include <gtest/gtest.h>

#include "basisbreak/attack_confidentiality.hpp"
#include "basisbreak/experiments.hpp"

namespace bb {
namespace {

const FieldModulus kP;

TlgConfig config(std::size_t df, std::size_t dm, std::size_t k,
                 SamplingStrategy s = SamplingStrategy::all_k(),
                 NoiseMode noise = NoiseMode::kPrecomputed) {
  return make_tlg_config(df, dm, k, s, kP, noise);
}

TEST(NoiseCancellation, RepeatedQueriesShareOneResidual) {
  TlgVictim v(config(32, 16, 6), 1);
  QueryOracle enc = encrypt_oracle(v);
  const NoiseSubspaceProfile prof = learn_noise_subspace(enc, kP, 32, 6, 2);
  for (std::size_t j = 0; j < 32; ++j) {
    const FieldVector e = FieldVector::unit(kP, 32, j);
    const FieldVector r1 = prof.basis.residual(enc(e));
    const FieldVector r2 = prof.basis.residual(enc(e));
    ASSERT_EQ(r1, r2);
    // ... and equals the residual of the permuted unit vector.
    ASSERT_EQ(r1, unit_residual(prof.basis, v.ground_truth().rho[j]));
  }
}

TEST(NoiseCancellation, UnitResidualMatchesGenericResidual) {
  SeededRng rng(2);
  std::vector<FieldVector> g;
  for (int i = 0; i < 7; ++i) g.push_back(random_vector(20, kP, rng));
  const SubspaceBasis b = SubspaceBasis::span_of(kP, 20, g);
  for (std::size_t k = 0; k < 20; ++k) {
    ASSERT_EQ(unit_residual(b, k), b.residual(FieldVector::unit(kP, 20, k)));
  }
}

TEST(Stage1, ObservedSpanEqualsTrueNoiseSpanUnderRho) {
  TlgVictim v(config(40, 20, 8), 3);
  const NoiseSubspaceProfile prof =
      learn_noise_subspace(encrypt_oracle(v), kP, 40, 8, 2);
  EXPECT_EQ(prof.k_observed, 8u);
  EXPECT_EQ(prof.queries_used, 10u);
  std::vector<FieldVector> permuted;
  for (const auto& n : v.noise_table().basis_vectors) {
    permuted.push_back(apply(n, v.ground_truth().rho));
  }
  EXPECT_TRUE(same_subspace(prof.basis, SubspaceBasis::span_of(kP, 40, permuted)));
}

TEST(Stage1, ShortfallIsReported) {
  TlgVictim v(config(40, 20, 8), 4);
  try {
    learn_noise_subspace(encrypt_oracle(v), kP, 40, 9, 0);
    FAIL() << "expected RankShortfall";
  } catch (const RankShortfall& e) {
    EXPECT_EQ(e.observed(), 8u);
    EXPECT_EQ(e.expected(), 9u);
  }
}

TEST(Stage2, RecoversPermutationFromSyntheticOracle) {
  // Oracle: x -> (x + m) sigma with m from a fixed 3-dim span.
  SeededRng rng(5);
  const std::size_t d = 30;
  const Permutation sigma = Permutation::random(d, rng);
  std::vector<FieldVector> basis;
  for (int i = 0; i < 3; ++i) basis.push_back(random_vector(d, kP, rng));
  QueryOracle oracle = [&](const FieldVector& x) {
    FieldVector y = x;
    for (const auto& b : basis) y.axpy(kP.sample(rng), b);
    return apply(y, sigma);
  };
  const NoiseSubspaceProfile prof = learn_noise_subspace(oracle, kP, d, 3, 1);
  const RecoveredPermutation r = recover_permutation(oracle, prof, d);
  ASSERT_TRUE(r.exact());
  EXPECT_EQ(r.as_permutation(), sigma);
}

TEST(Stage2, CollidingResidualsAreAmbiguousAndWeightsAreRefused) {
  // Noise span contains e_0 - e_1, so e_0 and e_1 share a coset.
  const std::size_t d = 6;
  FieldVector n(kP, d);
  n.set(0, 1);
  n.set(1, kP.neg(1));
  SeededRng rng(6);
  QueryOracle oracle = [&](const FieldVector& x) {
    FieldVector y = x;
    y.axpy(kP.sample(rng), n);
    return y;
  };
  const NoiseSubspaceProfile prof = learn_noise_subspace(oracle, kP, d, 1, 1);
  const RecoveredPermutation r = recover_permutation(oracle, prof, d);
  EXPECT_FALSE(r.exact());
  EXPECT_FALSE(r.unresolved.empty());
  EXPECT_THROW(recover_weights(r, FieldMatrix(kP, d, 2)), ProtocolError);
}

TEST(Stage2, IncompleteNoiseSpanIsAProtocolMismatch) {
  TlgVictim v(config(32, 16, 6), 7);
  QueryOracle enc = encrypt_oracle(v);
  const NoiseSubspaceProfile prof = observe_noise(enc, kP, 32, 5);
  EXPECT_EQ(prof.k_observed, 5u);
  EXPECT_THROW(recover_permutation(enc, prof, 32), ProtocolError);
}

TEST(DiscoverK, StabilizesAtK) {
  for (std::size_t k : {1u, 4u, 10u}) {
    TlgConfig c = config(64, 32, k);
    c.encrypt_only = true;
    TlgVictim v(c, 8 + k);
    const KDiscovery d = discover_k_traced(encrypt_oracle(v), kP, 64, 20, 400);
    EXPECT_EQ(d.k, k);
    EXPECT_EQ(d.queries, k + 20);
    // Rank trace grows by one per query up to K, then stays flat.
    for (std::size_t i = 0; i < d.rank_trace.size(); ++i) {
      ASSERT_EQ(d.rank_trace[i], std::min(i + 1, k));
    }
  }
}

TEST(DiscoverK, OnTheFlyNoiseIsInconclusive) {
  TlgConfig c = config(48, 24, 6, SamplingStrategy::all_k(), NoiseMode::kOnTheFly);
  TlgVictim v(c, 9);
  EXPECT_THROW(discover_k(encrypt_oracle(v), kP, 48, 20, 500), InconclusiveError);
  TlgVictim w(config(48, 24, 6), 9);
  EXPECT_THROW(discover_k(encrypt_oracle(w), kP, 48, 20, 10), InconclusiveError);
}

TEST(FullAttack, RecoversAllSecretsWithExactQueryCount) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TlgVictim v(config(48, 24, 7), seed);
    AttackOptions opt;
    opt.k_known = 7;
    opt.delta = 2;
    AttackReport rep = full_layer_attack(v, opt);
    ASSERT_TRUE(score_attack(rep, v.ground_truth()));
    EXPECT_EQ(rep.recovered->rho, v.ground_truth().rho);
    EXPECT_EQ(rep.recovered->w3, v.ground_truth().weights.w3);
    EXPECT_EQ(*rep.recovered->pi_next, v.ground_truth().pi_next);
    EXPECT_EQ(rep.rho.attack_queries(), 48u + 7 + 2);
    EXPECT_EQ(rep.pi_next.attack_queries(), 24u + 7 + 2);
    EXPECT_EQ(v.queries_issued(), rep.rho.attack_queries() + rep.pi_next.attack_queries());
  }
}

TEST(FullAttack, DiscoveredKMatchesKnownKResult) {
  TlgVictim v(config(48, 24, 5), 21);
  AttackOptions opt;
  AttackReport rep = full_layer_attack(v, opt);
  EXPECT_EQ(rep.k_discovered, 5u);
  EXPECT_EQ(rep.rho.stage1_queries, 0u);  // seeded from discovery
  EXPECT_TRUE(score_attack(rep, v.ground_truth()));
}

TEST(FullAttack, KAboveModelWidthUsesDecryptRank) {
  // With K >= d_model the DECRYPT-side noise fills F^d_model, every
  // residual is zero and Stage 2 cannot separate coordinates; rho is still
  // recoverable.
  TlgVictim v(config(48, 8, 10), 22);
  AttackOptions opt;
  opt.k_known = 10;
  EXPECT_THROW(full_layer_attack(v, opt), StageError);
  opt.recover_pi_next = false;
  TlgVictim w(config(48, 8, 10), 22);
  AttackReport rep = full_layer_attack(w, opt);
  EXPECT_TRUE(score_attack(rep, w.ground_truth()));
}

TEST(FullAttack, StageErrorsCarryTheStageTag) {
  TlgVictim v(config(32, 16, 6), 23);
  AttackOptions opt;
  opt.k_known = 6;
  opt.stage1_queries = 5;
  try {
    full_layer_attack(v, opt);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "rho/stage2");
  }
}

TEST(FullAttack, SubsetSamplingEscalatesUntilRankK) {
  for (std::size_t t : {1u, 2u, 3u}) {
    TlgVictim v(config(64, 32, 10, SamplingStrategy::subset(t)), 30 + t);
    AttackOptions opt;
    opt.k_known = 10;
    opt.delta = 0;
    AttackReport rep = full_layer_attack(v, opt);
    EXPECT_TRUE(score_attack(rep, v.ground_truth())) << "T=" << t;
    EXPECT_GE(rep.rho.stage1_queries, 10u);
    EXPECT_EQ(rep.rho.rank, 10u);
  }
}

TEST(FullAttack, EncryptOnlyVictimRecoversRho) {
  TlgConfig c = config(256, 2, 10);
  c.encrypt_only = true;
  TlgVictim v(c, 40);
  AttackOptions opt;
  opt.k_known = 10;
  opt.delta = 0;
  opt.recover_pi_next = false;
  AttackReport rep = full_layer_attack(v, opt);
  EXPECT_TRUE(score_attack(rep, v.ground_truth()));
  EXPECT_EQ(v.queries_issued(), 256u + 10u);
}

}  // namespace
}  // namespace bb
