#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "basisbreak/cost_model.hpp"
#include "basisbreak/errors.hpp"

namespace bb {
namespace {

TEST(CostModel, PublishedMemoryFootprints) {
  const char* printed[] = {"224 MB", "441 MB", "896 MB", "1.31 GB", "3.25 GB"};
  ASSERT_EQ(model_zoo().size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(format_table_bytes(mem_footprints(model_zoo()[i], 10).mem_fly), printed[i]);
  }
  EXPECT_EQ(mem_footprints(find_model("LLaMA-3 8B"), 1).mem_fly, 14336ull * 4096 * 4);
  EXPECT_THROW(find_model("GPT-9"), ConfigError);
}

TEST(CostModel, PrecomputationFootprintAndRatio) {
  const MemFootprints f = mem_footprints(find_model("LLaMA-3 8B"), 10);
  EXPECT_EQ(f.mem_pre, 10ull * (14336 + 4096) * 4);  // 737,280 B
  EXPECT_NEAR(f.mem_pre / kMiB, 0.703, 0.001);
  EXPECT_GT(f.ratio, 300.0);
  EXPECT_EQ(mem_footprints(find_model("LLaMA-3 8B"), 0).mem_pre, 0u);
}

TEST(CostModel, CalibratedLatencies) {
  const HardwareProfile hw = calibrated_profile();
  const ModelShape& m = find_model("LLaMA-3 8B");
  EXPECT_NEAR(hw.flops_cpu, 2.0 * 14336 * 4096 / 0.070, 1.0);
  EXPECT_NEAR(t_fly_compute(m, hw), 0.070, 1e-12);
  EXPECT_GT(t_fly(m, hw), 0.070);
  const double tp = t_pre(m, hw, 10);
  EXPECT_GE(tp, 0.20e-3);
  EXPECT_LE(tp, 0.25e-3);
  EXPECT_NEAR(t_pre(m, hw, 56) / tp, 5.6, 1e-12);
  // Ratio of compute terms.
  EXPECT_NEAR(tp / t_fly_compute(m, hw), 10.0 * (14336 + 4096) / (14336.0 * 4096), 1e-15);
}

TEST(CostModel, Linearity) {
  const HardwareProfile hw = calibrated_profile();
  ModelShape s{"x", 1000, 500, 10, 4};
  ModelShape s2 = s;
  s2.d_out *= 2;
  EXPECT_NEAR(t_fly(s2, hw), 2 * t_fly(s, hw), 1e-15);
  s2 = s;
  s2.d_in = 0;
  EXPECT_EQ(t_fly(s2, hw), 0.0);
  const KBounds a = k_max(find_model("LLaMA-3 8B"), calibrated_profile(128 * kMiB));
  const KBounds b = k_max(find_model("LLaMA-3 8B"), calibrated_profile(256 * kMiB));
  EXPECT_EQ(a.k0, 56u);
  EXPECT_EQ(b.k0, 113u);  // floor(2 * 56.89)
}

TEST(CostModel, KBounds) {
  const HardwareProfile hw = calibrated_profile(128 * kMiB);
  const KBounds k8 = k_max(find_model("LLaMA-3 8B"), hw);
  EXPECT_EQ(k8.k0, 56u);
  EXPECT_EQ(k8.k_max, std::min(k8.k0, k8.k1));
  EXPECT_TRUE(k8.feasible());
  // 405B with its 126 layers still fits three basis vectors in 128 MiB.
  const KBounds big = k_max(find_model("LLaMA-3.1 405B"), hw);
  EXPECT_EQ(big.k0, 3u);
  // A 16 MiB TrustZone carve-out cannot hold even one.
  const KBounds tz = k_max(find_model("LLaMA-3.1 405B"), calibrated_profile(16 * kMiB));
  EXPECT_EQ(tz.k0, 0u);
  EXPECT_FALSE(tz.feasible());
}

TEST(CostModel, InvalidProfile) {
  HardwareProfile hw;
  hw.bw_tee = 0;
  EXPECT_THROW(t_fly(model_zoo()[0], hw), ConfigError);
}

TEST(CostModel, TablesHaveOneRowPerModel) {
  const std::string csv = cost_table_csv(model_zoo(), calibrated_profile(), 10);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  const std::string txt = cost_table_text(model_zoo(), calibrated_profile(), 10);
  EXPECT_NE(txt.find("224 MB"), std::string::npos);
  EXPECT_NE(txt.find("3.25 GB"), std::string::npos);
}

}  // namespace
}  // namespace bb
