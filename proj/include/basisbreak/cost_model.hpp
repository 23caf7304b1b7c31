#pragma once

// Closed-form latency and memory model for mask-effect computation inside a
// TEE: on-the-fly (a full d_in x d_out product per query) against a
// precomputed K-vector basis.

#include <cstdint>
#include <string>
#include <vector>

namespace bb {

inline constexpr double kMiB = 1024.0 * 1024.0;
inline constexpr double kGiB = kMiB * 1024.0;

struct HardwareProfile {
  double bw_tee = 10e9;           // bytes / second
  double flops_cpu = 1.6777e9;    // ops / second
  double m_tee = 128.0 * kMiB;    // bytes
  double t_budget = 0.1;          // seconds per layer

  // Throws ConfigError unless every field is strictly positive.
  void validate() const;
};

struct ModelShape {
  std::string name;
  std::uint64_t d_in = 0;   // FFN dim
  std::uint64_t d_out = 0;  // hidden dim
  std::uint64_t layers = 1;
  std::uint64_t s_dtype = 4;
};

// The five rows of the model zoo: LLaMA-3 8B, Gemma 3 27B, LLaMA-3 70B,
// Mistral Large 2, LLaMA-3.1 405B.
const std::vector<ModelShape>& model_zoo();
const ModelShape& find_model(const std::string& name);

// FLOPS_cpu such that 2 d_in d_out / FLOPS_cpu equals `compute_seconds`.
double calibrate_flops(const ModelShape& shape, double compute_seconds);
// Default profile with FLOPS_cpu calibrated to 70 ms for a LLaMA-3 8B layer.
HardwareProfile calibrated_profile(double m_tee_bytes = 128.0 * kMiB);

double t_fly(const ModelShape& shape, const HardwareProfile& hw);
double t_fly_compute(const ModelShape& shape, const HardwareProfile& hw);
// 2 K (d_in + d_out) / FLOPS_cpu
double t_pre(const ModelShape& shape, const HardwareProfile& hw,
             std::uint64_t k);

struct MemFootprints {
  std::uint64_t mem_fly = 0;  // d_in d_out s_dtype
  std::uint64_t mem_pre = 0;  // K (d_in + d_out) s_dtype
  double ratio = 0.0;         // mem_fly / mem_pre, +inf when K = 0
};
MemFootprints mem_footprints(const ModelShape& shape, std::uint64_t k);

struct KBounds {
  std::uint64_t k0 = 0;  // memory: M_tee / (L (d_in + d_out) s_dtype)
  std::uint64_t k1 = 0;  // latency: T_budget FLOPS / (2 (d_in + d_out))
  std::uint64_t k_max = 0;
  bool feasible() const { return k_max >= 1; }
};
KBounds k_max(const ModelShape& shape, const HardwareProfile& hw);

// "224 MB" below one GiB (MiB, integer), "1.31 GB" above (GiB, 2 places).
std::string format_table_bytes(std::uint64_t bytes);

std::string cost_table_text(const std::vector<ModelShape>& zoo,
                            const HardwareProfile& hw, std::uint64_t k);
std::string cost_table_csv(const std::vector<ModelShape>& zoo,
                           const HardwareProfile& hw, std::uint64_t k);

}  // namespace bb
