#pragma once

// Oblivious fingerprinting: the TEE hides known-answer challenges
// m' = sum alpha_i m_i, built from K static cornerstone pairs (m_i, F(m_i)),
// among genuine activations, and checks the accelerator's answer for them.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "basisbreak/linalg.hpp"
#include "basisbreak/sampling.hpp"

namespace bb {

struct SoterTeeState {
  std::vector<FieldVector> cornerstones;  // m_i, dim d
  std::vector<FieldVector> f_of_m;        // F(m_i) = m_i * F, dim d_out
  FieldMatrix operator_f;                 // d x d_out
  std::size_t k = 10;
  SamplingStrategy sampling;

  std::size_t d() const { return operator_f.rows(); }
  std::size_t d_out() const { return operator_f.cols(); }
  const FieldModulus& modulus() const { return operator_f.modulus(); }
  SubspaceBasis cornerstone_span() const;
};

// Uniform operator and K independent cornerstones (redrawn if dependent).
SoterTeeState soter_setup(std::size_t d, std::size_t d_out, std::size_t k,
                          SamplingStrategy sampling, const FieldModulus& m,
                          SeededRng& rng);

struct Challenge {
  std::size_t index = 0;              // position in the shuffled batch
  std::vector<std::uint64_t> alpha;   // K coefficients
};

struct FingerprintBatch {
  std::vector<FieldVector> vectors;   // B genuine + F challenges, shuffled
  std::vector<Challenge> challenges;  // TEE-private
  std::vector<FieldVector> genuine_payload;  // the B inputs in caller order

  // Single-fingerprint accessor (the default F = 1 layout).
  std::size_t hidden_index() const { return challenges.at(0).index; }
};

// Builds one batch: fresh coefficients per challenge, every entry placed at
// a uniformly shuffled position.
FingerprintBatch make_batch(std::span<const FieldVector> genuine,
                            const SoterTeeState& state, SeededRng& rng,
                            std::size_t fingerprints = 1);

enum class Verdict { kPass, kAbort };

// Checks only the challenge positions against sum alpha_i F(m_i); genuine
// results are never inspected.
Verdict verify(const FingerprintBatch& batch,
               std::span<const FieldVector> gpu_results,
               const SoterTeeState& state);

enum class ActivationSource {
  kUniform,
  kGaussianQuantized,  // round(N(0,1) * scale) lifted into F_P
};

struct SoterConfig {
  std::size_t d = 64;
  std::size_t d_out = 64;
  std::size_t k = 10;
  std::size_t batch_size = 4;  // B genuine activations per inference call
  std::size_t fingerprints_per_batch = 1;
  SamplingStrategy sampling;
  FieldModulus modulus;
  ActivationSource activations = ActivationSource::kUniform;
  double gaussian_scale = 256.0;
  // Test double: every challenge is a fresh uniform vector (no static
  // basis), verified by computing F in the TEE.
  bool fresh_fingerprints = false;
};

// A running inference service. Each call to next_batch() draws fresh genuine
// activations and a new batch; submit() verifies the accelerator results for
// the pending batch.
class SoterService {
 public:
  SoterService(const SoterConfig& config, std::uint64_t seed);

  // What crosses the TEE -> accelerator boundary.
  const std::vector<FieldVector>& next_batch();
  Verdict submit(std::span<const FieldVector> gpu_results);
  // Passive observation: returns the batch after completing it with honest
  // accelerator results.
  std::vector<FieldVector> observe_honest();

  // The accelerator holds F in the clear.
  FieldVector gpu_compute(const FieldVector& v) const {
    return mul(v, state_.operator_f);
  }

  const SoterConfig& config() const { return config_; }
  std::size_t batches_served() const { return batches_; }
  // Results submitted that differ from the honest product.
  std::size_t modified_results() const { return modified_; }
  std::size_t aborts() const { return aborts_; }

  // --- withheld ground truth ---
  const SoterTeeState& state() const { return state_; }
  const FingerprintBatch& pending() const { return pending_; }

 private:
  FieldVector draw_activation();

  SoterConfig config_;
  SeededRng rng_;
  SoterTeeState state_;
  FingerprintBatch pending_;
  std::vector<FieldVector> fresh_expected_;
  bool has_pending_ = false;
  std::size_t batches_ = 0;
  std::size_t modified_ = 0;
  std::size_t aborts_ = 0;
};

}  // namespace bb
