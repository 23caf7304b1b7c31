#pragma once

// Simulation of a permutation-locked transformer layer whose FFN down
// projection (W3) is offloaded through an ENCRYPT -> LINEAR -> DECRYPT
// sequence. Masks come from a precomputed table of K noise vectors and
// their W3 effects; the attacker sees only the oracle methods and the
// locked weights.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "basisbreak/linalg.hpp"
#include "basisbreak/permutation.hpp"
#include "basisbreak/sampling.hpp"

namespace bb {

struct TlgWeights {
  FieldMatrix wq, wk, wv, wo;  // d_model x d_model
  FieldMatrix w1, w2;          // d_model x d_ffn
  FieldMatrix w3;              // d_ffn x d_model
};

// Secrets held by the TEE for layer l.
struct TlgLayerSecrets {
  Permutation pi;       // pi_l, d_model
  Permutation rho;      // rho_l, d_ffn
  Permutation pi_next;  // pi_{l+1}, d_model
  TlgWeights weights;   // plaintext
};

// The weights as deployed on untrusted hardware:
//   wq' = pi^T wq (likewise wk, wv, w1, w2), wo' = wo pi, w3' = rho^T w3.
struct LockedWeights {
  FieldMatrix wq, wk, wv, wo, w1, w2, w3;
};

LockedWeights lock_weights(const TlgLayerSecrets& s);
// Inverse of lock_weights given pi_l and a candidate rho.
TlgWeights unlock_weights(const LockedWeights& locked, const Permutation& pi,
                          const Permutation& rho);

// The static table {n_i} and {n_i W3}.
struct NoiseTable {
  std::vector<FieldVector> basis_vectors;  // K vectors of dim d_ffn
  std::vector<FieldVector> effects;        // K vectors of dim d_model
  std::size_t k = 0;
  SamplingStrategy sampling;

  // Checks effects[i] == basis_vectors[i] * w3 for every i.
  bool verify(const FieldMatrix& w3) const;
};

// Draws K linearly independent noise vectors (redrawing on the rare
// dependent draw) and precomputes their effects. When k <= d_model the
// effects are also forced independent.
NoiseTable make_noise_table(const FieldMatrix& w3, std::size_t k,
                            SamplingStrategy sampling, SeededRng& rng);

enum class NoiseMode {
  kPrecomputed,  // the deployed design: m = sum alpha_i n_i
  kOnTheFly,     // fresh uniform m per query, effect m * W3 computed in TEE
  kZero,         // test hook: every alpha forced to 0
};

struct TlgConfig {
  std::size_t d_ffn = 64;
  std::size_t d_model = 32;
  std::size_t k = 8;
  SamplingStrategy sampling;
  FieldModulus modulus;
  NoiseMode noise = NoiseMode::kPrecomputed;
  // Optional fixed rho (tests); drawn uniformly when empty.
  std::optional<Permutation> rho;
  // Only the ENCRYPT stage is materialized (no weights, no effects); used
  // for full-scale rho recovery where d_ffn x d_model weights do not fit.
  bool encrypt_only = false;
};

struct TlgQueryRecord {
  std::uint64_t query_id = 0;
  std::vector<std::uint64_t> alpha;  // empty unless precomputed mode
  std::optional<FieldVector> fresh_mask;  // on-the-fly mode only
  bool consumed = false;
};

struct EncryptResult {
  std::uint64_t query_id = 0;
  FieldVector output;  // (a' + m) rho
};

// Plain F_P matrix-vector product run by the untrusted accelerator.
FieldVector gpu_linear(const FieldVector& x, const FieldMatrix& w_locked);

// Field surrogate of one layer: Q, K, V projections, elementwise mixing
// s = Q*K*V, output projection, residual, gated FFN (x W1) * (x W2), then W3.
FieldVector plaintext_forward(const TlgWeights& w, const FieldVector& x);

class TlgVictim {
 public:
  // Throws ConfigError on degenerate dims or an invalid sampling strategy.
  TlgVictim(const TlgConfig& config, std::uint64_t seed);

  // --- attacker-visible surface ---
  EncryptResult encrypt(const FieldVector& a_prime);
  // Subtracts the recorded mask effect and releases b * pi_{l+1}. Throws
  // ProtocolError for an unknown or already consumed query id.
  FieldVector decrypt(const FieldVector& b_dd, std::uint64_t query_id);
  // Honest accelerator result for an encrypted activation.
  FieldVector gpu_linear(const FieldVector& a_dd) const {
    return bb::gpu_linear(a_dd, locked_.w3);
  }
  const LockedWeights& locked_weights() const { return locked_; }
  // Runs the whole locked layer on x' = x pi_l, using the TEE round trip for
  // the W3 stage; returns the output permuted by pi_{l+1}.
  FieldVector locked_forward(const FieldVector& x_permuted);

  std::size_t d_ffn() const { return config_.d_ffn; }
  std::size_t d_model() const { return config_.d_model; }
  const FieldModulus& modulus() const { return config_.modulus; }
  std::uint64_t queries_issued() const { return next_query_id_; }

  // --- withheld ground truth (test harness only) ---
  const TlgLayerSecrets& ground_truth() const { return secrets_; }
  const NoiseTable& noise_table() const { return table_; }
  const TlgQueryRecord& record(std::uint64_t query_id) const;
  FieldVector mask_of(std::uint64_t query_id) const;

 private:
  TlgConfig config_;
  SeededRng rng_;
  TlgLayerSecrets secrets_;
  LockedWeights locked_;
  NoiseTable table_;
  std::unordered_map<std::uint64_t, TlgQueryRecord> log_;
  std::uint64_t next_query_id_ = 0;
};

}  // namespace bb

namespace bb {

// Deterministic JSON record of the layer secrets (permutations and plaintext
// weights) for the acceptance harness. Never reachable from the oracles.
std::string export_ground_truth(const TlgLayerSecrets& s);

}  // namespace bb
