#pragma once

// Two-stage recovery of a secret permutation behind a masked oracle whose
// masks all live in one static K-dimensional subspace:
//   Stage 1: query with the zero vector K + delta times; the outputs span
//            the permuted noise subspace.
//   Stage 2: query each canonical vector e_j; reducing the output modulo the
//            noise subspace cancels the fresh mask and leaves the coset of
//            e_{image(j)}, which is matched against the precomputed cosets
//            of all canonical vectors.
// Coset reduction against the RREF basis stands in for an orthogonal
// projector: over F_P there is no positive-definite inner product, and the
// attack only needs a map that annihilates the subspace and is canonical on
// cosets.

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "basisbreak/linalg.hpp"
#include "basisbreak/permutation.hpp"
#include "basisbreak/victim_tlg.hpp"

namespace bb {

using QueryOracle = std::function<FieldVector(const FieldVector&)>;

// Forwards to an oracle and counts the calls.
class CountingOracle {
 public:
  explicit CountingOracle(QueryOracle inner) : inner_(std::move(inner)) {}
  FieldVector operator()(const FieldVector& x) {
    ++count_;
    return inner_(x);
  }
  std::size_t count() const { return count_; }

 private:
  QueryOracle inner_;
  std::size_t count_ = 0;
};

// a' -> (a' + m) rho
QueryOracle encrypt_oracle(TlgVictim& victim);
// x -> (x - m W3) pi_{l+1}: runs ENCRYPT on a zero activation, substitutes
// the accelerator result with x and returns what DECRYPT releases.
QueryOracle decrypt_side_oracle(TlgVictim& victim);

struct NoiseSubspaceProfile {
  SubspaceBasis basis;
  std::size_t k_observed = 0;
  std::size_t queries_used = 0;
  std::size_t delta = 0;
};

struct KDiscovery {
  std::size_t k = 0;
  std::size_t queries = 0;
  std::vector<std::size_t> rank_trace;  // rank after each query
  SubspaceBasis basis;
  bool conclusive = false;
  std::string note;  // why the scan was inconclusive
};

// The discovery loop without the throw: the trace is kept either way.
KDiscovery scan_rank_growth(const QueryOracle& oracle, const FieldModulus& m,
                            std::size_t d, std::size_t stability_window,
                            std::size_t max_queries);

// Queries the zero vector until the rank of the outputs has not grown for
// `stability_window` consecutive queries. Throws InconclusiveError when the
// budget runs out or the rank reaches the ambient dimension (fresh noise).
KDiscovery discover_k_traced(const QueryOracle& oracle,
                             const FieldModulus& m, std::size_t d,
                             std::size_t stability_window,
                             std::size_t max_queries);
std::size_t discover_k(const QueryOracle& oracle, const FieldModulus& m,
                       std::size_t d,
                       std::size_t stability_window, std::size_t max_queries);

// Exactly K + delta zero queries. Throws RankShortfall when the rank stays
// below K (a rank-deficient coefficient draw; retry with a larger delta).
NoiseSubspaceProfile learn_noise_subspace(const QueryOracle& oracle,
                                          const FieldModulus& m, std::size_t d, std::size_t k,
                                          std::size_t delta);

// Exactly `queries` zero queries with no rank check (threshold sweeps).
NoiseSubspaceProfile observe_noise(const QueryOracle& oracle,
                                   const FieldModulus& m, std::size_t d,
                                   std::size_t queries);

// Extends `profile` one query at a time until its rank reaches k. Throws
// RankShortfall when `max_queries` total is reached first.
void extend_until_rank(const QueryOracle& oracle, NoiseSubspaceProfile& profile,
                       std::size_t k, std::size_t max_queries);

struct RecoveredPermutation {
  enum class Confidence { kExact, kAmbiguous };

  std::vector<std::size_t> mapping;  // mapping[j] = image of coordinate j
  Confidence confidence = Confidence::kExact;
  std::vector<std::size_t> unresolved;

  bool exact() const { return confidence == Confidence::kExact; }
  Permutation as_permutation() const { return Permutation(mapping); }
};

// Residual of e_k modulo the span, in O(d): e_k itself when k is not a pivot
// column, otherwise e_k minus the row owning that pivot.
FieldVector unit_residual(const SubspaceBasis& b, std::size_t k);

// Stage 2 (d queries). Throws ProtocolError when an output's residual
// matches no canonical residual, i.e. the noise span is incomplete.
RecoveredPermutation recover_permutation(const QueryOracle& oracle,
                                         const NoiseSubspaceProfile& profile,
                                         std::size_t d);

// Undoes W3' = rho^T W3. Refuses an ambiguous permutation.
FieldMatrix recover_weights(const RecoveredPermutation& rho_hat,
                            const FieldMatrix& locked_w3);

struct PermutationStageStats {
  std::size_t discovery_queries = 0;
  std::size_t stage1_queries = 0;
  std::size_t stage2_queries = 0;
  std::size_t rank = 0;
  double stage1_ms = 0.0;
  double stage2_ms = 0.0;

  std::size_t attack_queries() const { return stage1_queries + stage2_queries; }
};

struct RecoveredSecrets {
  Permutation rho;
  FieldMatrix w3;
  std::optional<Permutation> pi_next;
};

struct AttackReport {
  std::size_t d_ffn = 0;
  std::size_t d_model = 0;
  std::size_t k_discovered = 0;  // 0 when K was supplied
  std::size_t k_used = 0;
  PermutationStageStats rho;
  PermutationStageStats pi_next;
  std::optional<RecoveredSecrets> recovered;
  bool success = false;  // set by score_attack against ground truth
  double total_ms = 0.0;
};

struct AttackOptions {
  std::optional<std::size_t> k_known;
  std::size_t delta = 2;
  std::size_t stability_window = 20;
  // Discovery and Stage-1 escalation budget; 0 means 4 * d + 64.
  std::size_t max_queries = 0;
  // Forces exactly this many Stage-1 queries with no escalation.
  std::optional<std::size_t> stage1_queries;
  bool recover_pi_next = true;
};

// Runs the whole layer attack: optional K discovery, both stages against
// ENCRYPT for rho, weight recovery, then both stages against the DECRYPT
// side for pi_{l+1}. Stage failures propagate as StageError tagged
// "rho/..." or "pi_next/...".
AttackReport full_layer_attack(TlgVictim& victim, const AttackOptions& options);

// Sets report.success iff every recovered secret equals the ground truth.
bool score_attack(AttackReport& report, const TlgLayerSecrets& truth);

}  // namespace bb
