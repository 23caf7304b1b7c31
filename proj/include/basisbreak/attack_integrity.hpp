#pragma once

// Recovery of a hidden static fingerprint subspace V_C from passively
// observed batches. Every batch carries fresh genuine activations plus
// challenges drawn from V_C; the span of one set of batches is V_C plus
// random directions, so intersecting the spans of independent sets keeps
// V_C and sheds the rest.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "basisbreak/linalg.hpp"
#include "basisbreak/victim_soter.hpp"

namespace bb {

// Returns the vectors of one complete inference batch as seen on the wire.
using BatchOracle = std::function<std::vector<FieldVector>()>;

// Passive observation of an honest run: the results returned to the service
// are the correct ones, so the attacker writes nothing.
BatchOracle passive_observer(SoterService& service);

struct ObservationSet {
  std::vector<FieldVector> vectors;
  std::size_t batches_seen = 0;
  SubspaceBasis span;

  void add_batch(const std::vector<FieldVector>& batch);
};

// n_sets sets of (k + delta) batches each, filled round-robin so no two
// sets share an inference call.
std::vector<ObservationSet> collect_sets(const BatchOracle& observe,
                                         const FieldModulus& m, std::size_t d,
                                         std::size_t k, std::size_t delta,
                                         std::size_t n_sets = 2);

// Smallest number of sets (at least two) whose generic iterated
// intersection has dimension K: each further set of span dimension s maps
// an intersection of dimension x to K + max(0, x + s - d - K). Returns nullopt when no number
// of sets up to `limit` gets there (e.g. a single set already spans F^d).
std::optional<std::size_t> plan_set_count(std::size_t d, std::size_t k,
                                          std::size_t batch_size,
                                          std::size_t delta,
                                          std::size_t fingerprints = 1,
                                          std::size_t limit = 64);

struct FingerprintFilter {
  SubspaceBasis v_c;
  std::size_t dim = 0;
  // The last intersection step had dim(A + B) = d, so the result may carry
  // spurious directions: collect fewer batches per set or more sets.
  bool saturation_warning = false;
  std::size_t sets_used = 0;
};

// Iterated intersection of the set spans. Throws InconclusiveError when the
// intersection is zero (no shared structure: per-query fresh fingerprints).
FingerprintFilter recover_fingerprint_subspace(
    std::span<const ObservationSet> sets);
FingerprintFilter recover_fingerprint_subspace(const ObservationSet& a,
                                               const ObservationSet& b);

// Grows two sets one batch each at a time until dim(A ∩ B), tracked
// incrementally as dim A + dim B - dim(A + B), reaches k; then intersects.
// Throws InconclusiveError when max_batches per set is reached first.
struct AdaptiveRecovery {
  FingerprintFilter filter;
  std::size_t batches_per_set = 0;
};
AdaptiveRecovery recover_adaptive(const BatchOracle& observe,
                                  const FieldModulus& m, std::size_t d,
                                  std::size_t k, std::size_t max_batches);

enum class EntryClass { kGenuine, kFingerprint };

EntryClass classify(const FieldVector& v, const FingerprintFilter& filter);

struct HiddenKDiscovery {
  std::size_t k = 0;
  std::size_t changepoint = 0;  // last batch with a B+1 rank increment
  std::size_t batches = 0;
  std::vector<std::size_t> rank_trace;  // cumulative rank after each batch
  bool conclusive = false;
  std::string note;
};

HiddenKDiscovery scan_hidden_rank_growth(const BatchOracle& observe,
                                         const FieldModulus& m, std::size_t d,
                                         std::size_t batch_size,
                                         std::size_t max_batches,
                                         std::size_t stability_window = 5);

// Watches cumulative span rank r(n). Generically r(n) = min(n(B+F),
// nB + K); once the per-batch increment drops to B and holds for
// `stability_window` batches, K = r(n) - B n. Throws InconclusiveError if
// no such plateau appears before max_batches or the rank saturates.
HiddenKDiscovery discover_k_hidden_traced(const BatchOracle& observe,
                                          const FieldModulus& m, std::size_t d,
                                          std::size_t batch_size,
                                          std::size_t max_batches,
                                          std::size_t stability_window = 5);
std::size_t discover_k_hidden(const BatchOracle& observe, const FieldModulus& m,
                              std::size_t d, std::size_t batch_size,
                              std::size_t max_batches,
                              std::size_t stability_window = 5);

enum class TamperTarget { kGenuine, kFingerprint, kAll };

struct BypassOutcome {
  std::size_t batches_processed = 0;
  std::size_t fingerprints_passed = 0;  // entries classified Fingerprint
  std::size_t genuine_tampered = 0;     // tampered entries that were genuine
  std::size_t detections = 0;           // aborts returned by verify
  std::size_t misclassified = 0;        // harness-only, from ground truth

  bool bypassed(std::size_t batch_size) const {
    return detections == 0 && genuine_tampered == batches_processed * batch_size;
  }
};

using TamperFn = std::function<FieldVector(const FieldVector& correct)>;

// Adds 1 to every coordinate of the correct result.
FieldVector additive_tamper(const FieldVector& correct);

// For each batch: entries in the target class get tamper(F(v)), all others
// the correct F(v); the results go to the service's verify. kGenuine and
// kFingerprint require a filter; kAll ignores it.
BypassOutcome run_bypass(SoterService& service,
                         const std::optional<FingerprintFilter>& filter,
                         const TamperFn& tamper, std::size_t n_batches,
                         TamperTarget target = TamperTarget::kGenuine);

}  // namespace bb
