#include "basisbreak/attack_integrity.hpp"

#include <algorithm>
#include <string>

#include "basisbreak/errors.hpp"

namespace bb {

BatchOracle passive_observer(SoterService& service) {
  return [&service] { return service.observe_honest(); };
}

void ObservationSet::add_batch(const std::vector<FieldVector>& batch) {
  for (const auto& v : batch) {
    span.insert(v);
    vectors.push_back(v);
  }
  ++batches_seen;
}

std::vector<ObservationSet> collect_sets(const BatchOracle& observe,
                                         const FieldModulus& m, std::size_t d,
                                         std::size_t k, std::size_t delta,
                                         std::size_t n_sets) {
  if (n_sets < 1) throw ConfigError("need at least one observation set");
  std::vector<ObservationSet> sets(n_sets);
  for (auto& s : sets) s.span = SubspaceBasis(m, d);
  for (std::size_t b = 0; b < k + delta; ++b) {
    for (auto& s : sets) {
      std::vector<FieldVector> batch = observe();
      if (batch.empty()) throw InconclusiveError("observation oracle exhausted");
      s.add_batch(batch);
    }
  }
  return sets;
}

std::optional<std::size_t> plan_set_count(std::size_t d, std::size_t k,
                                          std::size_t batch_size,
                                          std::size_t delta,
                                          std::size_t fingerprints,
                                          std::size_t limit) {
  const std::size_t batches = k + delta;
  // Challenges contribute K directions, genuine entries B per batch.
  const std::size_t s =
      std::min(d, std::min(k, batches * fingerprints) + batches * batch_size);
  std::size_t x = s;
  for (std::size_t n = 1; n <= limit; ++n) {
    if (x == k) return std::max<std::size_t>(n, 2);
    if (s == d) return std::nullopt;
    const std::size_t sum = x + s;
    x = k + (sum > d + k ? sum - d - k : 0);
  }
  return std::nullopt;
}

FingerprintFilter recover_fingerprint_subspace(
    std::span<const ObservationSet> sets) {
  if (sets.size() < 2) {
    throw ConfigError("intersection needs at least two observation sets");
  }
  FingerprintFilter f;
  SubspaceBasis acc = sets[0].span;
  for (std::size_t i = 1; i < sets.size(); ++i) {
    const SubspaceBasis& next = sets[i].span;
    f.saturation_warning =
        subspace_sum(acc, next).rank() == acc.ambient_dim();
    acc = subspace_intersection(acc, next);
  }
  f.v_c = std::move(acc);
  f.dim = f.v_c.rank();
  f.sets_used = sets.size();
  if (f.dim == 0) {
    throw InconclusiveError(
        "observation spans share no subspace; fingerprints are not static");
  }
  return f;
}

FingerprintFilter recover_fingerprint_subspace(const ObservationSet& a,
                                               const ObservationSet& b) {
  const ObservationSet pair[] = {a, b};
  return recover_fingerprint_subspace(std::span<const ObservationSet>(pair));
}

AdaptiveRecovery recover_adaptive(const BatchOracle& observe,
                                  const FieldModulus& m, std::size_t d,
                                  std::size_t k, std::size_t max_batches) {
  ObservationSet a, b;
  a.span = SubspaceBasis(m, d);
  b.span = SubspaceBasis(m, d);
  SubspaceBasis sum(m, d);
  for (std::size_t n = 1; n <= max_batches; ++n) {
    for (ObservationSet* s : {&a, &b}) {
      const std::vector<FieldVector> batch = observe();
      s->add_batch(batch);
      for (const auto& v : batch) sum.insert(v);
    }
    const std::size_t inter = a.span.rank() + b.span.rank() - sum.rank();
    if (inter >= k) {
      AdaptiveRecovery out;
      out.filter = recover_fingerprint_subspace(a, b);
      out.batches_per_set = n;
      return out;
    }
    if (sum.rank() == d) break;
  }
  throw InconclusiveError("intersection did not reach dimension " +
                          std::to_string(k) + " within " +
                          std::to_string(max_batches) + " batches per set");
}

EntryClass classify(const FieldVector& v, const FingerprintFilter& filter) {
  if (v.dim() != filter.v_c.ambient_dim()) {
    throw DimensionMismatch("classify: vector dimension does not match filter");
  }
  return filter.v_c.contains(v) ? EntryClass::kFingerprint
                                : EntryClass::kGenuine;
}

HiddenKDiscovery scan_hidden_rank_growth(const BatchOracle& observe,
                                         const FieldModulus& m, std::size_t d,
                                         std::size_t batch_size,
                                         std::size_t max_batches,
                                         std::size_t stability_window) {
  if (stability_window == 0) throw ConfigError("stability window must be >= 1");
  HiddenKDiscovery out;
  SubspaceBasis span(m, d);
  std::size_t stable = 0;
  while (out.batches < max_batches) {
    const std::vector<FieldVector> batch = observe();
    if (batch.size() <= batch_size) {
      throw ConfigError("batch carries no entries beyond the declared B");
    }
    const std::size_t before = span.rank();
    for (const auto& v : batch) span.insert(v);
    ++out.batches;
    out.rank_trace.push_back(span.rank());
    if (span.rank() == d) {
      out.note = "span rank reached the ambient dimension " +
                 std::to_string(d) + " without a slope change";
      return out;
    }
    const std::size_t inc = span.rank() - before;
    if (inc == batch_size) {
      ++stable;
    } else {
      stable = 0;
      if (inc > batch_size) out.changepoint = out.batches;
    }
    if (stable >= stability_window) {
      out.k = span.rank() - batch_size * out.batches;
      out.conclusive = true;
      return out;
    }
  }
  out.note = "no slope change within " + std::to_string(max_batches) +
             " batches";
  return out;
}

HiddenKDiscovery discover_k_hidden_traced(const BatchOracle& observe,
                                          const FieldModulus& m, std::size_t d,
                                          std::size_t batch_size,
                                          std::size_t max_batches,
                                          std::size_t stability_window) {
  HiddenKDiscovery out = scan_hidden_rank_growth(observe, m, d, batch_size,
                                                 max_batches, stability_window);
  if (!out.conclusive) throw InconclusiveError(out.note);
  return out;
}

std::size_t discover_k_hidden(const BatchOracle& observe, const FieldModulus& m,
                              std::size_t d, std::size_t batch_size,
                              std::size_t max_batches,
                              std::size_t stability_window) {
  return discover_k_hidden_traced(observe, m, d, batch_size, max_batches,
                                  stability_window)
      .k;
}

FieldVector additive_tamper(const FieldVector& correct) {
  FieldVector out = correct;
  const FieldModulus& m = out.modulus();
  for (auto& e : out.raw()) e = m.add(e, 1);
  return out;
}

BypassOutcome run_bypass(SoterService& service,
                         const std::optional<FingerprintFilter>& filter,
                         const TamperFn& tamper, std::size_t n_batches,
                         TamperTarget target) {
  if (target != TamperTarget::kAll && !filter) {
    throw ConfigError("targeted tampering needs a fingerprint filter");
  }
  BypassOutcome out;
  for (std::size_t n = 0; n < n_batches; ++n) {
    const std::vector<FieldVector> batch = service.next_batch();
    std::vector<bool> is_challenge(batch.size(), false);
    for (const auto& c : service.pending().challenges) is_challenge[c.index] = true;

    std::vector<FieldVector> results;
    results.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      FieldVector r = service.gpu_compute(batch[i]);
      bool hit = target == TamperTarget::kAll;
      if (filter) {
        const EntryClass cls = classify(batch[i], *filter);
        if (cls == EntryClass::kFingerprint) ++out.fingerprints_passed;
        if ((cls == EntryClass::kFingerprint) != is_challenge[i]) {
          ++out.misclassified;
        }
        if (target == TamperTarget::kGenuine) hit = cls == EntryClass::kGenuine;
        if (target == TamperTarget::kFingerprint) {
          hit = cls == EntryClass::kFingerprint;
        }
      }
      if (hit) {
        r = tamper(r);
        if (!is_challenge[i]) ++out.genuine_tampered;
      }
      results.push_back(std::move(r));
    }
    if (service.submit(results) == Verdict::kAbort) ++out.detections;
    ++out.batches_processed;
  }
  return out;
}

}  // namespace bb
