#include "basisbreak/attack_confidentiality.hpp"

#include <algorithm>
#include <unordered_map>

#include "basisbreak/errors.hpp"

namespace bb {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::uint64_t hash_values(std::span<const std::uint64_t> v) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t x : v) h = splitmix64(h ^ x);
  return h;
}

std::size_t default_budget(std::size_t d) { return 4 * d + 64; }

}  // namespace

QueryOracle encrypt_oracle(TlgVictim& victim) {
  return [&victim](const FieldVector& x) { return victim.encrypt(x).output; };
}

QueryOracle decrypt_side_oracle(TlgVictim& victim) {
  return [&victim](const FieldVector& x) {
    const EncryptResult r =
        victim.encrypt(FieldVector(victim.modulus(), victim.d_ffn()));
    return victim.decrypt(x, r.query_id);
  };
}

KDiscovery scan_rank_growth(const QueryOracle& oracle, const FieldModulus& m,
                            std::size_t d, std::size_t stability_window,
                            std::size_t max_queries) {
  if (stability_window == 0) throw ConfigError("stability window must be >= 1");
  KDiscovery out;
  out.basis = SubspaceBasis(m, d);
  const FieldVector zero(m, d);
  std::size_t stable = 0;
  while (out.queries < max_queries) {
    const bool grew = out.basis.insert(oracle(zero));
    ++out.queries;
    out.rank_trace.push_back(out.basis.rank());
    if (out.basis.rank() == d) {
      out.note = "noise rank reached the ambient dimension " +
                 std::to_string(d) +
                 "; masks are not confined to a static subspace";
      return out;
    }
    stable = grew ? 0 : stable + 1;
    if (stable >= stability_window) {
      out.k = out.basis.rank();
      out.conclusive = true;
      return out;
    }
  }
  out.note = "rank did not stabilize within " + std::to_string(max_queries) +
             " queries";
  return out;
}

KDiscovery discover_k_traced(const QueryOracle& oracle, const FieldModulus& m,
                             std::size_t d, std::size_t stability_window,
                             std::size_t max_queries) {
  KDiscovery out = scan_rank_growth(oracle, m, d, stability_window, max_queries);
  if (!out.conclusive) throw InconclusiveError(out.note);
  return out;
}

std::size_t discover_k(const QueryOracle& oracle, const FieldModulus& m,
                       std::size_t d, std::size_t stability_window,
                       std::size_t max_queries) {
  return discover_k_traced(oracle, m, d, stability_window, max_queries).k;
}

NoiseSubspaceProfile observe_noise(const QueryOracle& oracle,
                                   const FieldModulus& m, std::size_t d,
                                   std::size_t queries) {
  NoiseSubspaceProfile p;
  p.basis = SubspaceBasis(m, d);
  const FieldVector zero(m, d);
  for (std::size_t i = 0; i < queries; ++i) {
    p.basis.insert(oracle(zero));
    ++p.queries_used;
  }
  p.k_observed = p.basis.rank();
  return p;
}

NoiseSubspaceProfile learn_noise_subspace(const QueryOracle& oracle,
                                          const FieldModulus& m, std::size_t d,
                                          std::size_t k, std::size_t delta) {
  NoiseSubspaceProfile p = observe_noise(oracle, m, d, k + delta);
  p.delta = delta;
  if (p.k_observed < k) {
    throw RankShortfall("observed noise rank " + std::to_string(p.k_observed) +
                            " < K = " + std::to_string(k),
                        p.k_observed, k);
  }
  return p;
}

void extend_until_rank(const QueryOracle& oracle, NoiseSubspaceProfile& p,
                       std::size_t k, std::size_t max_queries) {
  const std::size_t d = p.basis.ambient_dim();
  while (p.basis.rank() < k && p.queries_used < max_queries) {
    p.basis.insert(oracle(FieldVector(p.basis.modulus(), d)));
    ++p.queries_used;
  }
  p.k_observed = p.basis.rank();
  if (p.k_observed < k) {
    throw RankShortfall("noise rank " + std::to_string(p.k_observed) +
                            " < K = " + std::to_string(k) + " after " +
                            std::to_string(p.queries_used) + " queries",
                        p.k_observed, k);
  }
}

FieldVector unit_residual(const SubspaceBasis& b, std::size_t k) {
  FieldVector e = FieldVector::unit(b.modulus(), b.ambient_dim(), k);
  const auto& piv = b.pivots();
  const auto it = std::lower_bound(piv.begin(), piv.end(), k);
  if (it != piv.end() && *it == k) {
    e = e - b.row(static_cast<std::size_t>(it - piv.begin()));
  }
  return e;
}

RecoveredPermutation recover_permutation(const QueryOracle& oracle,
                                         const NoiseSubspaceProfile& profile,
                                         std::size_t d) {
  const SubspaceBasis& basis = profile.basis;
  if (basis.ambient_dim() != d) {
    throw DimensionMismatch("noise profile dimension does not match d");
  }

  // Only hashes are stored; candidates are recomputed on a hit, so memory
  // stays O(d) even at full model widths.
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> table;
  table.reserve(d * 2);
  for (std::size_t k = 0; k < d; ++k) {
    table[hash_values(unit_residual(basis, k).values())].push_back(k);
  }

  RecoveredPermutation out;
  out.mapping.assign(d, 0);
  std::vector<bool> used(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    const FieldVector r =
        basis.residual(oracle(FieldVector::unit(basis.modulus(), d, j)));
    std::vector<std::size_t> matches;
    const auto it = table.find(hash_values(r.values()));
    if (it != table.end()) {
      for (std::size_t k : it->second) {
        if (unit_residual(basis, k) == r) matches.push_back(k);
      }
    }
    if (matches.empty()) {
      throw ProtocolError("residual of query e_" + std::to_string(j) +
                          " matches no canonical residual");
    }
    out.mapping[j] = matches.front();
    if (matches.size() > 1 || used[matches.front()]) {
      out.unresolved.push_back(j);
    }
    used[matches.front()] = true;
  }
  if (!out.unresolved.empty() || !is_bijection(out.mapping)) {
    out.confidence = RecoveredPermutation::Confidence::kAmbiguous;
  }
  return out;
}

FieldMatrix recover_weights(const RecoveredPermutation& rho_hat,
                            const FieldMatrix& locked_w3) {
  if (!rho_hat.exact()) {
    throw ProtocolError("refusing to unlock weights with an ambiguous "
                        "permutation (" +
                        std::to_string(rho_hat.unresolved.size()) +
                        " unresolved coordinates)");
  }
  if (rho_hat.mapping.size() != locked_w3.rows()) {
    throw DimensionMismatch("permutation size does not match W3' rows");
  }
  return unlock_rows(rho_hat.as_permutation(), locked_w3);
}

namespace {

// Stage 1 then Stage 2 against one oracle. Returns the permutation and
// fills `stats`.
RecoveredPermutation attack_one(const QueryOracle& oracle,
                                const FieldModulus& m, std::size_t d,
                                std::size_t k,
                                std::optional<NoiseSubspaceProfile> seeded,
                                const AttackOptions& opt,
                                PermutationStageStats& stats,
                                const std::string& tag) {
  const std::size_t budget = opt.max_queries ? opt.max_queries : default_budget(d);
  NoiseSubspaceProfile profile;
  auto t0 = Clock::now();
  try {
    if (seeded) {
      profile = std::move(*seeded);
      profile.queries_used = 0;
      extend_until_rank(oracle, profile, k, budget);
    } else if (opt.stage1_queries) {
      profile = observe_noise(oracle, m, d, *opt.stage1_queries);
    } else {
      profile = observe_noise(oracle, m, d, k + opt.delta);
      profile.delta = opt.delta;
      // A rank-deficient coefficient draw keeps its samples and escalates.
      if (profile.k_observed < k) extend_until_rank(oracle, profile, k, budget);
    }
  } catch (const Error& e) {
    throw StageError(tag + "/stage1", e.what());
  }
  stats.stage1_ms = ms_since(t0);
  stats.stage1_queries = profile.queries_used;
  stats.rank = profile.basis.rank();

  CountingOracle counted(oracle);
  QueryOracle q = [&counted](const FieldVector& x) { return counted(x); };
  t0 = Clock::now();
  RecoveredPermutation perm;
  try {
    perm = recover_permutation(q, profile, d);
  } catch (const Error& e) {
    throw StageError(tag + "/stage2", e.what());
  }
  stats.stage2_ms = ms_since(t0);
  stats.stage2_queries = counted.count();
  if (!perm.exact()) {
    throw StageError(tag + "/stage2",
                     std::to_string(perm.unresolved.size()) +
                         " coordinates matched ambiguously");
  }
  return perm;
}

}  // namespace

AttackReport full_layer_attack(TlgVictim& victim, const AttackOptions& opt) {
  const auto t0 = Clock::now();
  AttackReport rep;
  rep.d_ffn = victim.d_ffn();
  rep.d_model = victim.d_model();

  QueryOracle enc = encrypt_oracle(victim);
  std::optional<NoiseSubspaceProfile> seeded;
  std::size_t k = 0;
  if (opt.k_known) {
    k = *opt.k_known;
  } else {
    const std::size_t budget =
        opt.max_queries ? opt.max_queries : default_budget(rep.d_ffn);
    KDiscovery disc;
    try {
      disc = discover_k_traced(enc, victim.modulus(), rep.d_ffn, opt.stability_window, budget);
    } catch (const Error& e) {
      throw StageError("rho/discover_k", e.what());
    }
    k = disc.k;
    rep.k_discovered = k;
    rep.rho.discovery_queries = disc.queries;
    NoiseSubspaceProfile p;
    p.basis = std::move(disc.basis);
    p.k_observed = k;
    seeded = std::move(p);
  }
  rep.k_used = k;

  RecoveredPermutation rho =
      attack_one(enc, victim.modulus(), rep.d_ffn, k, std::move(seeded), opt, rep.rho, "rho");
  FieldMatrix w3;
  if (victim.locked_weights().w3.rows() > 0) {
    w3 = recover_weights(rho, victim.locked_weights().w3);
  }
  RecoveredSecrets sec{rho.as_permutation(), std::move(w3), std::nullopt};

  if (opt.recover_pi_next) {
    QueryOracle dec = decrypt_side_oracle(victim);
    // The DECRYPT-side noise is the image of the same K-dimensional span
    // under W3, so its rank is min(K, d_model) for generic W3.
    const std::size_t k_dec = std::min(k, rep.d_model);
    RecoveredPermutation pn = attack_one(dec, victim.modulus(), rep.d_model, k_dec, std::nullopt,
                                         opt, rep.pi_next, "pi_next");
    sec.pi_next = pn.as_permutation();
  }
  rep.recovered = std::move(sec);
  rep.total_ms = ms_since(t0);
  return rep;
}

bool score_attack(AttackReport& report, const TlgLayerSecrets& truth) {
  report.success = false;
  if (!report.recovered) return false;
  const RecoveredSecrets& r = *report.recovered;
  bool ok = r.rho == truth.rho;
  if (ok && r.w3.rows() > 0) ok = r.w3 == truth.weights.w3;
  if (ok && r.pi_next) ok = *r.pi_next == truth.pi_next;
  report.success = ok;
  return ok;
}

}  // namespace bb
