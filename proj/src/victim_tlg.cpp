#include "basisbreak/victim_tlg.hpp"

#include <json.hpp>
#include <string>

namespace bb {
namespace {

FieldVector hadamard(const FieldVector& a, const FieldVector& b) {
  FieldVector out(a.modulus(), a.dim());
  const FieldModulus& m = a.modulus();
  auto o = out.raw();
  for (std::size_t i = 0; i < a.dim(); ++i) o[i] = m.mul(a[i], b[i]);
  return out;
}

bool independent(std::span<const FieldVector> vs, const FieldModulus& m,
                 std::size_t dim) {
  return SubspaceBasis::span_of(m, dim, vs).rank() == vs.size();
}

}  // namespace

LockedWeights lock_weights(const TlgLayerSecrets& s) {
  const TlgWeights& w = s.weights;
  return LockedWeights{lock_rows(s.pi, w.wq),    lock_rows(s.pi, w.wk),
                       lock_rows(s.pi, w.wv),    permute_cols(w.wo, s.pi),
                       lock_rows(s.pi, w.w1),    lock_rows(s.pi, w.w2),
                       lock_rows(s.rho, w.w3)};
}

TlgWeights unlock_weights(const LockedWeights& locked, const Permutation& pi,
                          const Permutation& rho) {
  return TlgWeights{unlock_rows(pi, locked.wq),
                    unlock_rows(pi, locked.wk),
                    unlock_rows(pi, locked.wv),
                    permute_cols(locked.wo, pi.inverse()),
                    unlock_rows(pi, locked.w1),
                    unlock_rows(pi, locked.w2),
                    unlock_rows(rho, locked.w3)};
}

bool NoiseTable::verify(const FieldMatrix& w3) const {
  if (basis_vectors.size() != k || effects.size() != k) return false;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(mul(basis_vectors[i], w3) == effects[i])) return false;
  }
  return true;
}

NoiseTable make_noise_table(const FieldMatrix& w3, std::size_t k,
                            SamplingStrategy sampling, SeededRng& rng) {
  if (k < 1) throw ConfigError("noise table needs K >= 1");
  if (k > w3.rows()) {
    throw ConfigError("K=" + std::to_string(k) + " exceeds d_ffn=" +
                      std::to_string(w3.rows()));
  }
  sampling.validate(k);
  const FieldModulus& m = w3.modulus();
  const bool effects_must_be_independent = k <= w3.cols();
  for (;;) {
    NoiseTable t;
    t.k = k;
    t.sampling = sampling;
    for (std::size_t i = 0; i < k; ++i) {
      t.basis_vectors.push_back(random_vector(w3.rows(), m, rng));
      t.effects.push_back(mul(t.basis_vectors.back(), w3));
    }
    if (!independent(t.basis_vectors, m, w3.rows())) continue;
    if (effects_must_be_independent && !independent(t.effects, m, w3.cols())) {
      continue;
    }
    return t;
  }
}

FieldVector gpu_linear(const FieldVector& x, const FieldMatrix& w_locked) {
  return mul(x, w_locked);
}

FieldVector plaintext_forward(const TlgWeights& w, const FieldVector& x) {
  const FieldVector q = x * w.wq;
  const FieldVector kx = x * w.wk;
  const FieldVector v = x * w.wv;
  const FieldVector s = hadamard(hadamard(q, kx), v);
  const FieldVector h = x + s * w.wo;
  const FieldVector a = hadamard(h * w.w1, h * w.w2);
  return a * w.w3;
}

TlgVictim::TlgVictim(const TlgConfig& config, std::uint64_t seed)
    : config_(config), rng_(seed) {
  if (config_.d_ffn < 2 || config_.d_model < 2) {
    throw ConfigError("TLG victim needs d_ffn >= 2 and d_model >= 2");
  }
  if (config_.k < 1) throw ConfigError("TLG victim needs K >= 1");
  config_.sampling.validate(config_.k);
  const FieldModulus& m = config_.modulus;
  const std::size_t dm = config_.d_model;
  const std::size_t df = config_.d_ffn;

  secrets_.pi = Permutation::random(dm, rng_);
  secrets_.rho = config_.rho ? *config_.rho : Permutation::random(df, rng_);
  if (secrets_.rho.size() != df) throw ConfigError("fixed rho has wrong size");
  secrets_.pi_next = Permutation::random(dm, rng_);
  if (config_.encrypt_only) {
    if (config_.k > df) throw ConfigError("K exceeds d_ffn");
    table_.k = config_.k;
    table_.sampling = config_.sampling;
    do {
      table_.basis_vectors.clear();
      for (std::size_t i = 0; i < config_.k; ++i) {
        table_.basis_vectors.push_back(random_vector(df, m, rng_));
      }
    } while (!independent(table_.basis_vectors, m, df));
    return;
  }
  secrets_.weights = TlgWeights{random_matrix(dm, dm, m, rng_),
                                random_matrix(dm, dm, m, rng_),
                                random_matrix(dm, dm, m, rng_),
                                random_matrix(dm, dm, m, rng_),
                                random_matrix(dm, df, m, rng_),
                                random_matrix(dm, df, m, rng_),
                                random_matrix(df, dm, m, rng_)};
  locked_ = lock_weights(secrets_);
  table_ = make_noise_table(secrets_.weights.w3, config_.k, config_.sampling,
                            rng_);
  if (!table_.verify(secrets_.weights.w3)) {
    throw Error("noise table effects do not match W3");
  }
}

EncryptResult TlgVictim::encrypt(const FieldVector& a_prime) {
  if (a_prime.dim() != config_.d_ffn) {
    throw DimensionMismatch("encrypt expects dim " +
                            std::to_string(config_.d_ffn));
  }
  require_same(a_prime.modulus(), config_.modulus);
  TlgQueryRecord rec;
  rec.query_id = next_query_id_++;
  FieldVector masked = a_prime;
  switch (config_.noise) {
    case NoiseMode::kPrecomputed:
      rec.alpha = table_.sampling.draw(table_.k, config_.modulus, rng_);
      for (std::size_t i = 0; i < table_.k; ++i) {
        masked.axpy(rec.alpha[i], table_.basis_vectors[i]);
      }
      break;
    case NoiseMode::kOnTheFly: {
      rec.fresh_mask.emplace(random_vector(config_.d_ffn, config_.modulus, rng_));
      masked = masked + *rec.fresh_mask;
      break;
    }
    case NoiseMode::kZero:
      rec.alpha.assign(table_.k, 0);
      break;
  }
  EncryptResult out{rec.query_id, apply(masked, secrets_.rho)};
  log_.emplace(rec.query_id, std::move(rec));
  return out;
}

FieldVector TlgVictim::decrypt(const FieldVector& b_dd,
                               std::uint64_t query_id) {
  if (b_dd.dim() != config_.d_model) {
    throw DimensionMismatch("decrypt expects dim " +
                            std::to_string(config_.d_model));
  }
  auto it = log_.find(query_id);
  if (it == log_.end()) {
    throw ProtocolError("decrypt: unknown query id " + std::to_string(query_id));
  }
  TlgQueryRecord& rec = it->second;
  if (config_.encrypt_only) throw ProtocolError("decrypt: encrypt-only victim");
  if (rec.consumed) {
    throw ProtocolError("decrypt: mask for query " + std::to_string(query_id) +
                        " already consumed");
  }
  FieldVector b = b_dd;
  const FieldModulus& m = config_.modulus;
  if (rec.fresh_mask) {
    b = b - mul(*rec.fresh_mask, secrets_.weights.w3);
  } else {
    for (std::size_t i = 0; i < table_.k; ++i) {
      b.axpy(m.neg(rec.alpha[i]), table_.effects[i]);
    }
  }
  rec.consumed = true;
  return apply(b, secrets_.pi_next);
}

FieldVector TlgVictim::locked_forward(const FieldVector& x_permuted) {
  const LockedWeights& w = locked_;
  const FieldVector q = x_permuted * w.wq;
  const FieldVector kx = x_permuted * w.wk;
  const FieldVector v = x_permuted * w.wv;
  const FieldVector s = hadamard(hadamard(q, kx), v);
  const FieldVector h = x_permuted + s * w.wo;
  const FieldVector a = hadamard(h * w.w1, h * w.w2);
  const EncryptResult enc = encrypt(a);
  return decrypt(gpu_linear(enc.output), enc.query_id);
}

const TlgQueryRecord& TlgVictim::record(std::uint64_t query_id) const {
  auto it = log_.find(query_id);
  if (it == log_.end()) throw ProtocolError("unknown query id");
  return it->second;
}

FieldVector TlgVictim::mask_of(std::uint64_t query_id) const {
  const TlgQueryRecord& rec = record(query_id);
  if (rec.fresh_mask) return *rec.fresh_mask;
  FieldVector m(config_.modulus, config_.d_ffn);
  for (std::size_t i = 0; i < table_.k; ++i) {
    m.axpy(rec.alpha[i], table_.basis_vectors[i]);
  }
  return m;
}

std::string export_ground_truth(const TlgLayerSecrets& s) {
  auto perm = [](const Permutation& p) {
    return std::vector<std::size_t>(p.image().begin(), p.image().end());
  };
  auto mat = [](const FieldMatrix& w) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < w.rows(); ++r) {
      auto row = w.row(r);
      rows.push_back(std::vector<std::uint64_t>(row.begin(), row.end()));
    }
    return rows;
  };
  nlohmann::json j;
  j["modulus"] = s.weights.w3.modulus().p();
  j["pi"] = perm(s.pi);
  j["rho"] = perm(s.rho);
  j["pi_next"] = perm(s.pi_next);
  j["weights"] = {{"wq", mat(s.weights.wq)}, {"wk", mat(s.weights.wk)},
                  {"wv", mat(s.weights.wv)}, {"wo", mat(s.weights.wo)},
                  {"w1", mat(s.weights.w1)}, {"w2", mat(s.weights.w2)},
                  {"w3", mat(s.weights.w3)}};
  return j.dump();
}

}  // namespace bb
