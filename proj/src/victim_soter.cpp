#include "basisbreak/victim_soter.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace bb {

SubspaceBasis SoterTeeState::cornerstone_span() const {
  return SubspaceBasis::span_of(modulus(), d(), cornerstones);
}

SoterTeeState soter_setup(std::size_t d, std::size_t d_out, std::size_t k,
                          SamplingStrategy sampling, const FieldModulus& m,
                          SeededRng& rng) {
  if (k < 1) throw ConfigError("soter_setup: K must be >= 1");
  if (k > d) throw ConfigError("soter_setup: K exceeds d");
  if (d_out < 1) throw ConfigError("soter_setup: d_out must be >= 1");
  sampling.validate(k);
  SoterTeeState s;
  s.k = k;
  s.sampling = sampling;
  s.operator_f = random_matrix(d, d_out, m, rng);
  do {
    s.cornerstones.clear();
    for (std::size_t i = 0; i < k; ++i) {
      s.cornerstones.push_back(random_vector(d, m, rng));
    }
  } while (s.cornerstone_span().rank() != k);
  for (const auto& c : s.cornerstones) s.f_of_m.push_back(mul(c, s.operator_f));
  return s;
}

FingerprintBatch make_batch(std::span<const FieldVector> genuine,
                            const SoterTeeState& state, SeededRng& rng,
                            std::size_t fingerprints) {
  for (const auto& g : genuine) {
    if (g.dim() != state.d()) {
      throw DimensionMismatch("make_batch: genuine activation has dim " +
                              std::to_string(g.dim()));
    }
  }
  const FieldModulus& m = state.modulus();
  const std::size_t n = genuine.size() + fingerprints;
  // slot i holds item order[i]; items < B are genuine, the rest challenges.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  FingerprintBatch batch;
  batch.genuine_payload.assign(genuine.begin(), genuine.end());
  batch.vectors.resize(n);
  batch.challenges.resize(fingerprints);
  for (std::size_t slot = 0; slot < n; ++slot) {
    const std::size_t item = order[slot];
    if (item < genuine.size()) {
      batch.vectors[slot] = genuine[item];
      continue;
    }
    Challenge& c = batch.challenges[item - genuine.size()];
    c.index = slot;
    c.alpha = state.sampling.draw(state.k, m, rng);
    FieldVector v(m, state.d());
    for (std::size_t i = 0; i < state.k; ++i) v.axpy(c.alpha[i], state.cornerstones[i]);
    batch.vectors[slot] = std::move(v);
  }
  return batch;
}

Verdict verify(const FingerprintBatch& batch,
               std::span<const FieldVector> gpu_results,
               const SoterTeeState& state) {
  if (gpu_results.size() != batch.vectors.size()) {
    throw DimensionMismatch("verify: expected " +
                            std::to_string(batch.vectors.size()) +
                            " results, got " + std::to_string(gpu_results.size()));
  }
  for (const Challenge& c : batch.challenges) {
    FieldVector expected(state.modulus(), state.d_out());
    for (std::size_t i = 0; i < state.k; ++i) expected.axpy(c.alpha[i], state.f_of_m[i]);
    if (!(gpu_results[c.index] == expected)) return Verdict::kAbort;
  }
  return Verdict::kPass;
}

SoterService::SoterService(const SoterConfig& config, std::uint64_t seed)
    : config_(config), rng_(seed) {
  if (config_.fingerprints_per_batch < 1) {
    throw ConfigError("at least one fingerprint per batch is required");
  }
  state_ = soter_setup(config_.d, config_.d_out, config_.k, config_.sampling,
                       config_.modulus, rng_);
}

FieldVector SoterService::draw_activation() {
  const FieldModulus& m = config_.modulus;
  if (config_.activations == ActivationSource::kUniform) {
    return random_vector(config_.d, m, rng_);
  }
  FieldVector v(m, config_.d);
  auto raw = v.raw();
  for (auto& e : raw) {
    const double x = std::round(rng_.normal() * config_.gaussian_scale);
    e = m.from_signed(static_cast<std::int64_t>(x));
  }
  return v;
}

const std::vector<FieldVector>& SoterService::next_batch() {
  std::vector<FieldVector> genuine;
  genuine.reserve(config_.batch_size);
  for (std::size_t i = 0; i < config_.batch_size; ++i) {
    genuine.push_back(draw_activation());
  }
  pending_ = make_batch(genuine, state_, rng_, config_.fingerprints_per_batch);
  fresh_expected_.clear();
  if (config_.fresh_fingerprints) {
    for (auto& c : pending_.challenges) {
      pending_.vectors[c.index] = random_vector(config_.d, config_.modulus, rng_);
      c.alpha.clear();
      fresh_expected_.push_back(mul(pending_.vectors[c.index], state_.operator_f));
    }
  }
  has_pending_ = true;
  ++batches_;
  return pending_.vectors;
}

Verdict SoterService::submit(std::span<const FieldVector> gpu_results) {
  if (!has_pending_) throw ProtocolError("submit without a pending batch");
  if (gpu_results.size() != pending_.vectors.size()) {
    throw DimensionMismatch("submit: result count does not match the batch");
  }
  for (std::size_t i = 0; i < gpu_results.size(); ++i) {
    if (!(gpu_results[i] == gpu_compute(pending_.vectors[i]))) ++modified_;
  }
  has_pending_ = false;
  Verdict v = Verdict::kPass;
  if (config_.fresh_fingerprints) {
    for (std::size_t c = 0; c < pending_.challenges.size(); ++c) {
      if (!(gpu_results[pending_.challenges[c].index] == fresh_expected_[c])) {
        v = Verdict::kAbort;
      }
    }
  } else {
    v = verify(pending_, gpu_results, state_);
  }
  if (v == Verdict::kAbort) ++aborts_;
  return v;
}

std::vector<FieldVector> SoterService::observe_honest() {
  std::vector<FieldVector> vs = next_batch();
  std::vector<FieldVector> results;
  results.reserve(vs.size());
  for (const auto& v : vs) results.push_back(gpu_compute(v));
  submit(results);
  return vs;
}

}  // namespace bb
