#pragma once

// Seeded experiment drivers. Every trial gets its own victim and RNG stream
// from derive_seed(seed, trial), so a (config, seed) pair reproduces the
// same CSV bytes apart from the *_ms columns.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "basisbreak/attack_confidentiality.hpp"
#include "basisbreak/attack_integrity.hpp"
#include "basisbreak/victim_soter.hpp"
#include "basisbreak/victim_tlg.hpp"

namespace bb {

enum class Experiment {
  kDiscoverKTlg,
  kDiscoverKSoter,
  kThreshold,
  kAttackTlg,
  kAttackSoter,
  kSubsetSweep,
  kKSweep,
  kDimSweep,
  kCostTable,
  kRankProb,
};

Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment e);
const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  Experiment experiment = Experiment::kAttackTlg;
  std::size_t d = 128;
  std::size_t d_model = 0;  // 0: d / 2
  std::size_t k = 8;
  std::optional<std::size_t> t;  // SubsetT size; empty: all-K sampling
  std::size_t delta = 2;
  std::size_t batch_size = 4;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::uint64_t modulus = kMersenne31;
  std::string out = ".";  // CSV directory; empty: no file
  std::size_t window = 0;  // 0: 20 for direct, 5 for hidden discovery
  bool full_scale = false;
  std::string model = "LLaMA-3 8B";
  double m_tee_mib = 128.0;
  NoiseMode noise = NoiseMode::kPrecomputed;
  bool fresh_fingerprints = false;
  bool discover = false;  // attack-tlg: discover K instead of using --k
  std::size_t bypass_batches = 1000;
  std::optional<std::size_t> sets;  // attack-soter: override the planner
  std::vector<std::size_t> sweep;   // override the default sweep points

  std::size_t effective_d_model() const { return d_model ? d_model : d / 2; }
  // Throws ConfigError on inconsistent values.
  void validate() const;
};

// Sets one field from its textual form; keys use the flag spelling with '_'
// or '-' ("batch_size" and "batch-size" are equivalent). Throws ConfigError
// for an unknown key or a malformed value.
void apply_setting(ExperimentConfig& cfg, const std::string& key,
                   const std::string& value);
// Flat "key = value" file; '#' starts a comment.
void load_config_file(ExperimentConfig& cfg, const std::string& path);
// BASISBREAK_<KEY> variables, e.g. BASISBREAK_TRIALS=5.
void apply_env(ExperimentConfig& cfg,
               const std::function<const char*(const char*)>& getenv_fn);
const std::vector<std::string>& setting_keys();

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const;
};

// One row per (trial, sweep point) for the attack experiments.
struct TrialRow {
  std::string experiment;
  std::string variant;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t d = 0;
  std::size_t d_model = 0;
  std::size_t k = 0;
  std::size_t t = 0;  // 0: all-K
  std::size_t delta = 0;
  std::size_t batch_size = 0;
  std::string sweep;
  std::size_t samples = 0;
  std::size_t rank = 0;
  std::size_t k_discovered = 0;
  bool success = false;
  std::size_t stage1_queries = 0;
  std::size_t stage2_queries = 0;
  std::size_t total_queries = 0;
  std::size_t detections = 0;
  std::size_t misclassified = 0;
  double wall_ms = 0.0;
};

CsvTable trial_table(const std::vector<TrialRow>& rows);

struct ExperimentResult {
  std::string csv;
  std::string summary;
  std::string csv_path;  // empty when no file was written
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// --- trial building blocks shared with the acceptance suite ---

TlgConfig make_tlg_config(std::size_t d_ffn, std::size_t d_model,
                          std::size_t k, SamplingStrategy sampling,
                          const FieldModulus& m,
                          NoiseMode noise = NoiseMode::kPrecomputed);

struct TlgTrial {
  AttackReport report;
  bool completed = false;
  std::string error;
  std::uint64_t victim_queries = 0;  // as counted by the victim
};

// Builds a victim from `seed`, attacks it, scores against ground truth.
// Attack errors are captured in `error`, not thrown.
TlgTrial run_tlg_trial(const TlgConfig& config, std::uint64_t seed,
                       const AttackOptions& options);

struct SoterTrial {
  std::optional<FingerprintFilter> filter;
  bool recovered = false;  // dim == K and same subspace as the truth
  std::size_t sets = 0;
  std::size_t observed_batches = 0;
  // Results the attacker altered while observing; passive means zero.
  std::size_t modified_during_observation = 0;
  BypassOutcome bypass;
  std::optional<BypassOutcome> control;
  bool completed = false;
  std::string error;
  double recover_ms = 0.0;
};

// Passive collection over the planned number of sets (or `n_sets`), then
// `bypass_batches` of genuine-only tampering and, optionally, as many
// batches of the tamper-everything control on the same service.
SoterTrial run_soter_trial(const SoterConfig& config, std::uint64_t seed,
                           std::size_t delta, std::size_t bypass_batches,
                           std::optional<std::size_t> n_sets,
                           bool with_control);

struct SubsetTrial {
  std::size_t required_samples = 0;
  bool success = false;
  std::string error;
};

// TLG: zero queries until the observed rank reaches K, then Stage 2.
SubsetTrial run_tlg_subset_trial(std::size_t d_ffn, std::size_t d_model,
                                 std::size_t k, SamplingStrategy sampling,
                                 const FieldModulus& m, std::uint64_t seed);
// Soter: batches per set until the intersection reaches dimension K, then
// a short bypass run.
SubsetTrial run_soter_subset_trial(std::size_t d, std::size_t k,
                                   std::size_t batch_size,
                                   SamplingStrategy sampling,
                                   const FieldModulus& m, std::uint64_t seed,
                                   std::size_t bypass_batches);

struct TimingPoint {
  double x = 0.0;
  double mean_ms = 0.0;
  std::size_t successes = 0;
  std::size_t trials = 0;
};

// Mean known-K attack time per sweep point (same seeds at every point).
std::vector<TimingPoint> time_k_sweep(std::size_t d, std::size_t d_model,
                                      const std::vector<std::size_t>& ks,
                                      std::size_t delta, std::size_t trials,
                                      const FieldModulus& m,
                                      std::uint64_t seed);
// d_model = d / 2 at every point.
std::vector<TimingPoint> time_dim_sweep(const std::vector<std::size_t>& dims,
                                        std::size_t k, std::size_t delta,
                                        std::size_t trials,
                                        const FieldModulus& m,
                                        std::uint64_t seed);

struct RankProbResult {
  std::uint64_t p = 0;
  unsigned k = 0;
  RankDeficiency formula;
  std::optional<std::uint64_t> enumerated_singular;  // over all p^(k^2)
  std::uint64_t enumerated_total = 0;
  std::uint64_t mc_trials = 0;
  std::uint64_t mc_singular = 0;
};

// trials == 0: formula plus exhaustive enumeration when p^(k^2) <= 2^22.
// trials > 0: also a Monte-Carlo singularity count.
RankProbResult rank_prob(std::uint64_t p, unsigned k, std::uint64_t trials,
                         std::uint64_t seed);

}  // namespace bb
