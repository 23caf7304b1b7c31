#include "basisbreak/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "basisbreak/cost_model.hpp"
#include "basisbreak/errors.hpp"
#include "basisbreak/fit.hpp"

namespace bb {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

const std::vector<std::pair<Experiment, std::string>>& experiment_table() {
  static const std::vector<std::pair<Experiment, std::string>> t = {
      {Experiment::kDiscoverKTlg, "discover-k-tlg"},
      {Experiment::kDiscoverKSoter, "discover-k-soter"},
      {Experiment::kThreshold, "threshold"},
      {Experiment::kAttackTlg, "attack-tlg"},
      {Experiment::kAttackSoter, "attack-soter"},
      {Experiment::kSubsetSweep, "subset-sweep"},
      {Experiment::kKSweep, "k-sweep"},
      {Experiment::kDimSweep, "dim-sweep"},
      {Experiment::kCostTable, "cost-table"},
      {Experiment::kRankProb, "rank-prob"},
  };
  return t;
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return key;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError("invalid value for " + key + ": '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid value for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

std::vector<std::size_t> parse_list(const std::string& key,
                                    const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<std::size_t>(parse_u64(key, trim(item))));
  }
  return out;
}

std::string fmt_ms(double ms) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << ms;
  return os.str();
}

std::string fmt_double(double x, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << x;
  return os.str();
}

SamplingStrategy sampling_of(const ExperimentConfig& cfg) {
  return cfg.t ? SamplingStrategy::subset(*cfg.t) : SamplingStrategy::all_k();
}

std::string noise_name(NoiseMode n) {
  switch (n) {
    case NoiseMode::kPrecomputed: return "precomputed";
    case NoiseMode::kOnTheFly: return "otf";
    case NoiseMode::kZero: return "zero";
  }
  return "?";
}

TrialRow base_row(const ExperimentConfig& cfg, std::size_t trial,
                  std::uint64_t seed) {
  TrialRow r;
  r.experiment = experiment_name(cfg.experiment);
  r.trial = trial;
  r.seed = seed;
  r.d = cfg.d;
  r.d_model = cfg.effective_d_model();
  r.k = cfg.k;
  r.t = cfg.t.value_or(0);
  r.delta = cfg.delta;
  r.batch_size = cfg.batch_size;
  return r;
}

}  // namespace

Experiment parse_experiment(const std::string& name) {
  for (const auto& [e, n] : experiment_table()) {
    if (n == name) return e;
  }
  throw ConfigError("unknown experiment: " + name);
}

std::string experiment_name(Experiment e) {
  for (const auto& [x, n] : experiment_table()) {
    if (x == e) return n;
  }
  return "?";
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& p : experiment_table()) v.push_back(p.second);
    return v;
  }();
  return names;
}

void ExperimentConfig::validate() const {
  if (trials < 1 && experiment != Experiment::kRankProb) {
    throw ConfigError("trials must be >= 1");
  }
  if (!is_prime_u64(modulus)) {
    throw ConfigError("modulus " + std::to_string(modulus) + " is not prime");
  }
  if (experiment == Experiment::kCostTable || experiment == Experiment::kRankProb) {
    return;
  }
  if (d < 1) throw ConfigError("d must be >= 1");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (k > d) throw ConfigError("k must not exceed d");
  if (t && (*t < 1 || *t > k)) throw ConfigError("t must lie in [1, k]");
  if (effective_d_model() < 1) throw ConfigError("d_model must be >= 1");
}

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = {
      "experiment", "d",          "d_model",      "k",
      "t",          "delta",      "batch_size",   "trials",
      "seed",       "modulus",    "p",            "out",
      "window",     "full_scale", "model",        "m_tee_mib",
      "noise",      "fresh_fingerprints",         "discover",
      "bypass_batches",           "sets",         "sweep"};
  return keys;
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key,
                   const std::string& raw_value) {
  const std::string key = normalize_key(trim(raw_key));
  const std::string v = trim(raw_value);
  if (key == "experiment") cfg.experiment = parse_experiment(v);
  else if (key == "d") cfg.d = parse_u64(key, v);
  else if (key == "d_model") cfg.d_model = parse_u64(key, v);
  else if (key == "k") cfg.k = parse_u64(key, v);
  else if (key == "t") {
    if (v.empty() || v == "all") cfg.t.reset();
    else cfg.t = parse_u64(key, v);
  } else if (key == "delta") cfg.delta = parse_u64(key, v);
  else if (key == "batch_size") cfg.batch_size = parse_u64(key, v);
  else if (key == "trials") cfg.trials = parse_u64(key, v);
  else if (key == "seed") cfg.seed = parse_u64(key, v);
  else if (key == "modulus" || key == "p") cfg.modulus = parse_u64(key, v);
  else if (key == "out") cfg.out = v;
  else if (key == "window") cfg.window = parse_u64(key, v);
  else if (key == "full_scale") cfg.full_scale = parse_bool(key, v);
  else if (key == "model") cfg.model = v;
  else if (key == "m_tee_mib") cfg.m_tee_mib = parse_double(key, v);
  else if (key == "noise") {
    if (v == "precomputed") cfg.noise = NoiseMode::kPrecomputed;
    else if (v == "otf" || v == "on-the-fly") cfg.noise = NoiseMode::kOnTheFly;
    else throw ConfigError("noise must be 'precomputed' or 'otf'");
  } else if (key == "fresh_fingerprints") cfg.fresh_fingerprints = parse_bool(key, v);
  else if (key == "discover") cfg.discover = parse_bool(key, v);
  else if (key == "bypass_batches") cfg.bypass_batches = parse_u64(key, v);
  else if (key == "sets") cfg.sets = parse_u64(key, v);
  else if (key == "sweep") cfg.sweep = parse_list(key, v);
  else throw ConfigError("unknown setting: " + raw_key);
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_env(ExperimentConfig& cfg,
               const std::function<const char*(const char*)>& getenv_fn) {
  for (const auto& key : setting_keys()) {
    std::string var = "BASISBREAK_" + key;
    std::transform(var.begin(), var.end(), var.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (const char* v = getenv_fn(var.c_str())) apply_setting(cfg, key, v);
  }
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

CsvTable trial_table(const std::vector<TrialRow>& rows) {
  CsvTable t;
  t.header = {"experiment", "variant",       "trial",          "seed",
              "d",          "d_model",       "k",              "t",
              "delta",      "batch_size",    "sweep",          "samples",
              "rank",       "k_discovered",  "success",        "stage1_queries",
              "stage2_queries",              "total_queries",  "detections",
              "misclassified",               "wall_ms"};
  for (const auto& r : rows) {
    t.rows.push_back({r.experiment,
                      r.variant,
                      std::to_string(r.trial),
                      std::to_string(r.seed),
                      std::to_string(r.d),
                      std::to_string(r.d_model),
                      std::to_string(r.k),
                      std::to_string(r.t),
                      std::to_string(r.delta),
                      std::to_string(r.batch_size),
                      r.sweep,
                      std::to_string(r.samples),
                      std::to_string(r.rank),
                      std::to_string(r.k_discovered),
                      r.success ? "1" : "0",
                      std::to_string(r.stage1_queries),
                      std::to_string(r.stage2_queries),
                      std::to_string(r.total_queries),
                      std::to_string(r.detections),
                      std::to_string(r.misclassified),
                      fmt_ms(r.wall_ms)});
  }
  return t;
}

TlgConfig make_tlg_config(std::size_t d_ffn, std::size_t d_model,
                          std::size_t k, SamplingStrategy sampling,
                          const FieldModulus& m, NoiseMode noise) {
  TlgConfig c;
  c.d_ffn = d_ffn;
  c.d_model = d_model;
  c.k = k;
  c.sampling = sampling;
  c.modulus = m;
  c.noise = noise;
  return c;
}

TlgTrial run_tlg_trial(const TlgConfig& config, std::uint64_t seed,
                       const AttackOptions& options) {
  TlgVictim victim(config, seed);
  TlgTrial out;
  try {
    out.report = full_layer_attack(victim, options);
    out.completed = true;
    score_attack(out.report, victim.ground_truth());
  } catch (const Error& e) {
    out.error = e.what();
  }
  out.victim_queries = victim.queries_issued();
  return out;
}

SoterTrial run_soter_trial(const SoterConfig& config, std::uint64_t seed,
                           std::size_t delta, std::size_t bypass_batches,
                           std::optional<std::size_t> n_sets,
                           bool with_control) {
  SoterService service(config, seed);
  SoterTrial out;
  out.sets = n_sets ? *n_sets
                    : plan_set_count(config.d, config.k, config.batch_size,
                                     delta, config.fingerprints_per_batch)
                          .value_or(2);
  const auto t0 = Clock::now();
  try {
    const std::vector<ObservationSet> sets =
        collect_sets(passive_observer(service), config.modulus, config.d,
                     config.k, delta, out.sets);
    out.filter = recover_fingerprint_subspace(sets);
  } catch (const Error& e) {
    out.error = e.what();
    out.observed_batches = service.batches_served();
    return out;
  }
  out.recover_ms = ms_since(t0);
  out.observed_batches = service.batches_served();
  out.modified_during_observation = service.modified_results();
  out.recovered =
      out.filter->dim == config.k &&
      same_subspace(out.filter->v_c, service.state().cornerstone_span());
  out.bypass = run_bypass(service, out.filter, additive_tamper, bypass_batches,
                          TamperTarget::kGenuine);
  if (with_control) {
    out.control = run_bypass(service, out.filter, additive_tamper,
                             bypass_batches, TamperTarget::kFingerprint);
  }
  out.completed = true;
  return out;
}

SubsetTrial run_tlg_subset_trial(std::size_t d_ffn, std::size_t d_model,
                                 std::size_t k, SamplingStrategy sampling,
                                 const FieldModulus& m, std::uint64_t seed) {
  TlgVictim victim(make_tlg_config(d_ffn, d_model, k, sampling, m), seed);
  QueryOracle enc = encrypt_oracle(victim);
  SubsetTrial out;
  try {
    NoiseSubspaceProfile profile = observe_noise(enc, m, d_ffn, 0);
    extend_until_rank(enc, profile, k, 4 * d_ffn + 64);
    out.required_samples = profile.queries_used;
    const RecoveredPermutation rho = recover_permutation(enc, profile, d_ffn);
    const TlgLayerSecrets& truth = victim.ground_truth();
    out.success = rho.exact() && rho.as_permutation() == truth.rho &&
                  recover_weights(rho, victim.locked_weights().w3) ==
                      truth.weights.w3;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

SubsetTrial run_soter_subset_trial(std::size_t d, std::size_t k,
                                   std::size_t batch_size,
                                   SamplingStrategy sampling,
                                   const FieldModulus& m, std::uint64_t seed,
                                   std::size_t bypass_batches) {
  SoterConfig cfg;
  cfg.d = d;
  cfg.d_out = std::min<std::size_t>(d, 64);
  cfg.k = k;
  cfg.batch_size = batch_size;
  cfg.sampling = sampling;
  cfg.modulus = m;
  SoterService service(cfg, seed);
  SubsetTrial out;
  try {
    const AdaptiveRecovery rec = recover_adaptive(
        passive_observer(service), m, d, k, d / (batch_size + 1) + 1);
    out.required_samples = rec.batches_per_set;
    const bool same =
        rec.filter.dim == k &&
        same_subspace(rec.filter.v_c, service.state().cornerstone_span());
    const BypassOutcome b = run_bypass(service, rec.filter, additive_tamper,
                                       bypass_batches, TamperTarget::kGenuine);
    out.success = same && b.bypassed(batch_size);
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

namespace {

struct SweepTrial {
  std::size_t point = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  TlgTrial result;
};

std::vector<SweepTrial> run_timing_sweep(
    const std::vector<std::pair<std::size_t, TlgConfig>>& points,
    std::size_t delta, std::size_t trials, std::uint64_t seed) {
  std::vector<SweepTrial> out;
  for (const auto& [x, cfg] : points) {
    AttackOptions opt;
    opt.k_known = cfg.k;
    opt.delta = delta;
    for (std::size_t i = 0; i < trials; ++i) {
      SweepTrial st;
      st.point = x;
      st.trial = i;
      st.seed = derive_seed(seed, i);
      st.result = run_tlg_trial(cfg, st.seed, opt);
      out.push_back(std::move(st));
    }
  }
  return out;
}

std::vector<TimingPoint> aggregate(const std::vector<SweepTrial>& trials) {
  std::vector<TimingPoint> pts;
  for (const auto& t : trials) {
    if (pts.empty() || pts.back().x != static_cast<double>(t.point)) {
      pts.push_back({static_cast<double>(t.point), 0.0, 0, 0});
    }
    TimingPoint& p = pts.back();
    p.mean_ms += t.result.report.total_ms;
    p.successes += t.result.report.success ? 1 : 0;
    ++p.trials;
  }
  for (auto& p : pts) p.mean_ms /= static_cast<double>(p.trials);
  return pts;
}

std::vector<std::pair<std::size_t, TlgConfig>> k_points(
    std::size_t d, std::size_t d_model, const std::vector<std::size_t>& ks,
    const FieldModulus& m) {
  std::vector<std::pair<std::size_t, TlgConfig>> pts;
  for (std::size_t k : ks) {
    pts.emplace_back(k, make_tlg_config(d, d_model, k, SamplingStrategy::all_k(), m));
  }
  return pts;
}

std::vector<std::pair<std::size_t, TlgConfig>> dim_points(
    const std::vector<std::size_t>& dims, std::size_t k, const FieldModulus& m) {
  std::vector<std::pair<std::size_t, TlgConfig>> pts;
  for (std::size_t d : dims) {
    pts.emplace_back(d, make_tlg_config(d, d / 2, k, SamplingStrategy::all_k(), m));
  }
  return pts;
}

}  // namespace

std::vector<TimingPoint> time_k_sweep(std::size_t d, std::size_t d_model,
                                      const std::vector<std::size_t>& ks,
                                      std::size_t delta, std::size_t trials,
                                      const FieldModulus& m,
                                      std::uint64_t seed) {
  return aggregate(run_timing_sweep(k_points(d, d_model, ks, m), delta, trials, seed));
}

std::vector<TimingPoint> time_dim_sweep(const std::vector<std::size_t>& dims,
                                        std::size_t k, std::size_t delta,
                                        std::size_t trials,
                                        const FieldModulus& m,
                                        std::uint64_t seed) {
  return aggregate(run_timing_sweep(dim_points(dims, k, m), delta, trials, seed));
}

RankProbResult rank_prob(std::uint64_t p, unsigned k, std::uint64_t trials,
                         std::uint64_t seed) {
  const FieldModulus m(p);
  RankProbResult r;
  r.p = p;
  r.k = k;
  r.formula = rank_deficiency_probability(k, p);

  // p^(k^2) with an overflow guard.
  std::uint64_t total = 1;
  bool small = true;
  for (unsigned i = 0; i < k * k && small; ++i) {
    if (total > (std::uint64_t{1} << 22) / p) small = false;
    total *= p;
  }
  if (small && k > 0) {
    std::uint64_t singular = 0;
    FieldMatrix mat(m, k, k);
    for (std::uint64_t code = 0; code < total; ++code) {
      std::uint64_t c = code;
      for (unsigned i = 0; i < k * k; ++i) {
        mat.set(i / k, i % k, c % p);
        c /= p;
      }
      if (rank(mat) < k) ++singular;
    }
    r.enumerated_singular = singular;
    r.enumerated_total = total;
  }
  if (trials > 0) {
    SeededRng rng(seed);
    for (std::uint64_t t = 0; t < trials; ++t) {
      if (rank(random_matrix(k, k, m, rng)) < k) ++r.mc_singular;
    }
    r.mc_trials = trials;
  }
  return r;
}

namespace {

std::string run_discover_tlg(const ExperimentConfig& cfg,
                             std::vector<TrialRow>& rows) {
  const FieldModulus m(cfg.modulus);
  const std::size_t window = cfg.window ? cfg.window : 20;
  std::size_t hits = 0, inconclusive = 0;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, i);
    const auto t0 = Clock::now();
    TlgConfig tc = make_tlg_config(cfg.d, cfg.effective_d_model(), cfg.k,
                                   sampling_of(cfg), m, cfg.noise);
    tc.encrypt_only = true;
    TlgVictim victim(tc, seed);
    const KDiscovery disc = scan_rank_growth(encrypt_oracle(victim), m, cfg.d,
                                             window, 4 * cfg.d + 64);
    const double ms = ms_since(t0);
    if (!disc.conclusive) ++inconclusive;
    if (disc.conclusive && disc.k == cfg.k) ++hits;
    for (std::size_t s = 0; s < disc.rank_trace.size(); ++s) {
      TrialRow r = base_row(cfg, i, seed);
      r.variant = noise_name(cfg.noise);
      r.samples = s + 1;
      r.rank = disc.rank_trace[s];
      r.k_discovered = disc.k;
      r.success = disc.conclusive && disc.k == cfg.k;
      r.stage1_queries = disc.queries;
      r.total_queries = disc.queries;
      r.wall_ms = ms;
      rows.push_back(r);
    }
  }
  std::ostringstream os;
  os << "discover-k-tlg: K=" << cfg.k << " found in " << hits << "/"
     << cfg.trials << " trials, inconclusive " << inconclusive;
  return os.str();
}

std::string run_discover_soter(const ExperimentConfig& cfg,
                               std::vector<TrialRow>& rows) {
  const FieldModulus m(cfg.modulus);
  const std::size_t window = cfg.window ? cfg.window : 5;
  std::size_t hits = 0, inconclusive = 0;
  double changepoints = 0;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, i);
    const auto t0 = Clock::now();
    SoterConfig sc;
    sc.d = cfg.d;
    sc.d_out = cfg.effective_d_model();
    sc.k = cfg.k;
    sc.batch_size = cfg.batch_size;
    sc.sampling = sampling_of(cfg);
    sc.modulus = m;
    sc.fresh_fingerprints = cfg.fresh_fingerprints;
    SoterService service(sc, seed);
    const HiddenKDiscovery disc = scan_hidden_rank_growth(
        passive_observer(service), m, cfg.d, cfg.batch_size, cfg.d, window);
    const double ms = ms_since(t0);
    if (!disc.conclusive) ++inconclusive;
    if (disc.conclusive && disc.k == cfg.k) {
      ++hits;
      changepoints += static_cast<double>(disc.changepoint);
    }
    for (std::size_t s = 0; s < disc.rank_trace.size(); ++s) {
      TrialRow r = base_row(cfg, i, seed);
      r.variant = cfg.fresh_fingerprints ? "fresh" : "static";
      r.sweep = std::to_string(disc.changepoint);
      r.samples = s + 1;
      r.rank = disc.rank_trace[s];
      r.k_discovered = disc.k;
      r.success = disc.conclusive && disc.k == cfg.k;
      r.wall_ms = ms;
      rows.push_back(r);
    }
  }
  std::ostringstream os;
  os << "discover-k-soter: K=" << cfg.k << " found in " << hits << "/"
     << cfg.trials << " trials, inconclusive " << inconclusive;
  if (hits) os << ", mean changepoint " << changepoints / static_cast<double>(hits);
  return os.str();
}

std::string run_threshold(const ExperimentConfig& cfg,
                          std::vector<TrialRow>& rows) {
  const FieldModulus m(cfg.modulus);
  std::vector<std::size_t> points = cfg.sweep;
  if (points.empty()) {
    for (std::size_t s = 1; s <= cfg.k + cfg.delta; ++s) points.push_back(s);
  }
  const TlgConfig tc = make_tlg_config(cfg.d, cfg.effective_d_model(), cfg.k,
                                       sampling_of(cfg), m, cfg.noise);
  std::map<std::size_t, std::size_t> wins;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, i);
    for (std::size_t s : points) {
      AttackOptions opt;
      opt.k_known = cfg.k;
      opt.delta = cfg.delta;
      opt.stage1_queries = s;
      const TlgTrial t = run_tlg_trial(tc, seed, opt);
      TrialRow r = base_row(cfg, i, seed);
      r.variant = "rho+pi_next";
      r.sweep = std::to_string(s);
      r.samples = s;
      r.rank = t.report.rho.rank;
      r.success = t.report.success;
      r.stage1_queries = s;
      r.stage2_queries = t.report.rho.stage2_queries;
      r.total_queries = t.victim_queries;
      r.wall_ms = t.report.total_ms;
      rows.push_back(r);
      wins[s] += t.report.success ? 1 : 0;
    }
  }
  std::ostringstream os;
  os << "threshold: success by Stage-1 samples";
  for (const auto& [s, w] : wins) os << "  " << s << ":" << w << "/" << cfg.trials;
  return os.str();
}

std::string run_attack_tlg(const ExperimentConfig& cfg,
                           std::vector<TrialRow>& rows) {
  const FieldModulus m(cfg.modulus);
  TlgConfig tc = make_tlg_config(cfg.d, cfg.effective_d_model(), cfg.k,
                                 sampling_of(cfg), m, cfg.noise);
  AttackOptions opt;
  if (!cfg.discover) opt.k_known = cfg.k;
  opt.delta = cfg.delta;
  if (cfg.window) opt.stability_window = cfg.window;
  if (cfg.full_scale) {
    const ModelShape& shape = find_model(cfg.model);
    tc.d_ffn = shape.d_in;
    tc.d_model = 2;
    tc.encrypt_only = true;
    opt.recover_pi_next = false;
  }
  std::size_t wins = 0;
  double total_ms = 0;
  std::string last_error;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, i);
    const TlgTrial t = run_tlg_trial(tc, seed, opt);
    TrialRow r = base_row(cfg, i, seed);
    r.d = tc.d_ffn;
    r.d_model = cfg.full_scale ? 0 : tc.d_model;
    r.variant = cfg.full_scale ? "full-scale:" + cfg.model : noise_name(cfg.noise);
    r.k_discovered = t.report.k_discovered;
    r.rank = t.report.rho.rank;
    r.success = t.report.success;
    r.stage1_queries = t.report.rho.stage1_queries + t.report.pi_next.stage1_queries;
    r.stage2_queries = t.report.rho.stage2_queries + t.report.pi_next.stage2_queries;
    r.samples = t.report.rho.discovery_queries;
    r.total_queries = t.victim_queries;
    r.wall_ms = t.report.total_ms;
    rows.push_back(r);
    wins += t.report.success ? 1 : 0;
    total_ms += t.report.total_ms;
    if (!t.error.empty()) last_error = t.error;
  }
  std::ostringstream os;
  os << "attack-tlg: d_ffn=" << tc.d_ffn << " K=" << cfg.k << " success "
     << wins << "/" << cfg.trials << ", mean attack time "
     << fmt_ms(total_ms / static_cast<double>(cfg.trials)) << " ms";
  if (!last_error.empty()) os << "\n  last error: " << last_error;
  return os.str();
}

std::string run_attack_soter(const ExperimentConfig& cfg,
                             std::vector<TrialRow>& rows) {
  const FieldModulus m(cfg.modulus);
  SoterConfig sc;
  sc.d = cfg.d;
  sc.d_out = cfg.effective_d_model();
  sc.k = cfg.k;
  sc.batch_size = cfg.batch_size;
  sc.sampling = sampling_of(cfg);
  sc.modulus = m;
  sc.fresh_fingerprints = cfg.fresh_fingerprints;
  std::size_t wins = 0, detections = 0, control_aborts = 0, batches = 0;
  std::string last_error;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, i);
    const auto t0 = Clock::now();
    const SoterTrial t =
        run_soter_trial(sc, seed, cfg.delta, cfg.bypass_batches, cfg.sets, true);
    const double ms = ms_since(t0);
    const bool ok = t.completed && t.recovered && t.bypass.bypassed(cfg.batch_size);
    TrialRow r = base_row(cfg, i, seed);
    r.variant = "bypass";
    r.sweep = std::to_string(t.sets);
    r.samples = t.observed_batches;
    r.rank = t.filter ? t.filter->dim : 0;
    r.success = ok;
    r.detections = t.bypass.detections;
    r.misclassified = t.bypass.misclassified;
    r.wall_ms = ms;
    rows.push_back(r);
    if (t.control) {
      TrialRow c = r;
      c.variant = "control";
      c.success = t.control->detections == t.control->batches_processed;
      c.detections = t.control->detections;
      c.misclassified = t.control->misclassified;
      rows.push_back(c);
      control_aborts += t.control->detections;
    }
    wins += ok ? 1 : 0;
    detections += t.bypass.detections;
    batches += t.bypass.batches_processed;
    if (!t.error.empty()) last_error = t.error;
  }
  std::ostringstream os;
  os << "attack-soter: bypass success " << wins << "/" << cfg.trials
     << ", detections " << detections << " over " << batches
     << " tampered batches, control aborts " << control_aborts;
  if (!last_error.empty()) os << "\n  last error: " << last_error;
  return os.str();
}

std::string run_subset_sweep(const ExperimentConfig& cfg,
                             std::vector<TrialRow>& rows) {
  const FieldModulus m(cfg.modulus);
  std::vector<std::size_t> ts = cfg.sweep;
  if (ts.empty()) ts = cfg.t ? std::vector<std::size_t>{*cfg.t}
                             : std::vector<std::size_t>{2, 3, 5, 8};
  std::ostringstream os;
  os << "subset-sweep: mean required samples (success)";
  // The Soter side runs at twice the TLG width with B = 2 so that growing
  // sets stay clear of ambient saturation at small T.
  const std::size_t soter_d = 2 * cfg.d;
  const std::size_t soter_b = 2;
  for (std::size_t t : ts) {
    const SamplingStrategy s = SamplingStrategy::subset(t);
    double tlg_sum = 0, soter_sum = 0;
    std::size_t tlg_ok = 0, soter_ok = 0;
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      const std::uint64_t seed = derive_seed(cfg.seed, i);
      auto t0 = Clock::now();
      const SubsetTrial a = run_tlg_subset_trial(cfg.d, cfg.effective_d_model(),
                                                 cfg.k, s, m, seed);
      TrialRow r = base_row(cfg, i, seed);
      r.t = t;
      r.variant = "tlg";
      r.sweep = std::to_string(t);
      r.samples = a.required_samples;
      r.success = a.success;
      r.stage1_queries = a.required_samples;
      r.wall_ms = ms_since(t0);
      rows.push_back(r);
      tlg_sum += static_cast<double>(a.required_samples);
      tlg_ok += a.success ? 1 : 0;

      t0 = Clock::now();
      const SubsetTrial b =
          run_soter_subset_trial(soter_d, cfg.k, soter_b, s, m, seed, 20);
      TrialRow q = base_row(cfg, i, seed);
      q.t = t;
      q.d = soter_d;
      q.d_model = 0;
      q.batch_size = soter_b;
      q.variant = "soter";
      q.sweep = std::to_string(t);
      q.samples = b.required_samples;
      q.success = b.success;
      q.wall_ms = ms_since(t0);
      rows.push_back(q);
      soter_sum += static_cast<double>(b.required_samples);
      soter_ok += b.success ? 1 : 0;
    }
    const double n = static_cast<double>(cfg.trials);
    os << "\n  T=" << t << "  tlg " << fmt_double(tlg_sum / n, 4) << " ("
       << tlg_ok << "/" << cfg.trials << ")  soter "
       << fmt_double(soter_sum / n, 4) << " (" << soter_ok << "/"
       << cfg.trials << ")";
  }
  return os.str();
}

std::string run_timing(const ExperimentConfig& cfg, std::vector<TrialRow>& rows,
                       bool k_sweep) {
  const FieldModulus m(cfg.modulus);
  std::vector<std::size_t> points = cfg.sweep;
  if (points.empty()) {
    points = k_sweep ? std::vector<std::size_t>{4, 8, 16, 32}
                     : std::vector<std::size_t>{64, 128, 256, 512};
  }
  const auto trials = run_timing_sweep(
      k_sweep ? k_points(cfg.d, cfg.effective_d_model(), points, m)
              : dim_points(points, cfg.k, m),
      cfg.delta, cfg.trials, cfg.seed);
  for (const auto& t : trials) {
    TrialRow r = base_row(cfg, t.trial, t.seed);
    if (k_sweep) {
      r.k = t.point;
    } else {
      r.d = t.point;
      r.d_model = t.point / 2;
    }
    r.variant = k_sweep ? "k" : "d";
    r.sweep = std::to_string(t.point);
    r.rank = t.result.report.rho.rank;
    r.success = t.result.report.success;
    r.stage1_queries = t.result.report.rho.stage1_queries + t.result.report.pi_next.stage1_queries;
    r.stage2_queries = t.result.report.rho.stage2_queries + t.result.report.pi_next.stage2_queries;
    r.total_queries = t.result.victim_queries;
    r.wall_ms = t.result.report.total_ms;
    rows.push_back(r);
  }
  const auto pts = aggregate(trials);
  std::vector<double> xs, ys;
  std::ostringstream os;
  os << (k_sweep ? "k-sweep" : "dim-sweep") << ": mean attack ms";
  for (const auto& p : pts) {
    xs.push_back(p.x);
    ys.push_back(p.mean_ms);
    os << "  " << p.x << ":" << fmt_ms(p.mean_ms) << " (" << p.successes << "/"
       << p.trials << ")";
  }
  if (xs.size() >= 3) {
    const PolyFit f = fit_polynomial(xs, ys, k_sweep ? 1 : 2);
    os << "\n  degree-" << (k_sweep ? 1 : 2) << " fit R^2 = "
       << fmt_double(f.r2, 5) << ", monotone = "
       << (strictly_increasing(ys) ? "yes" : "no");
  }
  return os.str();
}

std::string run_rank_prob(const ExperimentConfig& cfg, std::string& csv) {
  const RankProbResult r = rank_prob(cfg.modulus, static_cast<unsigned>(cfg.k),
                                     cfg.trials, cfg.seed);
  std::ostringstream out;
  out << "p,k,mode,trials,singular,estimate,exact_num,exact_den\n";
  out << r.p << ',' << r.k << ",formula,0,0," << fmt_double(r.formula.value, 12)
      << ',' << (r.formula.exact ? std::to_string(r.formula.exact->num) : "")
      << ',' << (r.formula.exact ? std::to_string(r.formula.exact->den) : "")
      << '\n';
  std::ostringstream os;
  os << "rank-prob: p=" << r.p << " k=" << r.k << " formula "
     << fmt_double(r.formula.value, 10);
  if (r.formula.exact) {
    os << " = " << r.formula.exact->num << "/" << r.formula.exact->den;
  }
  if (r.enumerated_singular) {
    out << r.p << ',' << r.k << ",enumeration," << r.enumerated_total << ','
        << *r.enumerated_singular << ','
        << fmt_double(static_cast<double>(*r.enumerated_singular) /
                          static_cast<double>(r.enumerated_total),
                      12)
        << ',' << *r.enumerated_singular << ',' << r.enumerated_total << '\n';
    os << ", enumeration " << *r.enumerated_singular << "/"
       << r.enumerated_total;
  }
  if (r.mc_trials) {
    const double rate =
        static_cast<double>(r.mc_singular) / static_cast<double>(r.mc_trials);
    out << r.p << ',' << r.k << ",monte_carlo," << r.mc_trials << ','
        << r.mc_singular << ',' << fmt_double(rate, 12) << ",,\n";
    os << ", Monte-Carlo " << r.mc_singular << "/" << r.mc_trials;
  }
  csv = out.str();
  return os.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  std::vector<TrialRow> rows;
  bool trial_schema = true;
  switch (cfg.experiment) {
    case Experiment::kDiscoverKTlg: res.summary = run_discover_tlg(cfg, rows); break;
    case Experiment::kDiscoverKSoter: res.summary = run_discover_soter(cfg, rows); break;
    case Experiment::kThreshold: res.summary = run_threshold(cfg, rows); break;
    case Experiment::kAttackTlg: res.summary = run_attack_tlg(cfg, rows); break;
    case Experiment::kAttackSoter: res.summary = run_attack_soter(cfg, rows); break;
    case Experiment::kSubsetSweep: res.summary = run_subset_sweep(cfg, rows); break;
    case Experiment::kKSweep: res.summary = run_timing(cfg, rows, true); break;
    case Experiment::kDimSweep: res.summary = run_timing(cfg, rows, false); break;
    case Experiment::kCostTable: {
      trial_schema = false;
      const HardwareProfile hw = calibrated_profile(cfg.m_tee_mib * kMiB);
      res.csv = cost_table_csv(model_zoo(), hw, cfg.k);
      res.summary = cost_table_text(model_zoo(), hw, cfg.k);
      break;
    }
    case Experiment::kRankProb:
      trial_schema = false;
      res.summary = run_rank_prob(cfg, res.csv);
      break;
  }
  if (trial_schema) res.csv = trial_table(rows).str();
  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    const std::filesystem::path path =
        std::filesystem::path(cfg.out) /
        (experiment_name(cfg.experiment) + "_" + std::to_string(cfg.seed) + ".csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << res.csv;
    res.csv_path = path.string();
  }
  return res;
}

}  // namespace bb
