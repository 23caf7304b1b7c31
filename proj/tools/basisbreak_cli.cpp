#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "basisbreak/acceptance.hpp"
#include "basisbreak/errors.hpp"
#include "basisbreak/experiments.hpp"

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

const FlagSpec kValueFlags[] = {
    {"--d", "d", "ambient dimension (d_ffn for TLG, d for Soter)"},
    {"--d-model", "d_model", "TLG hidden dim / Soter output dim (default d/2)"},
    {"--k", "k", "noise basis size K"},
    {"--t", "t", "SubsetT size (omit for all-K sampling)"},
    {"--delta", "delta", "extra Stage-1 samples"},
    {"--batch-size", "batch_size", "genuine activations per Soter batch"},
    {"--trials", "trials", "trials per sweep point"},
    {"--seed", "seed", "root seed"},
    {"--modulus,--p", "modulus", "prime field modulus"},
    {"--out", "out", "CSV output directory (empty: no file)"},
    {"--window", "window", "rank stability window"},
    {"--model", "model", "model zoo entry for --full-scale"},
    {"--m-tee-mib", "m_tee_mib", "TEE memory for cost-table (MiB)"},
    {"--noise", "noise", "TLG noise: precomputed | otf"},
    {"--bypass-batches", "bypass_batches", "tampered batches per Soter trial"},
    {"--sets", "sets", "observation sets (default: planner)"},
    {"--sweep", "sweep", "comma-separated sweep points"},
};

const FlagSpec kBoolFlags[] = {
    {"--full-scale", "full_scale", "attack-tlg at a model-zoo width"},
    {"--fresh-fingerprints", "fresh_fingerprints", "Soter test double with fresh challenges"},
    {"--discover", "discover", "attack-tlg discovers K instead of using --k"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"basisbreak: static-noise-basis attack lab"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "flat key = value config file");

  std::map<std::string, std::string> values;
  std::map<std::string, bool> bools;
  for (const auto& f : kValueFlags) {
    app.add_option_function<std::string>(
        f.flag, [&values, key = f.key](const std::string& v) { values[key] = v; },
        f.help);
  }
  for (const auto& f : kBoolFlags) {
    app.add_flag_function(
        f.flag, [&bools, key = f.key](std::int64_t n) { bools[key] = n > 0; },
        f.help);
  }

  std::vector<CLI::App*> subs;
  for (const auto& name : bb::experiment_names()) {
    subs.push_back(app.add_subcommand(name, "run the " + name + " experiment"));
  }
  CLI::App* acc = app.add_subcommand("acceptance", "run the acceptance criteria");
  std::vector<int> only;
  std::string fault = "none";
  acc->add_option("--only", only, "criterion ids to run")->delimiter(',');
  acc->add_option("--fault", fault, "none | corrupt-intersection");

  CLI11_PARSE(app, argc, argv);

  try {
    bb::ExperimentConfig cfg;
    if (!config_path.empty()) bb::load_config_file(cfg, config_path);
    bb::apply_env(cfg, [](const char* n) { return std::getenv(n); });
    for (const auto& [k, v] : values) bb::apply_setting(cfg, k, v);
    for (const auto& [k, v] : bools) bb::apply_setting(cfg, k, v ? "1" : "0");

    if (acc->parsed()) {
      bb::AcceptanceOptions opt;
      opt.seed = cfg.seed;
      opt.only = only;
      if (fault == "corrupt-intersection") {
        opt.fault = bb::Fault::kCorruptIntersection;
      } else if (fault != "none") {
        throw bb::ConfigError("unknown fault: " + fault);
      }
      const auto results = bb::run_acceptance(opt, &std::cout);
      const bool ok = bb::all_passed(results);
      std::cout << (ok ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << "\n";
      return ok ? 0 : 1;
    }
    for (CLI::App* s : subs) {
      if (s->parsed()) cfg.experiment = bb::parse_experiment(s->get_name());
    }
    const bb::ExperimentResult res = bb::run_experiment(cfg);
    std::cout << res.summary << "\n";
    if (!res.csv_path.empty()) std::cout << "wrote " << res.csv_path << "\n";
    return 0;
  } catch (const bb::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
