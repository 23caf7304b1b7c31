#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "basisbreak/experiments.hpp"

namespace bb {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("basisbreak_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Drops the wall_ms column (the last one) from every line.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

TEST(ExperimentConfig, ExperimentNamesRoundTrip) {
  for (const auto& n : experiment_names()) {
    EXPECT_EQ(experiment_name(parse_experiment(n)), n);
  }
  EXPECT_THROW(parse_experiment("attack-everything"), ConfigError);
}

TEST(ExperimentConfig, SettingsAndErrors) {
  ExperimentConfig c;
  apply_setting(c, "batch-size", "7");
  apply_setting(c, "batch_size", "9");
  EXPECT_EQ(c.batch_size, 9u);
  apply_setting(c, "p", "65521");
  EXPECT_EQ(c.modulus, 65521u);
  apply_setting(c, "t", "3");
  EXPECT_EQ(c.t, 3u);
  EXPECT_THROW(apply_setting(c, "no-such-key", "1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "trials", "many"), ConfigError);
  EXPECT_THROW(apply_setting(c, "trials", "-1"), ConfigError);
  for (const auto& key : setting_keys()) {
    EXPECT_EQ(key.find('-'), std::string::npos) << key;
  }
}

TEST(ExperimentConfig, ValidationRejectsInconsistentValues) {
  ExperimentConfig c;
  c.k = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ExperimentConfig{};
  c.t = c.k + 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ExperimentConfig{};
  c.modulus = 91;  // 7 * 13
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(ExperimentConfig{}.validate());
}

TEST(ExperimentConfig, FileThenEnvPrecedence) {
  const fs::path dir = scratch_dir("config");
  const fs::path file = dir / "run.conf";
  {
    std::ofstream f(file);
    f << "# comment\n"
      << "trials = 3\n"
      << "k = 5   # trailing comment\n"
      << "\n"
      << "delta=4\n";
  }
  ExperimentConfig c;
  load_config_file(c, file.string());
  EXPECT_EQ(c.trials, 3u);
  EXPECT_EQ(c.k, 5u);
  EXPECT_EQ(c.delta, 4u);

  const std::map<std::string, std::string> env = {
      {"BASISBREAK_TRIALS", "11"}, {"BASISBREAK_BATCH_SIZE", "2"}};
  apply_env(c, [&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  EXPECT_EQ(c.trials, 11u);  // env overrides the file
  EXPECT_EQ(c.batch_size, 2u);
  EXPECT_EQ(c.k, 5u);  // untouched by env

  EXPECT_THROW(load_config_file(c, (dir / "missing.conf").string()), ConfigError);
  {
    std::ofstream f(dir / "bad.conf");
    f << "no equals sign here\n";
  }
  EXPECT_THROW(load_config_file(c, (dir / "bad.conf").string()), ConfigError);
}

TEST(CsvTable, Formatting) {
  CsvTable t{{"a", "b"}, {{"1", "2"}, {"3", "4"}}};
  EXPECT_EQ(t.str(), "a,b\n1,2\n3,4\n");
  TrialRow r;
  r.experiment = "x";
  r.success = true;
  const auto parsed = parse_csv(trial_table({r}).str());
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0].size(), parsed[1].size());
  EXPECT_EQ(parsed[0].back(), "wall_ms");
}

TEST(RunExperiment, AttackTlgIsReproducibleAndWritesCsv) {
  const fs::path dir = scratch_dir("repro");
  ExperimentConfig c;
  c.experiment = Experiment::kAttackTlg;
  c.d = 24;
  c.k = 4;
  c.trials = 3;
  c.seed = 42;
  c.out = dir.string();
  const ExperimentResult a = run_experiment(c);
  const ExperimentResult b = run_experiment(c);
  EXPECT_EQ(without_timing(a.csv), without_timing(b.csv));
  EXPECT_EQ(fs::path(a.csv_path).filename(), "attack-tlg_42.csv");
  ASSERT_TRUE(fs::exists(a.csv_path));
  std::ifstream f(a.csv_path);
  std::stringstream buf;
  buf << f.rdbuf();
  EXPECT_EQ(buf.str(), b.csv);

  const auto rows = parse_csv(a.csv);
  ASSERT_EQ(rows.size(), 4u);
  std::size_t success_col = 0;
  while (rows[0][success_col] != "success") ++success_col;
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][success_col], "1");

  c.seed = 43;
  EXPECT_NE(without_timing(run_experiment(c).csv), without_timing(a.csv));
}

TEST(RunExperiment, ThresholdFlipsAtK) {
  ExperimentConfig c;
  c.experiment = Experiment::kThreshold;
  c.d = 32;
  c.k = 5;
  c.delta = 2;
  c.trials = 4;
  c.out = "";
  const ExperimentResult r = run_experiment(c);
  EXPECT_TRUE(r.csv_path.empty());
  const auto rows = parse_csv(r.csv);
  std::size_t sweep = 0, success = 0;
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    if (rows[0][i] == "sweep") sweep = i;
    if (rows[0][i] == "success") success = i;
  }
  ASSERT_EQ(rows.size(), 1 + c.trials * (c.k + c.delta));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::size_t s = std::stoul(rows[i][sweep]);
    // Below K samples the noise span is incomplete; at K+delta it is all but
    // certain to be complete for P = 2^31 - 1.
    if (s < c.k) {
      EXPECT_EQ(rows[i][success], "0") << "samples " << s;
    }
    if (s == c.k + c.delta) {
      EXPECT_EQ(rows[i][success], "1") << "samples " << s;
    }
  }
}

TEST(RunExperiment, RankProbOverF2) {
  ExperimentConfig c;
  c.experiment = Experiment::kRankProb;
  c.modulus = 2;
  c.k = 2;
  c.trials = 0;
  c.out = "";
  const ExperimentResult r = run_experiment(c);
  // 6 of the 16 2x2 binary matrices are invertible.
  EXPECT_NE(r.csv.find("2,2,formula,0,0,0.625"), std::string::npos) << r.csv;
  EXPECT_NE(r.csv.find("2,2,enumeration,16,10,0.625"), std::string::npos) << r.csv;
  EXPECT_NE(r.summary.find("5/8"), std::string::npos) << r.summary;
}

TEST(RankProb, MonteCarloAgreesWithEnumeration) {
  const RankProbResult r = rank_prob(3, 2, 20000, 7);
  ASSERT_TRUE(r.enumerated_singular.has_value());
  // |GL_2(F_3)| = 48 of 81.
  EXPECT_EQ(*r.enumerated_singular, 33u);
  EXPECT_EQ(r.enumerated_total, 81u);
  const double rate = static_cast<double>(r.mc_singular) / r.mc_trials;
  EXPECT_NEAR(rate, 33.0 / 81.0, 0.02);
}

TEST(RunExperiment, CostTableHasFiveModels) {
  ExperimentConfig c;
  c.experiment = Experiment::kCostTable;
  c.k = 10;
  c.out = "";
  const ExperimentResult r = run_experiment(c);
  EXPECT_EQ(parse_csv(r.csv).size(), 6u);
  EXPECT_NE(r.summary.find("1.31 GB"), std::string::npos);
}

TEST(RunExperiment, AttackSoterBypassesAndControlAborts) {
  ExperimentConfig c;
  c.experiment = Experiment::kAttackSoter;
  c.d = 64;
  c.k = 4;
  c.delta = 1;
  c.batch_size = 2;
  c.trials = 2;
  c.bypass_batches = 50;
  c.out = "";
  const auto rows = parse_csv(run_experiment(c).csv);
  std::size_t variant = 0, success = 0, det = 0;
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    if (rows[0][i] == "variant") variant = i;
    if (rows[0][i] == "success") success = i;
    if (rows[0][i] == "detections") det = i;
  }
  std::size_t bypass_rows = 0, control_rows = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][variant] == "bypass") {
      ++bypass_rows;
      EXPECT_EQ(rows[i][success], "1");
      EXPECT_EQ(rows[i][det], "0");
    } else if (rows[i][variant] == "control") {
      ++control_rows;
      EXPECT_EQ(rows[i][det], "50");
    }
  }
  EXPECT_EQ(bypass_rows, 2u);
  EXPECT_EQ(control_rows, 2u);
}

}  // namespace
}  // namespace bb
