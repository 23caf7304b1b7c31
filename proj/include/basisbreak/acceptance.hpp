#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bb {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string measured;
  std::string tolerance;
  double seconds = 0.0;
  double budget_s = 0.0;  // 0: no runtime bound
};

enum class Fault {
  kNone,
  kCorruptIntersection,  // adds a stray direction to every recovered V_C
};

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  Fault fault = Fault::kNone;
  std::vector<int> only;  // empty: all criteria
};

// Runs criteria 1..11; each result line is also written to `progress` as
// soon as it is known when progress is non-null.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            std::ostream* progress = nullptr);

std::string format_criterion(const CriterionResult& r);
bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace bb
