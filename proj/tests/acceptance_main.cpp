// Prints one PASS/FAIL line per acceptance criterion; exit status 1 when any
// criterion fails.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "basisbreak/acceptance.hpp"

int main(int argc, char** argv) {
  bb::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--seed" && i + 1 < argc) {
      opt.seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string id;
      while (std::getline(ss, id, ',')) opt.only.push_back(std::stoi(id));
    } else if (a == "--fault" && i + 1 < argc) {
      const std::string f = argv[++i];
      if (f == "corrupt-intersection") {
        opt.fault = bb::Fault::kCorruptIntersection;
      } else if (f != "none") {
        std::cerr << "unknown fault: " << f << "\n";
        return 2;
      }
    } else {
      std::cerr << "usage: basisbreak_acceptance [--seed N] [--only 1,2,..] "
                   "[--fault none|corrupt-intersection]\n";
      return 2;
    }
  }
  const auto results = bb::run_acceptance(opt, &std::cout);
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return bb::all_passed(results) ? 0 : 1;
}
