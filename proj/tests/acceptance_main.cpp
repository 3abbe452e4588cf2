#include <cstdlib>
#include <iostream>
#include <numeric>
#include <string>
#include <thread>

#include "aest/acceptance.hpp"

// Runs every acceptance criterion and prints one line per criterion.
// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int k = 1; k < argc; ++k) ids.push_back(std::atoi(argv[k]));
  if (ids.empty()) {
    ids.resize(aest::kCriterionCount);
    std::iota(ids.begin(), ids.end(), 1);
  }
  aest::AcceptanceOptions options;
  options.jobs = std::max(1u, std::thread::hardware_concurrency());
  bool ok = true;
  for (int id : ids) {
    const auto r = aest::run_criterion(id, options);
    std::cout << aest::format_result(r) << std::endl;
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}
