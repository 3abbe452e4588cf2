#pragma once

#include <string>
#include <vector>

namespace aest {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct AcceptanceOptions {
  unsigned jobs = 1;  // worker threads for the scaling sweeps
};

inline constexpr int kCriterionCount = 8;

CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                            const AcceptanceOptions& options = {});

/// "criterion N PASS|FAIL name (Xs): detail"
std::string format_result(const CriterionResult& r);

}  // namespace aest
