#pragma once

// Property suites behind `fractrack verify`. Each check records the measured
// value, the threshold it is compared against and the outcome.

#include <string>
#include <vector>

namespace fractrack {

struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  // "<=" or ">=": how value is compared with threshold.
  std::string comparison = "<=";
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCheck> checks;

  bool passed() const;
  std::string to_json() const;
};

const std::vector<std::string>& verify_suites();

// Throws ValidationError for an unknown suite name.
VerifyReport run_verify(const std::string& suite);

// Smallest log2 ratio of consecutive errors from a halving-step sequence.
double min_observed_order(const std::vector<double>& errors);

}  // namespace fractrack
