#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qtp::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// The twelve acceptance criteria, numbered from 1.
CheckResult acceptance(int index);
constexpr int acceptance_count = 12;

const std::vector<std::string>& suite_names();

/// Runs a named verification suite; throws std::invalid_argument for an
/// unknown name, listing the available suites.
std::vector<CheckResult> run_suite(std::string_view suite);

}  // namespace qtp::checks
