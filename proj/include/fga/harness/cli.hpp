#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fga::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitCheckFailed = 3;

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant checks across every module.
std::vector<CheckResult> run_selftest();

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fga::harness
