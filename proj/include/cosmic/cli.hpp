#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cosmic::cli {

/// Exit codes: success, usage or input error, mathematical failure.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kMath = 2;

inline constexpr const char* kSufficiencyHint =
    "dataset covariance not positive definite - collect more varied trajectories";

/// Runs the workbench with `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cosmic::cli
