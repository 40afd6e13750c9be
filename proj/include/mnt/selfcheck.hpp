#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mnt/common.hpp"

namespace mnt::selfcheck {

struct CheckResult {
  std::string name;
  bool passed = false;
  double tolerance = 0.0;
  double observed = 0.0;  // worst observed error / deviation for the check
  std::string detail;
};

struct Options {
  std::uint64_t seed = 42;
  // Test hook: emulates a sign error in the single-flip update so the
  // flip-oracle check can prove its own sensitivity.
  bool inject_woodbury_sign_error = false;
};

CheckResult check_woodbury(const Options& opts = {});
CheckResult check_gradient(const Options& opts = {});
CheckResult check_neumann(const Options& opts = {});
CheckResult check_variance_ratio(const Options& opts = {});
CheckResult check_mu_linearity(const Options& opts = {});

std::vector<std::string> check_names();
CheckResult run_named(const std::string& name, const Options& opts = {});
std::vector<CheckResult> run_all(const Options& opts = {});

}  // namespace mnt::selfcheck
