#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mdvalse {

struct CheckResult {
  std::string name;
  bool passed = false;
  bool informational = false;  // reported, never fails the run
  double worst = 0.0;          // worst observed error measure
  double tolerance = 0.0;
  std::string detail;
};

struct SelfcheckOptions {
  double kappa_const = 0.5;
  bool tamper_support = false;  // negative control for the enumeration check
  std::uint64_t seed = 7;
  std::size_t mc_draws = 100000;
};

/// Runs every oracle comparison at small scale.
std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options = {});

// Individual checks, exposed for the test suites.
CheckResult check_support_enumeration(const SelfcheckOptions& options);
CheckResult check_rank_one_deltas(const SelfcheckOptions& options);
CheckResult check_coherent_moments(const SelfcheckOptions& options);
CheckResult check_noise_identity(const SelfcheckOptions& options);
CheckResult check_fft_correlation(const SelfcheckOptions& options);
CheckResult check_mean_resultant_roundtrip(const SelfcheckOptions& options);

/// True when no non-informational check failed.
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace mdvalse
