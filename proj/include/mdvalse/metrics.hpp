#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mdvalse/tensor.hpp"

namespace mdvalse {

/// Exact matches are reported at this level instead of -inf.
inline constexpr double kDbFloor = -300.0;

double to_db(double ratio);

/// 10 log10(||X_hat - X||^2 / ||X||^2).
double nmse_db(const SpectralTensor& x_hat, const SpectralTensor& x_true);

/// Circular distance in [0, pi].
double wrap_dist(double a, double b);

using FreqList = std::vector<std::vector<double>>;

/// Minimum-cost one-to-one assignment, cost sum_d wrap_dist^2.
/// assignment[i] is the truth index matched to estimate i.
struct Assignment {
  std::vector<std::size_t> assignment;
  double cost = 0.0;
};

Assignment match_frequencies(const FreqList& est, const FreqList& truth);

/// 10 log10 of the matched squared wrap error averaged over K * D scalars.
double freq_mse_db(const FreqList& est, const FreqList& truth);

struct TrialOutcome {
  std::size_t k_true = 0;
  std::size_t k_hat = 0;
  double nmse_db = 0.0;
  std::optional<double> freq_mse_db;  // present iff k_hat == k_true
  double runtime_s = 0.0;
  std::size_t iterations = 0;
};

struct TrialSummary {
  std::size_t trials = 0;
  std::size_t correct = 0;
  double p_correct = 0.0;
  std::optional<double> mean_freq_mse_db;  // over correct trials only
  double mean_nmse_db = 0.0;
  double mean_runtime_s = 0.0;
  double max_runtime_s = 0.0;
};

/// Means are taken on the linear scale and reported in dB.
TrialSummary aggregate(const std::vector<TrialOutcome>& trials);

}  // namespace mdvalse
