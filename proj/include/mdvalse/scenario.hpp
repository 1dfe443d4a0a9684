#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdvalse/inference.hpp"
#include "mdvalse/metrics.hpp"
#include "mdvalse/tensor.hpp"

namespace mdvalse {

enum class WeightModel {
  ComplexNormal,   // w ~ CN(0, 1)
  MagnitudePhase,  // |w| ~ N(1, 0.2), arg w ~ U(-pi, pi)
};

struct ScenarioConfig {
  std::vector<std::size_t> dims;
  std::size_t k = 0;
  WeightModel weights = WeightModel::ComplexNormal;
  std::optional<double> snr_db;              // absent: noiseless
  double noise_nu = 1.0;                     // used when k == 0 and noise is on
  std::uint64_t seed = 0;
  std::optional<FreqList> frequencies;       // explicit truth
  std::optional<double> min_separation;      // default 2 pi / min_d M_d
};

struct Scenario {
  std::vector<Component> truth;
  SpectralTensor x;
  SpectralTensor y;
  double nu = 0.0;
};

/// Frequencies of the 2-D, K = 8 reference scenario.
FreqList reference_2d_frequencies();

/// Draws k frequency vectors, each at least `min_sep` (wrap distance) from
/// all others in every dimension. Throws after 1e5 rejected draws.
FreqList draw_separated_frequencies(std::size_t k, std::size_t rank, double min_sep,
                                   std::mt19937_64& rng);

Scenario simulate(const ScenarioConfig& config);

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json truth_to_json(const Scenario& s);
nlohmann::json result_to_json(const EstimationResult& r);

struct BenchmarkConfig {
  ScenarioConfig scenario;            // seed field is ignored
  std::vector<double> snr_db;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  EstimateOptions estimator;
  bool timing = false;                // record wall time (breaks byte-reproducibility)
  std::size_t threads = 0;            // 0: OpenMP default, capped by MDVALSE_THREADS
};

struct BenchmarkRow {
  std::size_t trial = 0;
  double snr_db = 0.0;
  TrialOutcome outcome;
};

BenchmarkConfig benchmark_from_json(const nlohmann::json& j);

/// Runs trials x SNR points; trial t uses seed base_seed + t at every SNR.
/// Rows come back ordered by (SNR point, trial).
std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& config);

/// One data row per trial, then one aggregate row per SNR point.
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows, const BenchmarkConfig& config);

TrialOutcome evaluate_trial(const Scenario& scenario, const EstimationResult& result, double runtime_s);

}  // namespace mdvalse
