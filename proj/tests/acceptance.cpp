// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "mdvalse/inference.hpp"
#include "mdvalse/oracles.hpp"
#include "mdvalse/scenario.hpp"
#include "mdvalse/selfcheck.hpp"

namespace {

using namespace mdvalse;

// Criterion 1
constexpr std::size_t kReferenceTrials = 100;
constexpr double kReferenceSnr = 40.0;
constexpr double kMinPCorrect = 0.9;
constexpr double kMaxMedianMseDb = -65.0;
constexpr double kMaxSecondsPerTrial = 2.0;
// Criterion 2
constexpr double kNoiselessSnr = 120.0;
constexpr double kNoiselessTol = 1e-12;
constexpr std::size_t kNoiselessIters = 20000;
constexpr std::size_t kNoiselessSeeds = 5;
constexpr double kMaxNoiselessMseDb = -100.0;
// Criterion 3
constexpr std::size_t kTrendTrials = 50;
constexpr double kTrendGamma = 2.0;
constexpr double kMinTrendPCorrect = 0.9;
// Criterion 4
constexpr double kFineGamma = 52.0;
constexpr double kCoarseGamma = 1.6;
constexpr double kMaxProjectionError = 1e-3;
constexpr double kProjectionNu = 1.0;
// Criterion 6
constexpr std::size_t kTimingRepeats = 7;
constexpr double kMinScaling = 3.5;
constexpr double kMaxScaling = 6.0;

bool g_failed = false;

void report(int id, bool pass, const std::string& what) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!pass) g_failed = true;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ScenarioConfig reference_scenario() {
  ScenarioConfig c;
  c.dims = {10, 10};
  c.k = 8;
  c.frequencies = reference_2d_frequencies();
  c.weights = WeightModel::ComplexNormal;
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void criterion_1() {
  BenchmarkConfig b;
  b.scenario = reference_scenario();
  b.snr_db = {kReferenceSnr};
  b.trials = kReferenceTrials;
  b.base_seed = 1;
  b.timing = true;
  const auto rows = run_benchmark(b);
  std::vector<TrialOutcome> outcomes;
  std::vector<double> mse;
  for (const auto& r : rows) {
    outcomes.push_back(r.outcome);
    if (r.outcome.freq_mse_db) mse.push_back(*r.outcome.freq_mse_db);
  }
  const auto s = aggregate(outcomes);
  const double med = mse.empty() ? 0.0 : median(mse);
  const bool pass = s.p_correct >= kMinPCorrect && !mse.empty() && med <= kMaxMedianMseDb &&
                    s.mean_runtime_s <= kMaxSecondsPerTrial;
  report(1, pass,
         fmt("2D K=8 at %g dB, %zu trials: P(K=8) %.2f (need >= %.2f), median MSE %.1f dB (need <= %.0f), "
             "%.2f s/trial",
             kReferenceSnr, kReferenceTrials, s.p_correct, kMinPCorrect, med, kMaxMedianMseDb, s.mean_runtime_s));
}

void criterion_2() {
  EstimateOptions opts;
  opts.tol = kNoiselessTol;
  opts.max_iters = kNoiselessIters;
  double worst = -400.0;
  std::size_t wrong_order = 0;
  for (std::uint64_t seed = 1; seed <= kNoiselessSeeds; ++seed) {
    ScenarioConfig c = reference_scenario();
    c.snr_db = kNoiselessSnr;
    c.seed = seed;
    const Scenario s = simulate(c);
    const auto t = evaluate_trial(s, estimate(s.y, opts), 0.0);
    if (!t.freq_mse_db) {
      ++wrong_order;
      continue;
    }
    worst = std::max(worst, *t.freq_mse_db);
  }
  report(2, wrong_order == 0 && worst <= kMaxNoiselessMseDb,
         fmt("2D K=8 at %g dB, %zu seeds: %zu with wrong order, worst MSE %.1f dB (need <= %.0f)", kNoiselessSnr,
             kNoiselessSeeds, wrong_order, worst, kMaxNoiselessMseDb));
}

void criterion_3() {
  BenchmarkConfig b;
  b.scenario.dims = {8, 8, 8, 8};
  b.scenario.k = 3;
  b.scenario.weights = WeightModel::MagnitudePhase;
  b.scenario.min_separation = kTwoPi / 8;
  b.snr_db = {0.0, 10.0, 20.0};
  b.trials = kTrendTrials;
  b.base_seed = 1000;
  b.estimator.gamma = kTrendGamma;
  const auto rows = run_benchmark(b);
  std::vector<TrialSummary> s;
  for (double snr : b.snr_db) {
    std::vector<TrialOutcome> group;
    for (const auto& r : rows)
      if (r.snr_db == snr) group.push_back(r.outcome);
    s.push_back(aggregate(group));
  }
  bool pass = s.back().p_correct >= kMinTrendPCorrect;
  for (std::size_t i = 1; i < s.size(); ++i) {
    pass = pass && s[i].p_correct >= s[i - 1].p_correct;
    pass = pass && s[i].mean_freq_mse_db && s[i - 1].mean_freq_mse_db &&
           *s[i].mean_freq_mse_db < *s[i - 1].mean_freq_mse_db;
  }
  auto mse = [](const TrialSummary& t) { return t.mean_freq_mse_db.value_or(NAN); };
  report(3, pass,
         fmt("4D K=3, %zu trials at 0/10/20 dB: P %.2f/%.2f/%.2f, mean MSE %.1f/%.1f/%.1f dB", kTrendTrials,
             s[0].p_correct, s[1].p_correct, s[2].p_correct, mse(s[0]), mse(s[1]), mse(s[2])));
}

void criterion_4() {
  ScenarioConfig c;
  c.dims = {12, 12};
  c.k = 1;
  c.frequencies = FreqList{{0.7312, -1.9031}};
  c.seed = 3;
  const Scenario s = simulate(c);
  // The input is noiseless, so the density is taken at the unit signal power.
  const double nu = kProjectionNu;
  auto error = [&](double gamma) {
    const auto vm = project_noncoherent(s.y, nu, gamma);
    const auto peak = oracle::noncoherent_peak(s.y, vm.mu);
    double e = 0.0;
    for (std::size_t d = 0; d < 2; ++d) e = std::max(e, wrap_dist(vm.mu[d], peak[d]));
    return e;
  };
  const double fine = error(kFineGamma);
  const double coarse = error(kCoarseGamma);
  report(4, fine <= kMaxProjectionError && coarse > fine,
         fmt("projected mean vs refined peak: %.2e rad at gamma %g (need <= %.0e), %.2e rad at gamma %g", fine,
             kFineGamma, kMaxProjectionError, coarse, kCoarseGamma));
}

void criterion_5() {
  const auto results = run_selfcheck();
  std::string failed;
  for (const auto& r : results)
    if (!r.informational && !r.passed) failed += (failed.empty() ? "" : "; ") + r.name + " (" + r.detail + ")";
  report(5, all_passed(results),
         failed.empty() ? fmt("all %zu oracle checks pass", results.size()) : "failed: " + failed);
}

double init_seconds(std::size_t m) {
  ScenarioConfig c;
  c.dims = {m, m};
  c.k = 4;
  c.snr_db = 20.0;
  c.seed = 1;
  const Scenario s = simulate(c);
  double best = INFINITY;
  for (std::size_t r = 0; r < kTimingRepeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto params = init_model_params(s.y, 4);
    const auto state = init_components(s.y, params, 8.0, 4);
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (state.order() == 4) best = std::min(best, t);
  }
  return best;
}

void criterion_6() {
  const double small = init_seconds(32);
  const double large = init_seconds(64);
  const double ratio = large / small;
  report(6, ratio >= kMinScaling && ratio <= kMaxScaling,
         fmt("initialization 32x32 %.2f ms, 64x64 %.2f ms, ratio %.2f (need %.1f..%.1f)", small * 1e3,
             large * 1e3, ratio, kMinScaling, kMaxScaling));
}

void criterion_7() {
  BenchmarkConfig b;
  b.scenario = reference_scenario();
  b.snr_db = {10.0, 30.0};
  b.trials = 4;
  b.base_seed = 77;
  const std::string first = benchmark_csv(run_benchmark(b), b);
  b.threads = 1;
  const std::string second = benchmark_csv(run_benchmark(b), b);
  report(7, first == second, fmt("benchmark CSV of %zu bytes reproduced %s", first.size(),
                                 first == second ? "byte for byte" : "with differences"));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  return g_failed ? 1 : 0;
}
