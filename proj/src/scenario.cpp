#include "mdvalse/scenario.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace mdvalse {
namespace {

constexpr std::size_t kMaxRejections = 100000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string num(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::size_t thread_cap(std::size_t requested) {
  std::size_t n = requested ? requested : static_cast<std::size_t>(omp_get_max_threads());
  if (const char* env = std::getenv("MDVALSE_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(n, 1);
}

}  // namespace

FreqList reference_2d_frequencies() {
  return {{0.94, 1.26}, {1.26, -2.51}, {1.89, 1.89},  {2.83, -1.26},
          {-2.51, 1.57}, {-2.51, -2.51}, {-1.57, 2.51}, {-1.45, 2.76}};
}

FreqList draw_separated_frequencies(std::size_t k, std::size_t rank, double min_sep,
                                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  FreqList out;
  std::size_t rejected = 0;
  while (out.size() < k) {
    std::vector<double> cand(rank);
    for (double& c : cand) c = angle(rng);
    bool ok = true;
    for (const auto& f : out)
      for (std::size_t d = 0; d < rank && ok; ++d)
        if (wrap_dist(f[d], cand[d]) < min_sep) ok = false;
    if (ok) {
      out.push_back(std::move(cand));
    } else if (++rejected >= kMaxRejections) {
      throw std::invalid_argument("minimum frequency separation is infeasible");
    }
  }
  return out;
}

Scenario simulate(const ScenarioConfig& config) {
  const Shape shape(config.dims);
  std::mt19937_64 rng(config.seed);

  FreqList freqs;
  if (config.frequencies) {
    freqs = *config.frequencies;
    if (freqs.size() != config.k) throw std::invalid_argument("frequency list length differs from K");
    for (const auto& f : freqs)
      if (f.size() != shape.rank()) throw std::invalid_argument("frequency dimension mismatch");
  } else {
    const double sep = config.min_separation.value_or(kTwoPi / static_cast<double>(shape.min_dim()));
    freqs = draw_separated_frequencies(config.k, shape.rank(), sep, rng);
  }

  Scenario s;
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  for (auto& f : freqs) {
    cdouble w;
    if (config.weights == WeightModel::ComplexNormal) {
      const double re = std_normal(rng) * std::sqrt(0.5);
      const double im = std_normal(rng) * std::sqrt(0.5);
      w = cdouble(re, im);
    } else {
      const double mag = 1.0 + std::sqrt(0.2) * std_normal(rng);
      w = std::polar(mag, phase(rng));
    }
    s.truth.emplace_back(w, std::move(f));
  }

  s.x = synthesize(s.truth, shape);
  if (config.snr_db) {
    s.nu = config.k > 0 ? snr_to_nu(s.x, *config.snr_db) : config.noise_nu;
  } else {
    s.nu = 0.0;
  }
  s.y = add_noise(s.x, s.nu, splitmix64(config.seed));
  return s;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  c.dims = j.at("dims").get<std::vector<std::size_t>>();
  c.k = j.value("k", j.value("K", std::size_t{0}));
  const std::string wm = j.value("weights", std::string("complex_normal"));
  if (wm == "complex_normal") c.weights = WeightModel::ComplexNormal;
  else if (wm == "magnitude_phase") c.weights = WeightModel::MagnitudePhase;
  else throw std::invalid_argument("unknown weight model '" + wm + "'");
  if (j.contains("snr_db") && !j.at("snr_db").is_null()) c.snr_db = j.at("snr_db").get<double>();
  c.noise_nu = j.value("noise_nu", 1.0);
  c.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("frequencies")) {
    const auto& f = j.at("frequencies");
    if (f.is_string()) {
      if (f.get<std::string>() != "reference_2d") throw std::invalid_argument("unknown frequency preset");
      c.frequencies = reference_2d_frequencies();
    } else {
      c.frequencies = f.get<FreqList>();
    }
  }
  if (j.contains("min_separation")) c.min_separation = j.at("min_separation").get<double>();
  if (c.dims.empty()) throw std::invalid_argument("dims must be nonempty");
  return c;
}

nlohmann::json truth_to_json(const Scenario& s) {
  nlohmann::json j;
  j["dims"] = s.x.shape().dims();
  j["k"] = s.truth.size();
  j["nu"] = s.nu;
  j["frequencies"] = nlohmann::json::array();
  j["weights"] = nlohmann::json::array();
  for (const Component& c : s.truth) {
    j["frequencies"].push_back(c.freq);
    j["weights"].push_back({{"re", c.weight.real()}, {"im", c.weight.imag()}});
  }
  return j;
}

nlohmann::json result_to_json(const EstimationResult& r) {
  nlohmann::json j;
  j["k_hat"] = r.k_hat;
  j["components"] = nlohmann::json::array();
  for (const auto& c : r.components)
    j["components"].push_back(
        {{"w_re", c.weight.real()}, {"w_im", c.weight.imag()}, {"theta", c.theta}, {"kappa", c.kappa}});
  j["nu"] = r.params.nu;
  j["rho"] = r.params.rho;
  j["tau"] = r.params.tau;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["trace"] = r.trace;
  j["status"] = r.status;
  return j;
}

BenchmarkConfig benchmark_from_json(const nlohmann::json& j) {
  BenchmarkConfig c;
  c.scenario = scenario_from_json(j);
  c.snr_db = j.at("snr_db_grid").get<std::vector<double>>();
  if (c.snr_db.empty()) throw std::invalid_argument("snr_db_grid must be nonempty");
  c.trials = j.value("trials", std::size_t{1});
  if (c.trials == 0) throw std::invalid_argument("trials must be positive");
  c.base_seed = j.value("base_seed", std::uint64_t{0});
  c.timing = j.value("timing", false);
  c.threads = j.value("threads", std::size_t{0});
  if (j.contains("estimator")) {
    const auto& e = j.at("estimator");
    c.estimator.gamma = e.value("gamma", c.estimator.gamma);
    c.estimator.budget = e.value("n_components", c.estimator.budget);
    c.estimator.tol = e.value("tol", c.estimator.tol);
    c.estimator.max_iters = e.value("max_iters", c.estimator.max_iters);
    c.estimator.kappa_const = e.value("kappa_const", c.estimator.kappa_const);
  }
  c.estimator.validate();
  return c;
}

TrialOutcome evaluate_trial(const Scenario& scenario, const EstimationResult& result, double runtime_s) {
  TrialOutcome t;
  t.k_true = scenario.truth.size();
  t.k_hat = result.k_hat;
  t.iterations = result.iterations;
  t.runtime_s = runtime_s;
  t.nmse_db = scenario.x.is_zero() ? std::numeric_limits<double>::quiet_NaN()
                                   : nmse_db(result.x_hat, scenario.x);
  if (t.k_hat == t.k_true && t.k_true > 0) {
    FreqList est, truth;
    for (const auto& c : result.components) est.push_back(c.theta);
    for (const auto& c : scenario.truth) truth.push_back(c.freq);
    t.freq_mse_db = freq_mse_db(est, truth);
  }
  return t;
}

std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& config) {
  const std::size_t points = config.snr_db.size();
  const std::size_t total = points * config.trials;
  std::vector<BenchmarkRow> rows(total);
  std::vector<std::string> errors(total);
  const int threads = static_cast<int>(thread_cap(config.threads));

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::size_t n = 0; n < total; ++n) {
    const std::size_t point = n / config.trials;
    const std::size_t trial = n % config.trials;
    try {
      ScenarioConfig sc = config.scenario;
      sc.seed = config.base_seed + trial;
      sc.snr_db = config.snr_db[point];
      const Scenario s = simulate(sc);
      const auto t0 = std::chrono::steady_clock::now();
      const EstimationResult r = estimate(s.y, config.estimator);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rows[n] = {trial, config.snr_db[point], evaluate_trial(s, r, config.timing ? secs : 0.0)};
    } catch (const std::exception& e) {
      errors[n] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error("benchmark trial failed: " + e);
  return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows, const BenchmarkConfig& config) {
  std::ostringstream out;
  out << "trial,snr_db,k_true,k_hat,nmse_db,freq_mse_db,iterations,runtime_s\n";
  for (const auto& r : rows) {
    const auto& o = r.outcome;
    out << r.trial << ',' << num(r.snr_db) << ',' << o.k_true << ',' << o.k_hat << ',' << num(o.nmse_db)
        << ',' << (o.freq_mse_db ? num(*o.freq_mse_db) : "") << ',' << o.iterations << ','
        << (config.timing ? num(o.runtime_s) : "") << '\n';
  }
  out << "aggregate,snr_db,trials,p_correct,mean_freq_mse_db,mean_nmse_db,mean_runtime_s\n";
  for (std::size_t p = 0; p < config.snr_db.size(); ++p) {
    std::vector<TrialOutcome> group;
    for (const auto& r : rows)
      if (r.snr_db == config.snr_db[p]) group.push_back(r.outcome);
    const TrialSummary s = aggregate(group);
    out << "aggregate," << num(config.snr_db[p]) << ',' << s.trials << ',' << num(s.p_correct) << ','
        << (s.mean_freq_mse_db ? num(*s.mean_freq_mse_db) : "") << ',' << num(s.mean_nmse_db) << ','
        << (config.timing ? num(s.mean_runtime_s) : "") << '\n';
  }
  return out.str();
}

}  // namespace mdvalse
