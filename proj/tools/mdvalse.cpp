// mdvalse: simulate, estimate, benchmark and self-check from the shell.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdvalse/inference.hpp"
#include "mdvalse/scenario.hpp"
#include "mdvalse/selfcheck.hpp"
#include "mdvalse/tensor.hpp"

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("bad config " + path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct SimulateArgs {
  std::string config, out, truth;
};

struct EstimateArgs {
  std::string input, out;
  mdvalse::EstimateOptions opts;
};

struct BenchmarkArgs {
  std::string config, out;
  std::size_t threads = 0;
  bool timing = false;
};

int cmd_simulate(const SimulateArgs& a) {
  const mdvalse::Scenario s = mdvalse::simulate(mdvalse::scenario_from_json(read_json(a.config)));
  mdvalse::write_tensor(a.out, s.y);
  write_text(a.truth, mdvalse::truth_to_json(s).dump(2) + "\n");
  return 0;
}

int cmd_estimate(const EstimateArgs& a) {
  const mdvalse::SpectralTensor y = mdvalse::read_tensor(a.input);
  const mdvalse::EstimationResult r = mdvalse::estimate(y, a.opts);
  write_text(a.out, mdvalse::result_to_json(r).dump(2) + "\n");
  if (r.status != "ok" && r.status != "zero input") {
    std::cerr << "estimate: " << r.status << "\n";
    return 1;
  }
  return r.converged ? 0 : 2;
}

int cmd_benchmark(const BenchmarkArgs& a) {
  mdvalse::BenchmarkConfig cfg = mdvalse::benchmark_from_json(read_json(a.config));
  if (a.threads) cfg.threads = a.threads;
  if (a.timing) cfg.timing = true;
  const auto rows = mdvalse::run_benchmark(cfg);
  write_text(a.out, mdvalse::benchmark_csv(rows, cfg));
  return 0;
}

int cmd_selfcheck(const mdvalse::SelfcheckOptions& opts) {
  const auto results = mdvalse::run_selfcheck(opts);
  for (const auto& r : results) {
    const char* tag = r.informational ? "INFO" : (r.passed ? "PASS" : "FAIL");
    std::printf("%-4s %-48s worst=%.3e tol=%.1e  %s\n", tag, r.name.c_str(), r.worst, r.tolerance,
                r.detail.c_str());
  }
  return mdvalse::all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multidimensional variational line spectral estimation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic tensor and its ground truth");
  simulate->add_option("--config", sim.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "Output MDLS tensor")->required();
  simulate->add_option("--truth", sim.truth, "Output truth JSON (default stdout)");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate frequencies and weights of an MDLS tensor");
  estimate->add_option("input", est.input, "Input MDLS tensor")->required();
  estimate->add_option("--out", est.out, "Output result JSON (default stdout)");
  estimate->add_option("--gamma", est.opts.gamma, "FFT oversampling factor")->capture_default_str();
  estimate->add_option("--n-components", est.opts.budget, "Component budget N (0: min dimension)");
  estimate->add_option("--tol", est.opts.tol, "Relative reconstruction change to stop")->capture_default_str();
  estimate->add_option("--max-iters", est.opts.max_iters, "Iteration cap")->capture_default_str();
  estimate->add_option("--kappa-const", est.opts.kappa_const, "Curvature to concentration constant")
      ->capture_default_str();

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Monte-Carlo sweep over an SNR grid");
  benchmark->add_option("--config", bench.config, "Benchmark JSON")->required()->check(CLI::ExistingFile);
  benchmark->add_option("--out", bench.out, "Output CSV (default stdout)");
  benchmark->add_option("--threads", bench.threads, "Worker threads (0: OpenMP default)");
  benchmark->add_flag("--timing", bench.timing, "Record per-trial wall time");

  mdvalse::SelfcheckOptions check;
  auto* selfcheck = app.add_subcommand("selfcheck", "Compare the estimator internals against oracles");
  selfcheck->add_option("--kappa-const", check.kappa_const, "Constant used by the moment check")
      ->capture_default_str();
  selfcheck->add_flag("--tamper-support", check.tamper_support, "Break the support score (negative control)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*estimate) {
      est.opts.validate();
      return cmd_estimate(est);
    }
    if (*benchmark) return cmd_benchmark(bench);
    if (*selfcheck) return cmd_selfcheck(check);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
