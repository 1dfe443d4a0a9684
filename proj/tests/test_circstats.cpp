#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mdvalse/circstats.hpp"
#include "mdvalse/oracles.hpp"

namespace mdvalse {
namespace {

TEST(MeanResultant, ReferenceValues) {
  EXPECT_EQ(mean_resultant(0.0), 0.0);
  EXPECT_NEAR(mean_resultant(2.0), 0.697774657964, 1e-11);
  // 1 - 1/(2 kappa) up to the 1/(8 kappa^2) term.
  EXPECT_NEAR(mean_resultant(100.0), 1.0 - 1.0 / 200.0, 2e-5);
  EXPECT_NEAR(mean_resultant(100.0), 0.994987373005, 1e-11);
}

TEST(MeanResultant, MatchesSeriesOracle) {
  for (double k = 0.0; k <= 60.0; k += 0.37) {
    double expect = oracle::bessel_ratio_series(1, k);
    EXPECT_NEAR(mean_resultant(k), expect, 1e-10 * std::max(expect, 1e-3)) << "kappa " << k;
  }
}

TEST(MeanResultant, StrictlyIncreasing) {
  double prev = -1.0;
  for (double k = 0.0; k <= 1e4; k = k * 1.3 + 0.01) {
    double a = mean_resultant(k);
    EXPECT_GT(a, prev) << "kappa " << k;
    EXPECT_LT(a, 1.0);
    prev = a;
  }
}

TEST(MeanResultant, LargeArgumentAsymptotics) {
  // A(k) = 1 - 1/(2k) - 1/(8k^2) - 1/(8k^3) + O(k^-4)
  for (double k : {1e3, 1e4, 1e5, 1e6}) {
    double expect = 1.0 - 1.0 / (2 * k) - 1.0 / (8 * k * k) - 1.0 / (8 * k * k * k);
    EXPECT_NEAR(mean_resultant(k), expect, 1e-12) << "kappa " << k;
  }
}

TEST(MeanResultant, RejectsBadInput) {
  EXPECT_THROW(mean_resultant(-1.0), std::invalid_argument);
  EXPECT_THROW(mean_resultant(NAN), std::invalid_argument);
  EXPECT_THROW(mean_resultant_inverse(-0.1), std::invalid_argument);
  EXPECT_THROW(mean_resultant_inverse(1.0), std::invalid_argument);
}

TEST(MeanResultantInverse, RoundTrips) {
  EXPECT_EQ(mean_resultant_inverse(0.0), 0.0);
  EXPECT_NEAR(mean_resultant_inverse(mean_resultant(5.0)), 5.0, 1e-8);
  EXPECT_NEAR(mean_resultant_inverse(mean_resultant(500.0)) / 500.0, 1.0, 1e-4);
  for (double k = 0.0; k <= 1e3; k += 0.731) {
    double r = mean_resultant(k);
    EXPECT_NEAR(mean_resultant_inverse(r), k, 1e-8 * std::max(1.0, k)) << "kappa " << k;
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.9999);
  for (int i = 0; i < 200; ++i) {
    double r = u(rng);
    EXPECT_NEAR(mean_resultant(mean_resultant_inverse(r)), r, 1e-10);
  }
}

TEST(MeanResultantInverse, SaturatesAtCap) {
  EXPECT_LE(mean_resultant_inverse(kResultantClamp), kKappaMax);
  EXPECT_GT(mean_resultant_inverse(kResultantClamp), 1e10);
}

TEST(BesselRatio, ReferenceValues) {
  EXPECT_EQ(bessel_ratio(0, 3.7), 1.0);
  EXPECT_EQ(bessel_ratio(3, 0.0), 0.0);
  EXPECT_NEAR(bessel_ratio(2, 2.0), 0.302225342036, 1e-11);
  EXPECT_THROW(bessel_ratio(1, -1.0), std::invalid_argument);
}

TEST(BesselRatio, MatchesSeriesOracle) {
  for (double k : {0.01, 0.5, 2.0, 7.5, 20.0, 45.0, 60.0}) {
    auto r = bessel_ratios(40, k);
    for (unsigned n = 0; n <= 40; ++n) {
      double expect = oracle::bessel_ratio_series(n, k);
      EXPECT_NEAR(r[n], expect, 1e-12 + 1e-10 * expect) << "n " << n << " kappa " << k;
    }
  }
}

TEST(BesselRatio, BoundedMonotone) {
  for (double k : {0.1, 1.0, 10.0, 300.0, 499.0, 501.0, 5000.0, 1e5, 1e6, 1e9}) {
    auto r = bessel_ratios(64, k);
    for (std::size_t n = 1; n < r.size(); ++n) {
      EXPECT_GE(r[n], 0.0);
      EXPECT_LE(r[n], r[n - 1]) << "n " << n << " kappa " << k;
    }
  }
  for (std::size_t n = 1; n <= 32; n += 5) {
    double prev = 0.0;
    for (double k = 0.5; k < 1e7; k *= 1.7) {
      double v = bessel_ratio(n, k);
      EXPECT_GT(v, prev) << "n " << n << " kappa " << k;
      prev = v;
    }
  }
}

TEST(BesselRatio, ContinuousAcrossEvaluationPaths) {
  // The large-argument path starts at kappa >= max(500, 2 n_max^2).
  for (double k : {500.0, 2048.0, 8192.0}) {
    for (std::size_t n_max : {4, 16, 32, 64}) {
      auto below = bessel_ratios(n_max, k * (1 - 1e-9));
      auto above = bessel_ratios(n_max, k * (1 + 1e-9));
      for (std::size_t n = 0; n <= n_max; ++n)
        EXPECT_NEAR(below[n], above[n], 1e-8) << "n " << n << " kappa " << k;
    }
  }
}

TEST(BesselRatio, LargeKappaIsGaussianLimit) {
  // I_n / I_0 -> exp(-n^2 / (2 kappa)) as kappa grows.
  auto r = bessel_ratios(32, 1e6);
  for (std::size_t n = 0; n <= 32; ++n)
    EXPECT_NEAR(r[n], std::exp(-double(n * n) / 2e6), 1e-7);
}

TEST(VmTrigMoment, Examples) {
  VonMisesProduct vm({0.3, -1.0}, {2.0, 5.0});
  std::vector<std::size_t> zero{0, 0};
  EXPECT_EQ(vm_trig_moment(vm, zero), cdouble(1.0));

  VonMisesProduct one({0.3}, {2.0});
  std::vector<std::size_t> first{1};
  auto m = vm_trig_moment(one, first);
  EXPECT_NEAR(std::abs(m - std::polar(0.697774657964, 0.3)), 0.0, 1e-10);

  VonMisesProduct sharp({0.4, 2.0}, {kKappaMax, kKappaMax});
  std::vector<std::size_t> orders{7, 3};
  EXPECT_NEAR(std::abs(vm_trig_moment(sharp, orders) - std::polar(1.0, 7 * 0.4 + 3 * 2.0)), 0.0, 1e-6);

  std::vector<std::size_t> wrong{1};
  EXPECT_THROW(vm_trig_moment(vm, wrong), std::invalid_argument);
}

TEST(VmTrigMoment, MatchesQuadrature) {
  for (double k : {0.0, 0.3, 2.0, 10.0, 37.0, 100.0}) {
    for (unsigned n : {0u, 1u, 2u, 5u, 13u, 32u}) {
      VonMisesProduct vm({-0.8}, {k});
      std::vector<std::size_t> orders{n};
      auto got = vm_trig_moment(vm, orders);
      auto expect = oracle::vm_moment_quadrature(n, -0.8, k);
      EXPECT_LE(std::abs(got - expect), 1e-6) << "n " << n << " kappa " << k;
      EXPECT_LE(std::abs(got), 1.0 + 1e-15);
    }
  }
}

TEST(VmMeanAtom, BoundedAndOneAtOrigin) {
  VonMisesProduct vm({0.5, -2.0}, {3.0, 40.0});
  auto a = vm_mean_atom(Shape{6, 5}, vm);
  EXPECT_NEAR(std::abs(a[0] - cdouble(1.0)), 0.0, 1e-15);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(std::abs(a[i]), 1.0 + 1e-15);
  for (const auto& idx : multi_indices(a.shape())) {
    std::vector<std::size_t> orders(idx.begin(), idx.end());
    EXPECT_NEAR(std::abs(a.at(idx) - vm_trig_moment(vm, orders)), 0.0, 1e-14);
  }
}

std::vector<std::vector<double>> uniform_angles(std::vector<std::size_t> sizes) {
  std::vector<std::vector<double>> out;
  for (auto g : sizes) {
    std::vector<double> a(g);
    for (std::size_t i = 0; i < g; ++i) a[i] = wrap_angle(kTwoPi * double(i) / double(g));
    out.push_back(a);
  }
  return out;
}

TEST(ProjectGrid, PointMass) {
  auto angles = uniform_angles({16, 12});
  std::vector<double> logd(16 * 12, -1e300);
  logd[5 * 12 + 9] = 0.0;
  auto vm = project_grid_to_vm(logd, angles);
  EXPECT_NEAR(vm.mu[0], angles[0][5], 1e-12);
  EXPECT_NEAR(vm.mu[1], angles[1][9], 1e-12);
  double k = mean_resultant_inverse(kResultantClamp);
  EXPECT_NEAR(vm.kappa[0] / k, 1.0, 1e-6);
  EXPECT_NEAR(vm.kappa[1] / k, 1.0, 1e-6);
}

TEST(ProjectGrid, UniformGivesZeroConcentration) {
  auto angles = uniform_angles({32, 8});
  std::vector<double> logd(32 * 8, -4.0);
  auto vm = project_grid_to_vm(logd, angles);
  EXPECT_LT(vm.kappa[0], 1e-10);
  EXPECT_LT(vm.kappa[1], 1e-10);
}

TEST(ProjectGrid, RecoversGriddedVonMises) {
  auto angles = uniform_angles({512, 512});
  const double mu0 = 1.1, mu1 = -2.4, k0 = 10.0, k1 = 3.0;
  std::vector<double> logd(512 * 512);
  for (std::size_t i = 0; i < 512; ++i)
    for (std::size_t j = 0; j < 512; ++j)
      logd[i * 512 + j] = k0 * std::cos(angles[0][i] - mu0) + k1 * std::cos(angles[1][j] - mu1);
  auto vm = project_grid_to_vm(logd, angles);
  EXPECT_NEAR(vm.mu[0], mu0, 1e-3);
  EXPECT_NEAR(vm.mu[1], mu1, 1e-3);
  EXPECT_NEAR(vm.kappa[0] / k0, 1.0, 0.02);
  EXPECT_NEAR(vm.kappa[1] / k1, 1.0, 0.02);

  for (auto& v : logd) v += 123.0;
  auto shifted = project_grid_to_vm(logd, angles);
  EXPECT_NEAR(shifted.mu[0], vm.mu[0], 1e-12);
  EXPECT_NEAR(shifted.kappa[1], vm.kappa[1], 1e-9);
}

TEST(ProjectGrid, RejectsBadGrids) {
  auto angles = uniform_angles({4, 4});
  std::vector<double> all_neg_inf(16, -INFINITY);
  EXPECT_THROW(project_grid_to_vm(all_neg_inf, angles), std::invalid_argument);
  std::vector<double> with_nan(16, 0.0);
  with_nan[3] = NAN;
  EXPECT_THROW(project_grid_to_vm(with_nan, angles), std::invalid_argument);
  std::vector<double> short_grid(15, 0.0);
  EXPECT_THROW(project_grid_to_vm(short_grid, angles), std::invalid_argument);
}

TEST(HessianToKappa, LaplaceMatching) {
  std::vector<double> h{-1.0 / 20.0};
  EXPECT_NEAR(hessian_to_kappa(h)[0] / 20.0, 1.0, 0.05);

  std::vector<double> tiny{-1e-14};
  EXPECT_GT(hessian_to_kappa(tiny)[0], 1e11);
  std::vector<double> huge{-1e6};
  EXPECT_LT(hessian_to_kappa(huge)[0], 1e-6);

  std::vector<double> bad{-1.0, 0.0};
  EXPECT_THROW(hessian_to_kappa(bad), std::domain_error);
}

TEST(HessianToKappa, LiteralConstantOverconcentratesLess) {
  std::vector<double> h{-0.05};
  EXPECT_LT(hessian_to_kappa(h, 2.0)[0], hessian_to_kappa(h, 0.5)[0]);
}

}  // namespace
}  // namespace mdvalse
