#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <random>
#include <vector>

#include "mdvalse/kernels.hpp"

namespace mdvalse::kernels {
namespace {

std::vector<cdouble> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cdouble> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

class KernelSizes : public ::testing::TestWithParam<std::size_t> {};

TEST_P(KernelSizes, ReductionsAgree) {
  const std::size_t n = GetParam();
  auto a = random_vector(n, n);
  auto b = random_vector(n, n + 1);
  const double scale = double(n) + 1.0;
  EXPECT_LE(std::abs(parallel::conj_dot(a, b) - serial::conj_dot(a, b)), 1e-13 * scale);
  EXPECT_NEAR(parallel::abs2_sum(a), serial::abs2_sum(a), 1e-13 * scale);
}

TEST_P(KernelSizes, LinearCombinationAgrees) {
  const std::size_t n = GetParam();
  std::vector<std::vector<cdouble>> store;
  for (std::uint64_t t = 0; t < 3; ++t) store.push_back(random_vector(n, 10 * n + t));
  std::vector<std::span<const cdouble>> terms(store.begin(), store.end());
  std::vector<cdouble> coeffs{{1.0, 0.5}, {-0.25, 2.0}, {0.0, -1.0}};
  for (bool conj : {false, true}) {
    std::vector<cdouble> s(n), p(n);
    serial::linear_combination(terms, coeffs, conj, s);
    parallel::linear_combination(terms, coeffs, conj, p);
    EXPECT_EQ(s, p);
  }
}

INSTANTIATE_TEST_SUITE_P(Lengths, KernelSizes,
                         ::testing::Values(1, 7, kReduceBlock - 1, kReduceBlock, kReduceBlock + 1, 10000));

TEST(Kernels, OuterProductAgrees) {
  std::vector<std::vector<cdouble>> factors{random_vector(9, 1), random_vector(7, 2), random_vector(5, 3)};
  std::vector<cdouble> s(315), p(315);
  serial::outer_product(factors, s);
  parallel::outer_product(factors, p);
  EXPECT_EQ(s, p);
  EXPECT_NEAR(std::abs(s[1 * 35 + 2 * 5 + 3] - factors[0][1] * factors[1][2] * factors[2][3]), 0.0, 1e-14);
}

TEST(Kernels, CoherentSumsAgree) {
  for (std::vector<std::size_t> dims : {std::vector<std::size_t>{64}, {10, 10}, {48, 48}, {8, 8, 8, 8}}) {
    std::size_t n = 1;
    for (auto m : dims) n *= m;
    auto eta = random_vector(n, n);
    std::vector<double> theta(dims.size());
    for (std::size_t d = 0; d < dims.size(); ++d) theta[d] = 0.3 + 0.7 * double(d);
    auto s = serial::coherent_sums(eta, dims, theta);
    auto p = parallel::coherent_sums(eta, dims, theta);
    const double scale = double(n) * 10.0 * 1e-13 * double(n);
    EXPECT_NEAR(s.value, p.value, scale);
    ASSERT_EQ(s.grad.size(), dims.size());
    ASSERT_EQ(s.hess.size(), dims.size() * dims.size());
    for (std::size_t d = 0; d < s.grad.size(); ++d) EXPECT_NEAR(s.grad[d], p.grad[d], scale * 64);
    for (std::size_t d = 0; d < s.hess.size(); ++d) EXPECT_NEAR(s.hess[d], p.hess[d], scale * 64 * 64);
    EXPECT_NEAR(serial::coherent_value(eta, dims, theta), s.value, scale);
    EXPECT_NEAR(parallel::coherent_value(eta, dims, theta), s.value, scale);
  }
}

TEST(Kernels, CoherentSumsMatchFiniteDifferences) {
  std::vector<std::size_t> dims{6, 5};
  auto eta = random_vector(30, 99);
  std::vector<double> theta{0.4, -1.3};
  auto s = serial::coherent_sums(eta, dims, theta);
  const double h = 1e-5;
  for (std::size_t d = 0; d < 2; ++d) {
    auto up = theta, dn = theta;
    up[d] += h;
    dn[d] -= h;
    double g = (serial::coherent_value(eta, dims, up) - serial::coherent_value(eta, dims, dn)) / (2 * h);
    EXPECT_NEAR(s.grad[d], g, 1e-5 * std::max(1.0, std::abs(g)));
    auto gu = serial::coherent_sums(eta, dims, up).grad;
    auto gd = serial::coherent_sums(eta, dims, dn).grad;
    for (std::size_t e = 0; e < 2; ++e)
      EXPECT_NEAR(s.hess[e * 2 + d], (gu[e] - gd[e]) / (2 * h), 1e-4 * std::max(1.0, std::abs(s.hess[e * 2 + d])));
  }
}

TEST(Kernels, ParallelResultIndependentOfThreadCount) {
  auto a = random_vector(50000, 5);
  auto b = random_vector(50000, 6);
  std::vector<std::size_t> dims{250, 200};
  std::vector<double> theta{0.9, -0.2};
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  auto d1 = parallel::conj_dot(a, b);
  auto n1 = parallel::abs2_sum(a);
  auto c1 = parallel::coherent_sums(a, dims, theta);
  omp_set_num_threads(4);
  auto d4 = parallel::conj_dot(a, b);
  auto n4 = parallel::abs2_sum(a);
  auto c4 = parallel::coherent_sums(a, dims, theta);
  omp_set_num_threads(saved);
  EXPECT_EQ(d1, d4);
  EXPECT_EQ(n1, n4);
  EXPECT_EQ(c1.value, c4.value);
  EXPECT_EQ(c1.grad, c4.grad);
  EXPECT_EQ(c1.hess, c4.hess);
}

}  // namespace
}  // namespace mdvalse::kernels
