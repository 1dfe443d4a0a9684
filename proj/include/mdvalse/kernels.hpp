#pragma once

// Hot inner loops over the sample grid. Every kernel exists twice: a plain
// serial loop in `serial` (the reference the tests check against) and an
// OpenMP version in `parallel` that the estimator uses.
//
// Parallel reductions sum fixed-size blocks independently and then combine
// the block partials in block order, so their result does not depend on the
// thread count or schedule. They differ from the serial loop only by
// floating-point reassociation.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mdvalse::kernels {

using cdouble = std::complex<double>;

inline constexpr std::size_t kReduceBlock = 2048;

/// Value, gradient and Hessian of f(theta) = sum Re{eta * a(M, theta)}, where
/// the atom exponents count sample positions from `origin` (empty: zero).
struct CoherentSums {
  double value = 0.0;
  std::vector<double> grad;  // D
  std::vector<double> hess;  // D x D, row-major
};

namespace serial {

cdouble conj_dot(std::span<const cdouble> a, std::span<const cdouble> b);
double abs2_sum(std::span<const cdouble> a);
void outer_product(const std::vector<std::vector<cdouble>>& factors, std::span<cdouble> out);

/// out = sum_t coeffs[t] * (conj ? conj(terms[t]) : terms[t]).
void linear_combination(std::span<const std::span<const cdouble>> terms,
                        std::span<const cdouble> coeffs, bool conjugate_terms,
                        std::span<cdouble> out);

CoherentSums coherent_sums(std::span<const cdouble> eta, std::span<const std::size_t> dims,
                           std::span<const double> theta, std::span<const double> origin = {});
double coherent_value(std::span<const cdouble> eta, std::span<const std::size_t> dims,
                      std::span<const double> theta, std::span<const double> origin = {});

}  // namespace serial

namespace parallel {

cdouble conj_dot(std::span<const cdouble> a, std::span<const cdouble> b);
double abs2_sum(std::span<const cdouble> a);
void outer_product(const std::vector<std::vector<cdouble>>& factors, std::span<cdouble> out);
void linear_combination(std::span<const std::span<const cdouble>> terms,
                        std::span<const cdouble> coeffs, bool conjugate_terms,
                        std::span<cdouble> out);
CoherentSums coherent_sums(std::span<const cdouble> eta, std::span<const std::size_t> dims,
                           std::span<const double> theta, std::span<const double> origin = {});
double coherent_value(std::span<const cdouble> eta, std::span<const std::size_t> dims,
                      std::span<const double> theta, std::span<const double> origin = {});

}  // namespace parallel

}  // namespace mdvalse::kernels
