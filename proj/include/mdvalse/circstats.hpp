#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mdvalse/tensor.hpp"

namespace mdvalse {

/// Beyond this concentration a von Mises factor is treated as a point mass.
inline constexpr double kKappaMax = 1e12;

/// Largest mean resultant accepted before inversion.
inline constexpr double kResultantClamp = 1.0 - 1e-12;

/// D independent von Mises factors, f(theta) = prod_d VM(theta_d; mu_d, kappa_d).
struct VonMisesProduct {
  VonMisesProduct() = default;
  VonMisesProduct(std::vector<double> mu, std::vector<double> kappa);

  std::size_t rank() const noexcept { return mu.size(); }

  std::vector<double> mu;
  std::vector<double> kappa;
};

/// A(kappa) = I1(kappa) / I0(kappa).
double mean_resultant(double kappa);

/// Solves A(kappa) = r; saturates at kKappaMax.
double mean_resultant_inverse(double r);

/// I_n(kappa) / I_0(kappa).
double bessel_ratio(std::size_t n, double kappa);

/// I_n(kappa) / I_0(kappa) for n = 0..n_max.
///
/// Successive ratios I_m / I_{m-1} come from the continued fraction
///   I_m / I_{m-1} = kappa / (2m + kappa * I_{m+1} / I_m),
/// run backwards from an order deep enough that the starting guess is
/// forgotten, and are then telescoped down to order zero. No Bessel value is
/// ever formed, so nothing overflows. For kappa well past n_max^2 the depth
/// needed grows like sqrt(kappa); there the ratios come from the scaled
/// large-argument expansion of I_n instead.
std::vector<double> bessel_ratios(std::size_t n_max, double kappa);

/// E[prod_d exp(j * orders_d * theta_d)] under `vm`.
cdouble vm_trig_moment(const VonMisesProduct& vm, std::span<const std::size_t> orders);

/// Tensor of posterior-mean atom entries E[a(M, theta)] under `vm`, with
/// exponents counted from the integer sample position `origin` (empty: zero).
SpectralTensor vm_mean_atom(const Shape& shape, const VonMisesProduct& vm,
                            std::span<const double> origin = {});

/// Moment-matches a gridded density (given by its logarithm, row-major over
/// the grid spanned by `grid_angles`) onto independent von Mises factors.
VonMisesProduct project_grid_to_vm(std::span<const double> log_density,
                                   const std::vector<std::vector<double>>& grid_angles);

/// kappa_d = A^{-1}(exp(c * h_d)) for the diagonal h of an inverse Hessian.
/// c = 1/2 is the Gaussian (Laplace) matching constant.
std::vector<double> hessian_to_kappa(std::span<const double> hess_inv_diag, double c = 0.5);

}  // namespace mdvalse
