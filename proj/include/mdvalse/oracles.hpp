#pragma once

// Brute-force and sampling references. Nothing here calls into the kernels,
// the FFT path or the closed-form support updates it is used to check.

#include <cstdint>
#include <random>
#include <vector>

#include "mdvalse/inference.hpp"
#include "mdvalse/tensor.hpp"

namespace mdvalse::oracle {

/// sum_M conj(Y_M) prod_d exp(j i_d theta_d) by direct summation.
cdouble direct_correlation(const SpectralTensor& y, const std::vector<double>& theta);

/// I_n(kappa) / I_0(kappa) by long-double power series (kappa <= ~60).
double bessel_ratio_series(unsigned n, double kappa);

/// E[exp(j n theta)] under VM(mu, kappa) by trapezoid quadrature.
cdouble vm_moment_quadrature(unsigned n, double mu, double kappa, std::size_t points = 1u << 14);

/// Draw from VM(mu, kappa) (Best and Fisher, 1979).
double sample_von_mises(double mu, double kappa, std::mt19937_64& rng);

/// Entry-by-entry transcription of the eta tensor.
SpectralTensor eta_literal(std::size_t k, const SpectralTensor& y, const ComponentState& state,
                           const ModelParams& params);

/// theta-dependent part of E_q[ln p(Y | w, theta)] with theta_k pinned to
/// `theta` and every other factor averaged under q.
double expected_loglik(std::size_t k, const std::vector<double>& theta, const SpectralTensor& y,
                       const ComponentState& state, const ModelParams& params);

/// J and h by explicit loops over the atoms.
JhCache jh_direct(const ComponentState& state, const SpectralTensor& y);

/// Variational bound over (w, s) for fixed q(theta), evaluated term by term
/// at the Gaussian factor with the given mean/covariance.
double elbo_ws(const std::vector<bool>& s, const Eigen::VectorXcd& mean, const Eigen::MatrixXcd& cov,
               const JhCache& jh, const ModelParams& params);

/// elbo_ws at the analytic Gaussian maximizer for support s.
double elbo_ws_optimal(const std::vector<bool>& s, const JhCache& jh, const ModelParams& params);

/// For |S| = 1: log of the integral over the weight by 2-D real quadrature
/// plus the support prior; equals elbo_ws_optimal up to one s-free constant.
double log_evidence_singleton(std::size_t k, const JhCache& jh, const ModelParams& params,
                              std::size_t points = 801);

struct ExhaustiveBest {
  std::vector<bool> s;
  double value = 0.0;
};

/// Maximizes elbo_ws_optimal over all 2^N supports.
ExhaustiveBest exhaustive_support(const JhCache& jh, const ModelParams& params);

/// Monte-Carlo estimate of E_q ||Y - sum_k w_k A(theta_k)||_F^2 and its
/// standard error.
struct MonteCarlo {
  double mean = 0.0;
  double std_error = 0.0;
};
MonteCarlo residual_power_mc(const ComponentState& state, const SpectralTensor& y, std::size_t draws,
                             std::uint64_t seed);

/// First trigonometric moments E[exp(j theta_d)] of exp(f)/Z with
/// f = sum Re{eta a}, by trapezoid quadrature on a full-torus grid (D = 1 or 2).
/// Atom exponents count from `origin` (empty: zero).
std::vector<cdouble> coherent_moments_quadrature(const SpectralTensor& eta, std::size_t points,
                                                 const std::vector<double>& origin = {});

/// Peak of the noncoherent log-density |sum conj(Y) a|^2 of a 2-D tensor:
/// dense local search refined by Newton iterations on direct evaluation.
std::vector<double> noncoherent_peak(const SpectralTensor& y, const std::vector<double>& start);

}  // namespace mdvalse::oracle
