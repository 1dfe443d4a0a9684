#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdvalse/circstats.hpp"
#include "mdvalse/tensor.hpp"

namespace mdvalse {

/// Hyperparameters: noise variance nu, activation probability rho, prior
/// weight variance tau.
struct ModelParams {
  double nu = 1.0;
  double rho = 0.5;
  double tau = 1.0;

  void validate() const;
};

/// Gaussian posterior of the active weights, indexed like the support list.
struct WeightPosterior {
  Eigen::VectorXcd mean;
  Eigen::MatrixXcd cov;
};

/// Variational state of all N budgeted components.
struct ComponentState {
  ComponentState() = default;
  ComponentState(Shape shape, std::size_t budget);

  Shape shape;
  std::size_t budget = 0;
  /// Sample position the atom exponents count from, floor((M_d - 1) / 2).
  /// Centring the phase reference decouples each weight's phase from its
  /// frequency; the weights here are w_k exp(j origin . theta_k).
  std::vector<double> origin;
  std::vector<bool> active;             // s
  std::vector<std::size_t> support;     // {k : s_k}, ascending
  std::vector<VonMisesProduct> vm;      // q(theta_k), all k
  std::vector<SpectralTensor> atoms;    // E[a(M, theta_k)], all k
  WeightPosterior weights;              // over `support`

  std::size_t order() const noexcept { return support.size(); }
  std::optional<std::size_t> position(std::size_t k) const;

  /// Re-derives the cached posterior-mean atom of component k from vm[k].
  void refresh_atom(std::size_t k);

  /// exp(-j origin . theta), mapping a weight here back to the plain atom.
  cdouble origin_phase(const std::vector<double>& theta) const;
};

/// J_ij = prod M (i = j) or sum conj(a_i) a_j; h_i = sum Y conj(a_i).
struct JhCache {
  Eigen::MatrixXcd J;
  Eigen::VectorXcd h;
};

struct EstimatedComponent {
  cdouble weight;
  std::vector<double> theta;
  std::vector<double> kappa;
};

struct EstimationResult {
  std::size_t k_hat = 0;
  std::vector<EstimatedComponent> components;
  SpectralTensor x_hat;
  ModelParams params;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> trace;
  std::string status = "ok";  // or a description of a numerical failure
};

struct EstimateOptions {
  double gamma = 8.0;
  std::size_t budget = 0;  // 0: min_d M_d
  double tol = 1e-6;
  std::size_t max_iters = 500;
  double kappa_const = 0.5;
  /// Negative control for the self-check: drops the log-determinant term of
  /// the activation score.
  bool perturb_support_delta = false;

  void validate() const;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Initialization

/// Hyperparameter bootstrap from the 1-D fibers along the longest dimension.
ModelParams init_model_params(const SpectralTensor& y, std::size_t budget);

/// Projects the noncoherent density exp(|sum conj(R) a|^2 / (nu prod M)) of
/// a residual R onto von Mises factors, using a +-ceil(gamma)-bin window
/// around the oversampled-FFT peak.
VonMisesProduct project_noncoherent(const SpectralTensor& residual, double nu, double gamma);

ComponentState init_components(const SpectralTensor& y, const ModelParams& params, double gamma,
                               std::size_t budget);

// Frequency step

SpectralTensor compute_eta(std::size_t k, const SpectralTensor& y, const ComponentState& state,
                           const ModelParams& params);

struct FrequencyUpdateOptions {
  double kappa_const = 0.5;
  int max_halvings = 10;
};

/// One damped Newton step on f(theta) = sum Re{eta a(M, theta)} followed by
/// the von Mises projection. Updates state.vm[k] and the cached atom.
VonMisesProduct update_frequency(std::size_t k, const SpectralTensor& eta, ComponentState& state,
                                 const FrequencyUpdateOptions& opts = {});

// Weights and support

JhCache compute_Jh(const ComponentState& state, const SpectralTensor& y);

WeightPosterior update_weights(const JhCache& jh, const ModelParams& params,
                               const std::vector<std::size_t>& support);

double support_objective(const std::vector<bool>& s, const JhCache& jh, const ModelParams& params);

/// Single-flip score change and the rank-one quantities behind it.
struct FlipCandidate {
  double delta = 0.0;
  double v = 0.0;   // posterior variance of the flipped weight
  cdouble u{};      // its posterior mean
};

FlipCandidate activation_candidate(const WeightPosterior& post, const Eigen::VectorXcd& j_col,
                                   double j_kk, cdouble h_k, const ModelParams& params,
                                   bool drop_logdet = false);
double deactivation_delta(const WeightPosterior& post, std::size_t pos, const ModelParams& params);

/// Appends the flipped component as the last posterior coordinate.
void apply_activation(WeightPosterior& post, const Eigen::VectorXcd& j_col,
                      const FlipCandidate& cand, const ModelParams& params);
void apply_deactivation(WeightPosterior& post, std::size_t pos);

/// Score change of flipping each k given the current support.
std::vector<double> flip_deltas(const std::vector<std::size_t>& support, const WeightPosterior& post,
                                const JhCache& jh, const ModelParams& params,
                                bool drop_logdet = false);

struct SupportUpdate {
  std::vector<bool> active;
  std::vector<std::size_t> support;
  WeightPosterior weights;
  std::size_t flips = 0;
};

SupportUpdate greedy_support_update(const ComponentState& state, const JhCache& jh,
                                    const ModelParams& params, bool drop_logdet = false);

// Hyperparameters, reconstruction, driver

ModelParams update_model_params(const ComponentState& state, const JhCache& jh,
                                const SpectralTensor& y, const ModelParams& previous);

SpectralTensor reconstruct(const ComponentState& state);

EstimationResult estimate(const SpectralTensor& y, const EstimateOptions& options = {});

}  // namespace mdvalse
