#include <algorithm>
#include <cmath>

#include "mdvalse/inference.hpp"
#include "mdvalse/kernels.hpp"
#include "mdvalse/ndfft.hpp"

namespace mdvalse {
namespace {

// Cells and resolution of the local grid used when the Hessian is indefinite.
constexpr int kFallbackHalfWidth = 3;
constexpr double kFallbackRefine = 32.0;

struct Curvature {
  bool negative_definite = false;
  Eigen::MatrixXd inverse;  // H^{-1}, valid when negative_definite
};

Curvature invert_if_negative_definite(const std::vector<double>& hess, std::size_t rank) {
  Eigen::MatrixXd neg(static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(rank));
  for (std::size_t d = 0; d < rank; ++d)
    for (std::size_t e = 0; e < rank; ++e)
      neg(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(e)) = -hess[d * rank + e];
  Curvature c;
  Eigen::LLT<Eigen::MatrixXd> llt(neg);
  if (llt.info() != Eigen::Success) return c;
  Eigen::MatrixXd inv = -llt.solve(Eigen::MatrixXd::Identity(neg.rows(), neg.cols()));
  if (!inv.allFinite() || (inv.diagonal().array() >= 0.0).any()) return c;
  c.negative_definite = true;
  c.inverse = std::move(inv);
  return c;
}

// Moment-matches exp(f) on a small grid centred on `center`.
std::vector<double> local_grid_kappa(std::span<const cdouble> eta, const Shape& shape,
                                     const std::vector<double>& origin, const std::vector<double>& center) {
  const std::size_t rank = shape.rank();
  const std::size_t side = 2 * kFallbackHalfWidth + 1;
  std::vector<std::vector<double>> angles(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    const double step = kTwoPi / (kFallbackRefine * static_cast<double>(shape[d]));
    for (int o = -kFallbackHalfWidth; o <= kFallbackHalfWidth; ++o)
      angles[d].push_back(center[d] + o * step);
  }
  std::size_t total = 1;
  for (std::size_t d = 0; d < rank; ++d) total *= side;
  std::vector<double> logp(total);
  std::vector<double> theta(rank);
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t d = 0; d < rank; ++d) theta[d] = angles[d][idx[d]];
    logp[n] = kernels::parallel::coherent_value(eta, shape.dims(), theta, origin);
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < side) break;
      idx[d] = 0;
    }
  }
  return project_grid_to_vm(logp, angles).kappa;
}

}  // namespace

SpectralTensor compute_eta(std::size_t k, const SpectralTensor& y, const ComponentState& state,
                           const ModelParams& params) {
  const auto pos = state.position(k);
  if (!pos) throw std::invalid_argument("compute_eta: component is not active");
  const auto pk = static_cast<Eigen::Index>(*pos);
  const cdouble wk = state.weights.mean(pk);

  std::vector<std::span<const cdouble>> terms{y.values()};
  std::vector<cdouble> coeffs{wk};
  for (std::size_t p = 0; p < state.support.size(); ++p) {
    const auto pi = static_cast<Eigen::Index>(p);
    if (pi == pk) continue;
    // E[conj(w_i) w_k] = C_{k,i} + w_k conj(w_i)
    const cdouble second = state.weights.cov(pk, pi) + wk * std::conj(state.weights.mean(pi));
    terms.push_back(state.atoms[state.support[p]].values());
    coeffs.push_back(-second);
  }
  SpectralTensor eta(y.shape());
  kernels::parallel::linear_combination(terms, coeffs, true, eta.values());
  eta *= 2.0 / params.nu;
  return eta;
}

VonMisesProduct update_frequency(std::size_t k, const SpectralTensor& eta, ComponentState& state,
                                 const FrequencyUpdateOptions& opts) {
  if (!state.position(k)) throw std::invalid_argument("update_frequency: component is not active");
  const Shape& shape = state.shape;
  const std::size_t rank = shape.rank();
  const std::vector<double> start = state.vm[k].mu;

  // eta carried only by the origin sample makes f constant.
  MultiIndex centre(rank);
  for (std::size_t d = 0; d < rank; ++d) centre[d] = static_cast<std::size_t>(state.origin[d]);
  const std::size_t centre_flat = shape.flat(centre);
  bool flat = true;
  for (std::size_t i = 0; i < eta.size() && flat; ++i) flat = i == centre_flat || eta[i] == cdouble{};
  if (flat) {
    state.vm[k] = VonMisesProduct(start, std::vector<double>(rank, 0.0));
    state.refresh_atom(k);
    return state.vm[k];
  }

  const auto dims = shape.dims();
  const auto here = kernels::parallel::coherent_sums(eta.values(), dims, start, state.origin);
  std::vector<double> theta = start;

  const Curvature c0 = invert_if_negative_definite(here.hess, rank);
  if (c0.negative_definite) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(rank));
    for (std::size_t d = 0; d < rank; ++d) g(static_cast<Eigen::Index>(d)) = here.grad[d];
    const Eigen::VectorXd step = -c0.inverse * g;
    double scale = 1.0;
    std::vector<double> trial(rank);
    for (int h = 0; h <= opts.max_halvings; ++h, scale *= 0.5) {
      for (std::size_t d = 0; d < rank; ++d) trial[d] = start[d] + scale * step(static_cast<Eigen::Index>(d));
      if (kernels::parallel::coherent_value(eta.values(), dims, trial, state.origin) >= here.value) {
        theta = trial;
        break;
      }
    }
  }

  const auto there = kernels::parallel::coherent_sums(eta.values(), dims, theta, state.origin);
  const Curvature c1 = invert_if_negative_definite(there.hess, rank);
  if (c1.negative_definite) {
    std::vector<double> diag(rank);
    for (std::size_t d = 0; d < rank; ++d)
      diag[d] = c1.inverse(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    state.vm[k] = VonMisesProduct(theta, hessian_to_kappa(diag, opts.kappa_const));
  } else {
    state.vm[k] = VonMisesProduct(start, local_grid_kappa(eta.values(), shape, state.origin, start));
  }

  state.refresh_atom(k);
  return state.vm[k];
}

VonMisesProduct project_noncoherent(const SpectralTensor& residual, double nu, double gamma) {
  if (!(nu > 0.0)) throw std::invalid_argument("noise variance must be positive");
  const std::size_t rank = residual.shape().rank();
  if (residual.is_zero()) return VonMisesProduct(std::vector<double>(rank, 0.0), std::vector<double>(rank, 0.0));

  const FreqGrid grid = correlate_grid(residual, gamma);
  const GridPeak peak = periodogram_peak(grid);
  const double scale = 1.0 / (nu * static_cast<double>(grid.sample_count));

  const auto half = static_cast<long>(std::ceil(gamma));
  std::vector<std::vector<std::size_t>> bins(rank);
  std::vector<std::vector<double>> angles(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    const auto g = static_cast<long>(grid.sizes[d]);
    const long w = std::min(half, (g - 1) / 2);
    const double step = kTwoPi / static_cast<double>(g);
    for (long o = -w; o <= w; ++o) {
      bins[d].push_back(static_cast<std::size_t>(((static_cast<long>(peak.bin[d]) + o) % g + g) % g));
      angles[d].push_back(peak.angles[d] + static_cast<double>(o) * step);
    }
  }

  std::size_t total = 1;
  for (const auto& b : bins) total *= b.size();
  const Shape grid_shape(grid.sizes);
  std::vector<double> logp(total);
  std::vector<std::size_t> local(rank, 0);
  MultiIndex global(rank);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t d = 0; d < rank; ++d) global[d] = bins[d][local[d]];
    logp[n] = std::norm(grid.values[grid_shape.flat(global)]) * scale;
    for (std::size_t d = rank; d-- > 0;) {
      if (++local[d] < bins[d].size()) break;
      local[d] = 0;
    }
  }
  return project_grid_to_vm(logp, angles);
}

}  // namespace mdvalse
