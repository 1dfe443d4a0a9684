#include "mdvalse/inference.hpp"

#include <algorithm>
#include <cmath>

#include "mdvalse/kernels.hpp"
#include "mdvalse/ndfft.hpp"

namespace mdvalse {
namespace {

// Mean of the lowest quartile of Exp(1) samples: 1 - 3 ln(4/3).
const double kLowQuartileMean = 1.0 - 3.0 * std::log(4.0 / 3.0);

// nu is never allowed below this fraction of the mean sample power.
constexpr double kNuFloor = 1e-16;

constexpr std::size_t kInitSweeps = 10;

double clamp_rho(double rho, std::size_t budget) {
  const double edge = 1.0 / (10.0 * static_cast<double>(budget));
  return std::clamp(rho, edge, 1.0 - edge);
}

// Relative change of successive reconstructions; 0/0 counts as converged.
double relative_change(const SpectralTensor& prev, const SpectralTensor& next) {
  const double denom = prev.norm_sq();
  const double diff = (prev - next).norm_sq();
  if (denom == 0.0) return diff == 0.0 ? 0.0 : 1.0;
  return std::sqrt(diff / denom);
}

}  // namespace

void ModelParams::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("nu must be positive and finite");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive and finite");
}

void EstimateOptions::validate() const {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iters == 0) throw std::invalid_argument("max_iters must be at least 1");
  if (!(kappa_const > 0.0)) throw std::invalid_argument("kappa constant must be positive");
}

ComponentState::ComponentState(Shape s, std::size_t n)
    : shape(std::move(s)), budget(n), origin(shape.rank()), active(n, false), vm(n), atoms(n) {
  if (n == 0) throw std::invalid_argument("component budget must be positive");
  for (std::size_t d = 0; d < shape.rank(); ++d) origin[d] = static_cast<double>((shape[d] - 1) / 2);
  const VonMisesProduct flat(std::vector<double>(shape.rank(), 0.0), std::vector<double>(shape.rank(), 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    vm[k] = flat;
    atoms[k] = vm_mean_atom(shape, flat, origin);
  }
}

std::optional<std::size_t> ComponentState::position(std::size_t k) const {
  const auto it = std::find(support.begin(), support.end(), k);
  if (it == support.end()) return std::nullopt;
  return static_cast<std::size_t>(it - support.begin());
}

void ComponentState::refresh_atom(std::size_t k) { atoms[k] = vm_mean_atom(shape, vm[k], origin); }

cdouble ComponentState::origin_phase(const std::vector<double>& theta) const {
  double phase = 0.0;
  for (std::size_t d = 0; d < origin.size(); ++d) phase += origin[d] * theta[d];
  return std::polar(1.0, -phase);
}

ModelParams init_model_params(const SpectralTensor& y, std::size_t budget) {
  if (budget == 0) throw std::invalid_argument("component budget must be positive");
  if (y.is_zero()) throw std::invalid_argument("cannot initialize from an all-zero tensor");
  const Shape& shape = y.shape();
  std::size_t axis = 0;
  for (std::size_t d = 1; d < shape.rank(); ++d)
    if (shape[d] > shape[axis]) axis = d;
  const std::size_t len = shape[axis];
  const std::size_t stride = shape.stride(axis);

  // Pool the periodogram bins of every fiber along the longest axis. A Hann
  // taper keeps the sidelobes of strong tones out of the low quartile.
  std::vector<double> taper(len);
  double taper_power = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double s = std::sin(kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(len));
    taper[i] = s * s;
    taper_power += taper[i] * taper[i];
  }
  std::vector<double> bins;
  bins.reserve(y.size());
  std::vector<cdouble> fiber(len);
  for (std::size_t base = 0; base < y.size(); ++base) {
    if ((base / stride) % len != 0) continue;
    for (std::size_t i = 0; i < len; ++i) fiber[i] = taper[i] * y[base + i * stride];
    const auto p = periodogram_1d(fiber);
    bins.insert(bins.end(), p.begin(), p.end());
  }
  const std::size_t quarter = std::max<std::size_t>(1, bins.size() / 4);
  std::nth_element(bins.begin(), bins.begin() + static_cast<std::ptrdiff_t>(quarter - 1), bins.end());
  std::sort(bins.begin(), bins.begin() + static_cast<std::ptrdiff_t>(quarter));
  double low = 0.0;
  for (std::size_t i = 0; i < quarter; ++i) low += bins[i];
  low /= static_cast<double>(quarter);
  low *= static_cast<double>(len) / taper_power;

  const double mean_power = y.norm_sq() / static_cast<double>(y.size());
  ModelParams p;
  p.rho = 0.5;
  p.nu = std::max(low / kLowQuartileMean, 1e-10 * mean_power);
  p.tau = std::max(mean_power - p.nu, p.nu) / (p.rho * static_cast<double>(budget));
  return p;
}

ComponentState init_components(const SpectralTensor& y, const ModelParams& params, double gamma,
                               std::size_t budget) {
  params.validate();
  ComponentState state(y.shape(), budget);
  const double total = static_cast<double>(y.size());
  SpectralTensor residual = y;

  // The bootstrap noise level overstates nu badly when every fiber carries
  // every sinusoid, which flattens the later peaks. Each step uses the
  // residual power instead, never above the bootstrap value.
  const double nu_floor = kNuFloor * y.norm_sq() / total;
  ModelParams local = params;
  for (std::size_t k = 0; k < budget; ++k) {
    local.nu = std::min(params.nu, std::max(residual.norm_sq() / total, nu_floor));
    if (!(local.nu > 0.0)) local.nu = params.nu;
    state.vm[k] = project_noncoherent(residual, local.nu, gamma);
    state.refresh_atom(k);

    Eigen::VectorXcd j(static_cast<Eigen::Index>(state.support.size()));
    for (std::size_t p = 0; p < state.support.size(); ++p)
      j(static_cast<Eigen::Index>(p)) = conj_inner(state.atoms[state.support[p]], state.atoms[k]);
    const cdouble hk = conj_inner(state.atoms[k], y);
    const FlipCandidate cand = activation_candidate(state.weights, j, total, hk, local);
    apply_activation(state.weights, j, cand, local);
    state.support.push_back(k);
    state.active[k] = true;
    state.weights = update_weights(compute_Jh(state, y), local, state.support);

    // Cyclic refinement of everything found so far; close pairs are not
    // separable from the residual peak alone.
    for (std::size_t sweep = 0; sweep < kInitSweeps; ++sweep) {
      for (std::size_t i : state.support) update_frequency(i, compute_eta(i, y, state, local), state);
      state.weights = update_weights(compute_Jh(state, y), local, state.support);
    }

    residual = y;
    residual -= reconstruct(state);
  }
  return state;
}

ModelParams update_model_params(const ComponentState& state, const JhCache& jh,
                                const SpectralTensor& y, const ModelParams& previous) {
  const double total = static_cast<double>(y.size());
  const double floor = kNuFloor * y.norm_sq() / total;
  const std::size_t n = state.budget;
  ModelParams next = previous;

  if (state.support.empty()) {
    next.nu = std::max(y.norm_sq() / total, floor);
    next.rho = clamp_rho(0.0, n);
    return next;
  }

  // Same quantity as w^H J w + ||Y||^2 + tr(J C) - 2 Re(w^H h), arranged as
  // a sum of non-negative terms.
  SpectralTensor resid = y;
  resid -= reconstruct(state);
  double power = resid.norm_sq();
  const auto m = static_cast<Eigen::Index>(state.support.size());
  Eigen::MatrixXcd j_s(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const std::size_t ka = state.support[static_cast<std::size_t>(a)];
    power += std::norm(state.weights.mean(a)) * (total - state.atoms[ka].norm_sq());
    for (Eigen::Index b = 0; b < m; ++b)
      j_s(a, b) = jh.J(static_cast<Eigen::Index>(ka), static_cast<Eigen::Index>(state.support[static_cast<std::size_t>(b)]));
  }
  power += (j_s * state.weights.cov).trace().real();

  next.nu = std::max(power / total, floor);
  next.rho = clamp_rho(static_cast<double>(m) / static_cast<double>(n), n);
  next.tau = (state.weights.mean.squaredNorm() + state.weights.cov.trace().real()) / static_cast<double>(m);
  if (!(next.tau > 0.0) || !std::isfinite(next.tau)) next.tau = previous.tau;
  return next;
}

SpectralTensor reconstruct(const ComponentState& state) {
  SpectralTensor x(state.shape);
  if (state.support.empty()) return x;
  std::vector<std::span<const cdouble>> terms;
  std::vector<cdouble> coeffs;
  for (std::size_t p = 0; p < state.support.size(); ++p) {
    terms.push_back(state.atoms[state.support[p]].values());
    coeffs.push_back(state.weights.mean(static_cast<Eigen::Index>(p)));
  }
  kernels::parallel::linear_combination(terms, coeffs, false, x.values());
  return x;
}

namespace {

EstimationResult collect(const ComponentState& state, const ModelParams& params) {
  EstimationResult r;
  r.k_hat = state.support.size();
  r.params = params;
  r.x_hat = reconstruct(state);
  for (std::size_t p = 0; p < state.support.size(); ++p) {
    const auto& vm = state.vm[state.support[p]];
    const cdouble w = state.weights.mean(static_cast<Eigen::Index>(p)) * state.origin_phase(vm.mu);
    r.components.push_back({w, vm.mu, vm.kappa});
  }
  return r;
}

}  // namespace

EstimationResult estimate(const SpectralTensor& y, const EstimateOptions& options) {
  options.validate();
  const std::size_t budget = options.budget ? options.budget : y.shape().min_dim();

  if (y.is_zero()) {
    EstimationResult r;
    r.x_hat = SpectralTensor(y.shape());
    r.params = {0.0, 1.0 / (10.0 * static_cast<double>(budget)), 0.0};
    r.converged = true;
    r.status = "zero input";
    return r;
  }

  ModelParams params = init_model_params(y, budget);
  ComponentState state = init_components(y, params, options.gamma, budget);
  SpectralTensor x_prev = reconstruct(state);

  const FrequencyUpdateOptions freq_opts{options.kappa_const, 10};
  std::vector<double> trace;
  bool converged = false;
  std::string status = "ok";
  std::size_t t = 0;

  try {
    while (t < options.max_iters) {
      ++t;
      for (std::size_t k : state.support) {
        const SpectralTensor eta = compute_eta(k, y, state, params);
        update_frequency(k, eta, state, freq_opts);
      }
      const JhCache jh = compute_Jh(state, y);
      SupportUpdate sup = greedy_support_update(state, jh, params, options.perturb_support_delta);
      state.active = std::move(sup.active);
      state.support = std::move(sup.support);
      state.weights = update_weights(jh, params, state.support);
      params = update_model_params(state, jh, y, params);

      SpectralTensor x = reconstruct(state);
      const double change = relative_change(x_prev, x);
      trace.push_back(change);
      x_prev = std::move(x);
      if (change < options.tol) {
        converged = true;
        break;
      }
    }
  } catch (const NumericalError& e) {
    status = std::string("numerical failure: ") + e.what();
  }

  EstimationResult r = collect(state, params);
  r.iterations = t;
  r.converged = converged;
  r.trace = std::move(trace);
  r.status = std::move(status);
  return r;
}

}  // namespace mdvalse
