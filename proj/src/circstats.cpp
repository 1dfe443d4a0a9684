#include "mdvalse/circstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdvalse {
namespace {

void check_kappa(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("concentration must be finite and non-negative");
}

// I1/I0 by direct power series; accurate while the terms stay representable.
double resultant_series(double kappa) {
  const double q = 0.25 * kappa * kappa;
  double term0 = 1.0, term1 = 1.0;
  double s0 = 1.0, s1 = 1.0;
  for (int k = 1; k < 200; ++k) {
    term0 *= q / (static_cast<double>(k) * k);
    term1 *= q / (static_cast<double>(k) * (k + 1));
    s0 += term0;
    s1 += term1;
    if (term0 < 1e-17 * s0 && term1 < 1e-17 * s1) break;
  }
  return 0.5 * kappa * s1 / s0;
}

// Past this argument (and 2 n^2) the large-argument expansion is used.
constexpr double kAsymptoticKappa = 500.0;

// Scaled large-argument series e^{-x} sqrt(2 pi x) I_nu(x).
double hankel_series(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term)) break;  // series turned divergent
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Successive ratios I_m / I_{m-1}, m = 1..n_max.
std::vector<double> successive_ratios(std::size_t n_max, double kappa) {
  std::vector<double> r(n_max + 1, 0.0);
  if (kappa == 0.0 || n_max == 0) return r;
  const double n2 = static_cast<double>(n_max) * static_cast<double>(n_max);
  if (kappa >= kAsymptoticKappa && kappa >= 2.0 * n2) {
    double prev = hankel_series(0.0, kappa);
    for (std::size_t m = 1; m <= n_max; ++m) {
      const double cur = hankel_series(static_cast<double>(m), kappa);
      r[m] = cur / prev;
      prev = cur;
    }
    return r;
  }
  // Starting-guess error is damped by prod r_m^2 ~ exp(-(L^2 - n^2) / kappa).
  const std::size_t depth = n_max + 16 + static_cast<std::size_t>(std::ceil(8.0 * std::sqrt(kappa)));
  const double top = static_cast<double>(depth) + 1.5;
  double next = kappa / (top + std::sqrt(top * top + kappa * kappa));
  for (std::size_t m = depth; m >= 1; --m) {
    next = kappa / (2.0 * static_cast<double>(m) + kappa * next);
    if (m <= n_max) r[m] = next;
  }
  return r;
}

}  // namespace

VonMisesProduct::VonMisesProduct(std::vector<double> m, std::vector<double> k)
    : mu(std::move(m)), kappa(std::move(k)) {
  if (mu.size() != kappa.size()) throw std::invalid_argument("mu/kappa length mismatch");
  for (double& x : mu) x = wrap_angle(x);
  for (double& x : kappa) {
    check_kappa(x);
    x = std::min(x, kKappaMax);
  }
}

double mean_resultant(double kappa) {
  check_kappa(kappa);
  if (kappa == 0.0) return 0.0;
  if (kappa <= 10.0) return resultant_series(kappa);
  return successive_ratios(1, std::min(kappa, kKappaMax))[1];
}

double mean_resultant_inverse(double r) {
  if (!(r >= 0.0) || !(r < 1.0)) throw std::invalid_argument("mean resultant must lie in [0, 1)");
  if (r == 0.0) return 0.0;
  if (r >= mean_resultant(kKappaMax)) return kKappaMax;

  // Banerjee et al. closed form as the starting point.
  double kappa = std::clamp(r * (2.0 - r * r) / (1.0 - r * r), 0.0, kKappaMax);
  double lo = 0.0, hi = kKappaMax;
  for (int it = 0; it < 200; ++it) {
    const double a = mean_resultant(kappa);
    const double f = a - r;
    if (f == 0.0) break;
    if (f < 0.0) lo = kappa; else hi = kappa;
    const double slope = kappa > 0.0 ? 1.0 - a / kappa - a * a : 0.5;
    double next = slope > 0.0 ? kappa - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (std::abs(next - kappa) <= 1e-15 * std::max(1.0, kappa)) {
      kappa = next;
      break;
    }
    kappa = next;
  }
  return kappa;
}

std::vector<double> bessel_ratios(std::size_t n_max, double kappa) {
  check_kappa(kappa);
  kappa = std::min(kappa, kKappaMax);
  const auto r = successive_ratios(n_max, kappa);
  std::vector<double> out(n_max + 1);
  out[0] = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) out[n] = out[n - 1] * r[n];
  return out;
}

double bessel_ratio(std::size_t n, double kappa) { return bessel_ratios(n, kappa)[n]; }

cdouble vm_trig_moment(const VonMisesProduct& vm, std::span<const std::size_t> orders) {
  if (orders.size() != vm.rank()) throw std::invalid_argument("order vector rank mismatch");
  cdouble out = 1.0;
  for (std::size_t d = 0; d < vm.rank(); ++d) {
    const double n = static_cast<double>(orders[d]);
    out *= bessel_ratio(orders[d], vm.kappa[d]) * std::polar(1.0, n * vm.mu[d]);
  }
  return out;
}

SpectralTensor vm_mean_atom(const Shape& shape, const VonMisesProduct& vm, std::span<const double> origin) {
  if (vm.rank() != shape.rank()) throw std::invalid_argument("von Mises rank mismatch");
  if (!origin.empty() && origin.size() != shape.rank()) throw std::invalid_argument("origin rank mismatch");
  std::vector<std::vector<cdouble>> factors(shape.rank());
  for (std::size_t d = 0; d < shape.rank(); ++d) {
    const double c = origin.empty() ? 0.0 : origin[d];
    if (c != std::floor(c) || c < 0.0 || c >= static_cast<double>(shape[d]))
      throw std::invalid_argument("origin must be a sample position");
    const auto lo = static_cast<std::size_t>(c);
    const auto ratios = bessel_ratios(std::max(lo, shape[d] - 1 - lo), vm.kappa[d]);
    factors[d].resize(shape[d]);
    for (std::size_t i = 0; i < shape[d]; ++i) {
      const std::size_t order = i >= lo ? i - lo : lo - i;
      factors[d][i] = ratios[order] * std::polar(1.0, (static_cast<double>(i) - c) * vm.mu[d]);
    }
  }
  return separable_product(shape, factors);
}

VonMisesProduct project_grid_to_vm(std::span<const double> log_density,
                                   const std::vector<std::vector<double>>& grid_angles) {
  const std::size_t rank = grid_angles.size();
  if (rank == 0) throw std::invalid_argument("grid must have at least one dimension");
  std::size_t total = 1;
  for (const auto& g : grid_angles) {
    if (g.size() < 2) throw std::invalid_argument("grid needs at least two points per dimension");
    total *= g.size();
  }
  if (log_density.size() != total) throw std::invalid_argument("grid value count mismatch");

  double peak = -std::numeric_limits<double>::infinity();
  for (double v : log_density) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw std::invalid_argument("log-density contains non-finite values");
    peak = std::max(peak, v);
  }
  if (!std::isfinite(peak)) throw std::invalid_argument("log-density is -inf everywhere");

  std::vector<std::vector<cdouble>> phasors(rank);
  for (std::size_t d = 0; d < rank; ++d)
    for (double a : grid_angles[d]) phasors[d].push_back(std::polar(1.0, a));

  std::vector<cdouble> moment(rank, cdouble{});
  double mass = 0.0;
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t n = 0; n < total; ++n) {
    const double p = std::exp(log_density[n] - peak);
    mass += p;
    for (std::size_t d = 0; d < rank; ++d) moment[d] += p * phasors[d][idx[d]];
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < grid_angles[d].size()) break;
      idx[d] = 0;
    }
  }

  std::vector<double> mu(rank), kappa(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    const cdouble r = moment[d] / mass;
    mu[d] = std::arg(r);
    kappa[d] = mean_resultant_inverse(std::min(std::abs(r), kResultantClamp));
  }
  return VonMisesProduct(std::move(mu), std::move(kappa));
}

std::vector<double> hessian_to_kappa(std::span<const double> hess_inv_diag, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("matching constant must be positive");
  std::vector<double> kappa;
  kappa.reserve(hess_inv_diag.size());
  for (double h : hess_inv_diag) {
    if (!(h < 0.0)) throw std::domain_error("inverse Hessian diagonal must be strictly negative");
    kappa.push_back(mean_resultant_inverse(std::min(std::exp(c * h), kResultantClamp)));
  }
  return kappa;
}

}  // namespace mdvalse
