#include "mdvalse/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace mdvalse::oracle {
namespace {

double phase_of(const MultiIndex& idx, const std::vector<double>& theta, const std::vector<double>& origin = {}) {
  double p = 0.0;
  for (std::size_t d = 0; d < idx.size(); ++d)
    p += (static_cast<double>(idx[d]) - (origin.empty() ? 0.0 : origin[d])) * theta[d];
  return p;
}

std::vector<std::size_t> support_of(const std::vector<bool>& s) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s[k]) out.push_back(k);
  return out;
}

}  // namespace

cdouble direct_correlation(const SpectralTensor& y, const std::vector<double>& theta) {
  cdouble acc{};
  const auto indices = multi_indices(y.shape());
  for (std::size_t n = 0; n < indices.size(); ++n)
    acc += std::conj(y[n]) * std::exp(cdouble(0.0, phase_of(indices[n], theta)));
  return acc;
}

double bessel_ratio_series(unsigned n, double kappa) {
  if (kappa == 0.0) return n == 0 ? 1.0 : 0.0;
  const long double half = 0.5L * kappa;
  auto series = [&](unsigned order) {
    long double term = 1.0L;
    for (unsigned i = 1; i <= order; ++i) term *= half / i;  // (k/2)^n / n!
    long double sum = term;
    for (unsigned k = 1; k < 2000; ++k) {
      term *= half * half / (static_cast<long double>(k) * (k + order));
      sum += term;
      if (term < 1e-22L * sum) break;
    }
    return sum;
  };
  return static_cast<double>(series(n) / series(0));
}

cdouble vm_moment_quadrature(unsigned n, double mu, double kappa, std::size_t points) {
  cdouble num{};
  double den = 0.0;
  for (std::size_t g = 0; g < points; ++g) {
    const double t = -kPi + kTwoPi * static_cast<double>(g) / static_cast<double>(points);
    const double w = std::exp(kappa * (std::cos(t - mu) - 1.0));
    num += w * std::exp(cdouble(0.0, n * t));
    den += w;
  }
  return num / den;
}

double sample_von_mises(double mu, double kappa, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if (kappa < 1e-8) return wrap_angle(-kPi + kTwoPi * uni(rng));
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng);
    const double z = std::cos(kPi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double theta = mu + (u3 > 0.5 ? 1.0 : -1.0) * std::acos(std::clamp(f, -1.0, 1.0));
      return wrap_angle(theta);
    }
  }
}

SpectralTensor eta_literal(std::size_t k, const SpectralTensor& y, const ComponentState& state,
                           const ModelParams& params) {
  std::size_t pk = state.support.size();
  for (std::size_t p = 0; p < state.support.size(); ++p)
    if (state.support[p] == k) pk = p;
  if (pk == state.support.size()) throw std::invalid_argument("component not active");
  const auto ek = static_cast<Eigen::Index>(pk);
  const cdouble wk = state.weights.mean(ek);
  SpectralTensor eta(y.shape());
  for (std::size_t m = 0; m < y.size(); ++m) {
    cdouble sum{};
    for (std::size_t p = 0; p < state.support.size(); ++p) {
      if (p == pk) continue;
      const auto ei = static_cast<Eigen::Index>(p);
      const cdouble ahat = state.atoms[state.support[p]][m];
      sum += std::conj(ahat) * (state.weights.cov(ek, ei) + wk * std::conj(state.weights.mean(ei)));
    }
    eta[m] = 2.0 / params.nu * (std::conj(y[m]) * wk - sum);
  }
  return eta;
}

double expected_loglik(std::size_t k, const std::vector<double>& theta, const SpectralTensor& y,
                       const ComponentState& state, const ModelParams& params) {
  const auto indices = multi_indices(y.shape());
  const std::size_t n = state.support.size();
  // Second moments E[w_i conj(w_l)].
  const Eigen::MatrixXcd second = state.weights.cov + state.weights.mean * state.weights.mean.adjoint();
  double total = 0.0;
  std::vector<cdouble> a(n);
  for (std::size_t m = 0; m < indices.size(); ++m) {
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t c = state.support[p];
      a[p] = c == k ? std::exp(cdouble(0.0, phase_of(indices[m], theta, state.origin))) : state.atoms[c][m];
    }
    double e = std::norm(y[m]);
    for (std::size_t p = 0; p < n; ++p)
      e -= 2.0 * (std::conj(y[m]) * state.weights.mean(static_cast<Eigen::Index>(p)) * a[p]).real();
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t l = 0; l < n; ++l) {
        const cdouble cross = p == l ? cdouble(1.0) : a[p] * std::conj(a[l]);
        e += (second(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(l)) * cross).real();
      }
    total += e;
  }
  return -total / params.nu;
}

JhCache jh_direct(const ComponentState& state, const SpectralTensor& y) {
  const std::size_t n = state.budget;
  JhCache jh{Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
             Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n))};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cdouble acc{};
      if (i == j) {
        acc = static_cast<double>(y.size());
      } else {
        for (std::size_t m = 0; m < y.size(); ++m) acc += std::conj(state.atoms[i][m]) * state.atoms[j][m];
      }
      jh.J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
    cdouble h{};
    for (std::size_t m = 0; m < y.size(); ++m) h += y[m] * std::conj(state.atoms[i][m]);
    jh.h(static_cast<Eigen::Index>(i)) = h;
  }
  return jh;
}

double elbo_ws(const std::vector<bool>& s, const Eigen::VectorXcd& mean, const Eigen::MatrixXcd& cov,
               const JhCache& jh, const ModelParams& params) {
  const auto support = support_of(s);
  const auto n = static_cast<Eigen::Index>(support.size());
  const double total = static_cast<double>(s.size());
  const double count = static_cast<double>(n);
  double value = count * std::log(params.rho) + (total - count) * std::log(1.0 - params.rho);
  if (n == 0) return value;

  Eigen::MatrixXcd j(n, n);
  Eigen::VectorXcd h(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    h(a) = jh.h(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)]));
    for (Eigen::Index b = 0; b < n; ++b)
      j(a, b) = jh.J(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)]),
                     static_cast<Eigen::Index>(support[static_cast<std::size_t>(b)]));
  }
  // E_q ln p(Y | w), theta-averaged, less the s-free constant.
  const double fit = (j * cov).trace().real() + mean.dot(j * mean).real() - 2.0 * mean.dot(h).real();
  value -= fit / params.nu;
  // E_q ln CN(w; 0, tau I)
  value -= count * std::log(kPi * params.tau) + (cov.trace().real() + mean.squaredNorm()) / params.tau;
  // entropy of CN(mean, cov)
  const double logdet = std::log(cov.determinant().real());
  value += count * std::log(kPi * std::exp(1.0)) + logdet;
  return value;
}

double elbo_ws_optimal(const std::vector<bool>& s, const JhCache& jh, const ModelParams& params) {
  const auto support = support_of(s);
  const auto n = static_cast<Eigen::Index>(support.size());
  if (n == 0) return elbo_ws(s, Eigen::VectorXcd(), Eigen::MatrixXcd(), jh, params);
  Eigen::MatrixXcd precision(n, n);
  Eigen::VectorXcd h(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    h(a) = jh.h(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)]));
    for (Eigen::Index b = 0; b < n; ++b)
      precision(a, b) = jh.J(static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)]),
                             static_cast<Eigen::Index>(support[static_cast<std::size_t>(b)])) /
                        params.nu;
    precision(a, a) += 1.0 / params.tau;
  }
  const Eigen::MatrixXcd cov = precision.fullPivLu().inverse();
  const Eigen::VectorXcd mean = cov * h / params.nu;
  return elbo_ws(s, mean, cov, jh, params);
}

double log_evidence_singleton(std::size_t k, const JhCache& jh, const ModelParams& params,
                              std::size_t points) {
  const auto ek = static_cast<Eigen::Index>(k);
  const double jkk = jh.J(ek, ek).real();
  const cdouble hk = jh.h(ek);
  const double var = 1.0 / (jkk / params.nu + 1.0 / params.tau);
  const cdouble center = var * hk / params.nu;
  const double half = 10.0 * std::sqrt(var / 2.0);
  const double step = 2.0 * half / static_cast<double>(points - 1);

  // log integrand: -(J|w|^2 - 2 Re(conj(w) h)) / nu - |w|^2 / tau - ln(pi tau)
  auto log_f = [&](cdouble w) {
    return -(jkk * std::norm(w) - 2.0 * (std::conj(w) * hk).real()) / params.nu - std::norm(w) / params.tau -
           std::log(kPi * params.tau);
  };
  const double peak = log_f(center);
  double acc = 0.0;
  for (std::size_t a = 0; a < points; ++a)
    for (std::size_t b = 0; b < points; ++b) {
      const cdouble w = center + cdouble(-half + step * a, -half + step * b);
      acc += std::exp(log_f(w) - peak);
    }
  const double total = static_cast<double>(jh.h.size());
  return peak + std::log(acc * step * step) + std::log(params.rho) + (total - 1.0) * std::log(1.0 - params.rho);
}

ExhaustiveBest exhaustive_support(const JhCache& jh, const ModelParams& params) {
  const auto n = static_cast<std::size_t>(jh.h.size());
  if (n > 20) throw std::invalid_argument("exhaustive search limited to N <= 20");
  ExhaustiveBest best;
  best.value = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<bool> s(n);
    for (std::size_t k = 0; k < n; ++k) s[k] = (mask >> k) & 1u;
    const double v = elbo_ws_optimal(s, jh, params);
    if (v > best.value) {
      best.value = v;
      best.s = std::move(s);
    }
  }
  return best;
}

MonteCarlo residual_power_mc(const ComponentState& state, const SpectralTensor& y, std::size_t draws,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const auto indices = multi_indices(y.shape());
  const auto n = static_cast<Eigen::Index>(state.support.size());
  Eigen::MatrixXcd chol = Eigen::MatrixXcd::Zero(n, n);
  if (n > 0) chol = state.weights.cov.llt().matrixL();
  const std::size_t rank = y.shape().rank();

  double sum = 0.0, sum_sq = 0.0;
  std::vector<std::vector<double>> theta(static_cast<std::size_t>(n), std::vector<double>(rank));
  for (std::size_t t = 0; t < draws; ++t) {
    Eigen::VectorXcd z(n);
    for (Eigen::Index a = 0; a < n; ++a) z(a) = cdouble(normal(rng), normal(rng));
    const Eigen::VectorXcd w = state.weights.mean + chol * z;
    for (Eigen::Index a = 0; a < n; ++a) {
      const auto& vm = state.vm[state.support[static_cast<std::size_t>(a)]];
      for (std::size_t d = 0; d < rank; ++d)
        theta[static_cast<std::size_t>(a)][d] = sample_von_mises(vm.mu[d], vm.kappa[d], rng);
    }
    double power = 0.0;
    for (std::size_t m = 0; m < indices.size(); ++m) {
      cdouble r = y[m];
      for (Eigen::Index a = 0; a < n; ++a)
        r -= w(a) * std::exp(cdouble(0.0, phase_of(indices[m], theta[static_cast<std::size_t>(a)], state.origin)));
      power += std::norm(r);
    }
    sum += power;
    sum_sq += power * power;
  }
  const double dn = static_cast<double>(draws);
  MonteCarlo mc;
  mc.mean = sum / dn;
  const double var = std::max(0.0, sum_sq / dn - mc.mean * mc.mean) * dn / (dn - 1.0);
  mc.std_error = std::sqrt(var / dn);
  return mc;
}

namespace {

// f(theta) = Re sum eta[i] exp(j (i - origin).theta) with first and second
// derivatives, by direct summation (D <= 2).
struct TrigPoly {
  double value = 0.0;
  double grad[2] = {0.0, 0.0};
  double hess[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

TrigPoly eval_trig(const SpectralTensor& eta, const double* theta, const double* origin) {
  const std::size_t rank = eta.shape().rank();
  TrigPoly t;
  for (const MultiIndex& m : multi_indices(eta.shape())) {
    double pos[2] = {0.0, 0.0};
    double phase = 0.0;
    for (std::size_t d = 0; d < rank; ++d) {
      pos[d] = static_cast<double>(m[d]) - origin[d];
      phase += pos[d] * theta[d];
    }
    const cdouble e = eta[eta.shape().flat(m)] * std::exp(cdouble(0.0, phase));
    t.value += e.real();
    for (std::size_t d = 0; d < rank; ++d) {
      t.grad[d] -= pos[d] * e.imag();
      for (std::size_t g = 0; g < rank; ++g) t.hess[d][g] -= pos[d] * pos[g] * e.real();
    }
  }
  return t;
}

// Nodes and trapezoid weights on [c - half, c + half], graded by a sinh map
// so the spacing at c is about `fine`.
void graded_nodes(double c, double half, double fine, std::size_t n, std::vector<double>& x,
                  std::vector<double>& w) {
  const double du = 2.0 / static_cast<double>(n - 1);
  auto centre_step = [&](double beta) { return half * du * (beta > 0.0 ? beta / std::sinh(beta) : 1.0); };
  double beta = 0.0;
  if (centre_step(0.0) > fine) {
    double lo = 0.0, hi = 1.0;
    while (centre_step(hi) > fine && hi < 700.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (centre_step(mid) > fine ? lo : hi) = mid;
    }
    beta = hi;
  }
  x.resize(n);
  w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = -1.0 + du * static_cast<double>(i);
    const double edge = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    if (beta > 0.0) {
      x[i] = c + half * std::sinh(beta * u) / std::sinh(beta);
      w[i] = edge * du * half * beta * std::cosh(beta * u) / std::sinh(beta);
    } else {
      x[i] = c + half * u;
      w[i] = edge * du * half;
    }
  }
}

}  // namespace

std::vector<cdouble> coherent_moments_quadrature(const SpectralTensor& eta, std::size_t points,
                                                 const std::vector<double>& origin) {
  const Shape& shape = eta.shape();
  const std::size_t rank = shape.rank();
  if (rank > 2) throw std::invalid_argument("quadrature oracle supports D <= 2");
  if (!origin.empty() && origin.size() != rank) throw std::invalid_argument("origin rank mismatch");
  const double org[2] = {origin.empty() ? 0.0 : origin[0], origin.size() > 1 ? origin[1] : 0.0};
  const double h = kTwoPi / static_cast<double>(points);
  std::vector<double> grid(points);
  for (std::size_t g = 0; g < points; ++g) grid[g] = -kPi + h * static_cast<double>(g);

  const std::size_t m1 = shape[0];
  const std::size_t m2 = rank == 2 ? shape[1] : 1;
  const std::size_t p2 = rank == 2 ? points : 1;

  // partial[i1][g2] = sum_{i2} eta[i1, i2] exp(j (i2 - origin) t2)
  std::vector<cdouble> partial(m1 * p2);
  for (std::size_t i1 = 0; i1 < m1; ++i1)
    for (std::size_t g2 = 0; g2 < p2; ++g2) {
      cdouble acc{};
      for (std::size_t i2 = 0; i2 < m2; ++i2)
        acc += eta[i1 * m2 + i2] *
               (p2 > 1 ? std::exp(cdouble(0.0, (static_cast<double>(i2) - org[1]) * grid[g2])) : cdouble(1.0));
      partial[i1 * p2 + g2] = acc;
    }
  std::vector<double> f(points * p2);
  std::size_t arg = 0;
  for (std::size_t g1 = 0; g1 < points; ++g1)
    for (std::size_t g2 = 0; g2 < p2; ++g2) {
      cdouble acc{};
      for (std::size_t i1 = 0; i1 < m1; ++i1)
        acc += partial[i1 * p2 + g2] * std::exp(cdouble(0.0, (static_cast<double>(i1) - org[0]) * grid[g1]));
      f[g1 * p2 + g2] = acc.real();
      if (acc.real() > f[arg]) arg = g1 * p2 + g2;
    }

  // Mode by Newton from the best node. A peak narrower than the grid is
  // integrated on a graded patch of +-kPatch cells around it.
  constexpr long kPatch = 3;
  constexpr std::size_t kPatchNodes = 401;
  const std::size_t centre[2] = {arg / p2, arg % p2};
  double mode[2] = {grid[centre[0]], rank == 2 ? grid[centre[1]] : 0.0};
  for (int it = 0; it < 50; ++it) {
    const TrigPoly t = eval_trig(eta, mode, org);
    double step[2] = {0.0, 0.0};
    if (rank == 1) {
      if (!(t.hess[0][0] < 0.0)) break;
      step[0] = -t.grad[0] / t.hess[0][0];
    } else {
      const double det = t.hess[0][0] * t.hess[1][1] - t.hess[0][1] * t.hess[1][0];
      if (!(t.hess[0][0] < 0.0) || !(det > 0.0)) break;
      step[0] = -(t.hess[1][1] * t.grad[0] - t.hess[0][1] * t.grad[1]) / det;
      step[1] = -(t.hess[0][0] * t.grad[1] - t.hess[1][0] * t.grad[0]) / det;
    }
    bool inside = true;
    for (std::size_t d = 0; d < rank; ++d) inside = inside && std::abs(mode[d] + step[d] - grid[centre[d]]) < h;
    if (!inside) break;
    for (std::size_t d = 0; d < rank; ++d) mode[d] += step[d];
    if (std::abs(step[0]) + std::abs(step[1]) < 1e-15) break;
  }
  const TrigPoly top = eval_trig(eta, mode, org);
  const double peak = std::max(top.value, f[arg]);

  // Trapezoid weight of a coarse node inside the patch rectangle.
  auto patch_weight = [&](std::size_t g, std::size_t d) {
    long off = static_cast<long>(g) - static_cast<long>(centre[d]);
    const long n = static_cast<long>(points);
    off = ((off % n) + n + n / 2) % n - n / 2;
    if (std::labs(off) < kPatch) return 1.0;
    return std::labs(off) == kPatch ? 0.5 : 0.0;
  };

  std::vector<cdouble> moments(rank, cdouble{});
  double mass = 0.0;
  for (std::size_t g1 = 0; g1 < points; ++g1)
    for (std::size_t g2 = 0; g2 < p2; ++g2) {
      double keep = patch_weight(g1, 0);
      if (rank == 2) keep *= patch_weight(g2, 1);
      const double p = (1.0 - keep) * std::exp(f[g1 * p2 + g2] - peak) * std::pow(h, static_cast<double>(rank));
      mass += p;
      moments[0] += p * std::exp(cdouble(0.0, grid[g1]));
      if (rank == 2) moments[1] += p * std::exp(cdouble(0.0, grid[g2]));
    }

  // Patch: the rectangle between the coarse nodes at +-kPatch.
  std::vector<double> x[2], w[2];
  for (std::size_t d = 0; d < rank; ++d) {
    const double curv = -top.hess[d][d];
    const double width = curv > 0.0 ? 1.0 / std::sqrt(curv) : h;
    graded_nodes(grid[centre[d]], static_cast<double>(kPatch) * h, std::min(h, width / 8.0) / 4.0, kPatchNodes,
                 x[d], w[d]);
  }
  if (rank == 1) {
    x[1] = {0.0};
    w[1] = {1.0};
  }
  // column[i1][n2] = sum_{i2} eta[i1, i2] exp(j (i2 - origin) x2[n2])
  std::vector<cdouble> column(m1 * x[1].size());
  for (std::size_t i1 = 0; i1 < m1; ++i1)
    for (std::size_t n2 = 0; n2 < x[1].size(); ++n2) {
      cdouble acc{};
      for (std::size_t i2 = 0; i2 < m2; ++i2)
        acc += eta[i1 * m2 + i2] *
               (rank == 2 ? std::exp(cdouble(0.0, (static_cast<double>(i2) - org[1]) * x[1][n2])) : cdouble(1.0));
      column[i1 * x[1].size() + n2] = acc;
    }
  std::vector<cdouble> rot(m1);
  for (std::size_t n1 = 0; n1 < x[0].size(); ++n1) {
    for (std::size_t i1 = 0; i1 < m1; ++i1) rot[i1] = std::exp(cdouble(0.0, (static_cast<double>(i1) - org[0]) * x[0][n1]));
    for (std::size_t n2 = 0; n2 < x[1].size(); ++n2) {
      cdouble acc{};
      for (std::size_t i1 = 0; i1 < m1; ++i1) acc += column[i1 * x[1].size() + n2] * rot[i1];
      const double p = w[0][n1] * w[1][n2] * std::exp(acc.real() - peak);
      mass += p;
      moments[0] += p * std::exp(cdouble(0.0, x[0][n1]));
      if (rank == 2) moments[1] += p * std::exp(cdouble(0.0, x[1][n2]));
    }
  }
  for (auto& m : moments) m /= mass;
  return moments;
}

std::vector<double> noncoherent_peak(const SpectralTensor& y, const std::vector<double>& start) {
  const auto indices = multi_indices(y.shape());
  const std::size_t rank = start.size();
  auto power = [&](const std::vector<double>& th) { return std::norm(direct_correlation(y, th)); };

  // Coarse local search, then Newton on |c|^2 with exact derivatives.
  std::vector<double> best = start;
  double best_p = power(best);
  const int side = 40;
  const double span = 0.2;
  std::vector<int> idx(rank, -side);
  for (;;) {
    std::vector<double> th(rank);
    for (std::size_t d = 0; d < rank; ++d) th[d] = start[d] + span * idx[d] / side;
    const double p = power(th);
    if (p > best_p) {
      best_p = p;
      best = th;
    }
    std::size_t d = rank;
    while (d-- > 0) {
      if (++idx[d] <= side) break;
      idx[d] = -side;
    }
    if (d == static_cast<std::size_t>(-1)) break;
  }

  std::vector<double> th = best;
  for (int it = 0; it < 60; ++it) {
    cdouble c{};
    std::vector<cdouble> dc(rank);
    std::vector<cdouble> ddc(rank * rank);
    for (std::size_t m = 0; m < indices.size(); ++m) {
      const cdouble z = std::conj(y[m]) * std::exp(cdouble(0.0, phase_of(indices[m], th)));
      c += z;
      for (std::size_t d = 0; d < rank; ++d) {
        const double id = static_cast<double>(indices[m][d]);
        dc[d] += cdouble(0.0, id) * z;
        for (std::size_t e = 0; e < rank; ++e) ddc[d * rank + e] -= id * static_cast<double>(indices[m][e]) * z;
      }
    }
    Eigen::VectorXd g(static_cast<Eigen::Index>(rank));
    Eigen::MatrixXd h(static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(rank));
    for (std::size_t d = 0; d < rank; ++d) {
      g(static_cast<Eigen::Index>(d)) = 2.0 * (std::conj(c) * dc[d]).real();
      for (std::size_t e = 0; e < rank; ++e)
        h(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(e)) =
            2.0 * (std::conj(dc[e]) * dc[d] + std::conj(c) * ddc[d * rank + e]).real();
    }
    const Eigen::VectorXd step = h.fullPivLu().solve(g);
    for (std::size_t d = 0; d < rank; ++d) th[d] -= step(static_cast<Eigen::Index>(d));
    if (step.norm() < 1e-15) break;
  }
  for (double& t : th) t = wrap_angle(t);
  return th;
}

}  // namespace mdvalse::oracle
