// Weight posterior and greedy support search for fixed frequency posteriors.
//
// For a support S the Gaussian weight factor has precision J_S / nu + I / tau
// and mean C_S h_S / nu. Maximizing the bound over q(w) leaves the score
//   h_S^H C_S h_S / nu^2 + ln det C_S + |S| ln(rho / ((1 - rho) tau)),
// and a single flip changes it by the rank-one terms in activation_candidate.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdvalse/inference.hpp"

namespace mdvalse {
namespace {

Eigen::VectorXcd column_on(const JhCache& jh, const std::vector<std::size_t>& support, std::size_t k) {
  Eigen::VectorXcd j(static_cast<Eigen::Index>(support.size()));
  for (std::size_t p = 0; p < support.size(); ++p)
    j(static_cast<Eigen::Index>(p)) = jh.J(static_cast<Eigen::Index>(support[p]), static_cast<Eigen::Index>(k));
  return j;
}

double log_prior_odds(const ModelParams& params) { return std::log(params.rho / (1.0 - params.rho)); }

void sort_support(std::vector<std::size_t>& support, WeightPosterior& post) {
  std::vector<std::size_t> perm(support.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
  const auto n = static_cast<Eigen::Index>(perm.size());
  WeightPosterior sorted{Eigen::VectorXcd(n), Eigen::MatrixXcd(n, n)};
  std::vector<std::size_t> sorted_support(perm.size());
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto pa = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(a)]);
    sorted_support[static_cast<std::size_t>(a)] = support[static_cast<std::size_t>(pa)];
    sorted.mean(a) = post.mean(pa);
    for (Eigen::Index b = 0; b < n; ++b)
      sorted.cov(a, b) = post.cov(pa, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(b)]));
  }
  support = std::move(sorted_support);
  post = std::move(sorted);
}

}  // namespace

JhCache compute_Jh(const ComponentState& state, const SpectralTensor& y) {
  const auto n = static_cast<Eigen::Index>(state.budget);
  const double total = static_cast<double>(state.shape.size());
  JhCache jh{Eigen::MatrixXcd(n, n), Eigen::VectorXcd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ai = state.atoms[static_cast<std::size_t>(i)];
    jh.J(i, i) = total;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const cdouble v = conj_inner(ai, state.atoms[static_cast<std::size_t>(j)]);
      jh.J(i, j) = v;
      jh.J(j, i) = std::conj(v);
    }
    jh.h(i) = conj_inner(ai, y);
  }
  return jh;
}

WeightPosterior update_weights(const JhCache& jh, const ModelParams& params,
                               const std::vector<std::size_t>& support) {
  const auto n = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXcd precision(n, n);
  Eigen::VectorXcd h(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto ka = static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)]);
    h(a) = jh.h(ka);
    for (Eigen::Index b = 0; b < n; ++b)
      precision(a, b) = jh.J(ka, static_cast<Eigen::Index>(support[static_cast<std::size_t>(b)])) / params.nu;
    precision(a, a) += 1.0 / params.tau;
  }
  WeightPosterior post;
  if (n == 0) return post;
  Eigen::LLT<Eigen::MatrixXcd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("weight precision matrix is not positive definite");
  post.cov = llt.solve(Eigen::MatrixXcd::Identity(n, n));
  post.cov = (0.5 * (post.cov + post.cov.adjoint())).eval();
  post.mean = post.cov * h / params.nu;
  if (!post.mean.allFinite() || !post.cov.allFinite()) throw NumericalError("non-finite weight posterior");
  return post;
}

double support_objective(const std::vector<bool>& s, const JhCache& jh, const ModelParams& params) {
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s[k]) support.push_back(k);
  if (support.empty()) return 0.0;
  const auto n = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXcd precision(n, n);
  Eigen::VectorXcd h(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto ka = static_cast<Eigen::Index>(support[static_cast<std::size_t>(a)]);
    h(a) = jh.h(ka);
    for (Eigen::Index b = 0; b < n; ++b)
      precision(a, b) = jh.J(ka, static_cast<Eigen::Index>(support[static_cast<std::size_t>(b)])) / params.nu;
    precision(a, a) += 1.0 / params.tau;
  }
  Eigen::LLT<Eigen::MatrixXcd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("weight precision matrix is not positive definite");
  const Eigen::MatrixXcd L = llt.matrixL();
  double log_det_precision = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) log_det_precision += 2.0 * std::log(L(a, a).real());
  const Eigen::VectorXcd z = llt.matrixL().solve(h);
  const double quad = z.squaredNorm() / (params.nu * params.nu);
  return quad - log_det_precision +
         static_cast<double>(n) * (log_prior_odds(params) - std::log(params.tau));
}

FlipCandidate activation_candidate(const WeightPosterior& post, const Eigen::VectorXcd& j_col,
                                   double j_kk, cdouble h_k, const ModelParams& params,
                                   bool drop_logdet) {
  const double nu = params.nu;
  double schur = j_kk / nu + 1.0 / params.tau;
  cdouble innov = h_k;
  if (j_col.size() > 0) {
    const Eigen::VectorXcd cj = post.cov * j_col;
    schur -= j_col.dot(cj).real() / (nu * nu);
    innov -= j_col.dot(post.mean);
  }
  // J is PSD, so the Schur complement never drops below 1/tau.
  schur = std::max(schur, 1.0 / params.tau);
  FlipCandidate c;
  c.v = 1.0 / schur;
  c.u = c.v * innov / nu;
  const double logdet = drop_logdet ? 0.0 : std::log(c.v / params.tau);
  c.delta = logdet + std::norm(c.u) / c.v + log_prior_odds(params);
  return c;
}

double deactivation_delta(const WeightPosterior& post, std::size_t pos, const ModelParams& params) {
  const auto p = static_cast<Eigen::Index>(pos);
  const double ckk = post.cov(p, p).real();
  return -(std::log(ckk / params.tau) + std::norm(post.mean(p)) / ckk + log_prior_odds(params));
}

void apply_activation(WeightPosterior& post, const Eigen::VectorXcd& j_col, const FlipCandidate& cand,
                      const ModelParams& params) {
  const Eigen::Index n = post.mean.size();
  WeightPosterior next{Eigen::VectorXcd(n + 1), Eigen::MatrixXcd(n + 1, n + 1)};
  if (n > 0) {
    const Eigen::VectorXcd b = post.cov * j_col / params.nu;
    next.cov.topLeftCorner(n, n) = post.cov + cand.v * b * b.adjoint();
    next.cov.topRightCorner(n, 1) = -cand.v * b;
    next.cov.bottomLeftCorner(1, n) = -cand.v * b.adjoint();
    next.mean.head(n) = post.mean - cand.u * b;
  }
  next.cov(n, n) = cand.v;
  next.mean(n) = cand.u;
  post = std::move(next);
}

void apply_deactivation(WeightPosterior& post, std::size_t pos) {
  const Eigen::Index n = post.mean.size();
  const auto p = static_cast<Eigen::Index>(pos);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index a = 0; a < n; ++a)
    if (a != p) keep.push_back(a);
  const cdouble ckk = post.cov(p, p);
  const auto m = static_cast<Eigen::Index>(keep.size());
  WeightPosterior next{Eigen::VectorXcd(m), Eigen::MatrixXcd(m, m)};
  for (Eigen::Index a = 0; a < m; ++a) {
    const Eigen::Index ia = keep[static_cast<std::size_t>(a)];
    next.mean(a) = post.mean(ia) - post.cov(ia, p) * post.mean(p) / ckk;
    for (Eigen::Index b = 0; b < m; ++b) {
      const Eigen::Index ib = keep[static_cast<std::size_t>(b)];
      next.cov(a, b) = post.cov(ia, ib) - post.cov(ia, p) * post.cov(p, ib) / ckk;
    }
  }
  post = std::move(next);
}

std::vector<double> flip_deltas(const std::vector<std::size_t>& support, const WeightPosterior& post,
                                const JhCache& jh, const ModelParams& params, bool drop_logdet) {
  const auto n = static_cast<std::size_t>(jh.h.size());
  std::vector<double> deltas(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto it = std::find(support.begin(), support.end(), k);
    if (it != support.end()) {
      deltas[k] = deactivation_delta(post, static_cast<std::size_t>(it - support.begin()), params);
    } else {
      const auto kk = static_cast<Eigen::Index>(k);
      deltas[k] = activation_candidate(post, column_on(jh, support, k), jh.J(kk, kk).real(), jh.h(kk),
                                       params, drop_logdet)
                      .delta;
    }
  }
  return deltas;
}

SupportUpdate greedy_support_update(const ComponentState& state, const JhCache& jh,
                                    const ModelParams& params, bool drop_logdet) {
  SupportUpdate out;
  out.support = state.support;
  out.weights = update_weights(jh, params, out.support);
  const std::size_t n = state.budget;

  while (out.flips < n) {
    const auto deltas = flip_deltas(out.support, out.weights, jh, params, drop_logdet);
    const auto best = static_cast<std::size_t>(std::max_element(deltas.begin(), deltas.end()) - deltas.begin());
    if (!(deltas[best] > 0.0)) break;
    const auto it = std::find(out.support.begin(), out.support.end(), best);
    if (it != out.support.end()) {
      apply_deactivation(out.weights, static_cast<std::size_t>(it - out.support.begin()));
      out.support.erase(it);
    } else {
      const auto kb = static_cast<Eigen::Index>(best);
      const Eigen::VectorXcd j = column_on(jh, out.support, best);
      const auto cand = activation_candidate(out.weights, j, jh.J(kb, kb).real(), jh.h(kb), params, drop_logdet);
      apply_activation(out.weights, j, cand, params);
      out.support.push_back(best);
    }
    ++out.flips;
  }

  sort_support(out.support, out.weights);
  out.active.assign(n, false);
  for (std::size_t k : out.support) out.active[k] = true;
  return out;
}

}  // namespace mdvalse
