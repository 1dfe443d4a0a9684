#include "mdvalse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdvalse {
namespace {

// Hungarian algorithm (shortest augmenting paths with potentials), square
// cost matrix, O(n^3).
std::vector<std::size_t> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double pair_cost(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("frequency vectors differ in dimension");
  double c = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double e = wrap_dist(a[d], b[d]);
    c += e * e;
  }
  return c;
}

}  // namespace

double to_db(double ratio) {
  if (!(ratio > 0.0)) return kDbFloor;
  return std::max(10.0 * std::log10(ratio), kDbFloor);
}

double nmse_db(const SpectralTensor& x_hat, const SpectralTensor& x_true) {
  if (x_hat.shape() != x_true.shape()) throw std::invalid_argument("shape mismatch");
  const double ref = x_true.norm_sq();
  if (ref == 0.0) throw std::invalid_argument("NMSE reference is zero");
  return to_db((x_hat - x_true).norm_sq() / ref);
}

double wrap_dist(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("angles must be finite");
  return std::abs(wrap_angle(a - b));
}

Assignment match_frequencies(const FreqList& est, const FreqList& truth) {
  if (est.empty() || truth.empty()) throw std::invalid_argument("frequency lists must be nonempty");
  if (est.size() != truth.size()) throw std::invalid_argument("frequency lists differ in size");
  const std::size_t n = est.size();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i][j] = pair_cost(est[i], truth[j]);
  Assignment a;
  a.assignment = solve_assignment(cost);
  for (std::size_t i = 0; i < n; ++i) a.cost += cost[i][a.assignment[i]];
  return a;
}

double freq_mse_db(const FreqList& est, const FreqList& truth) {
  const Assignment a = match_frequencies(est, truth);
  const double scalars = static_cast<double>(truth.size() * truth.front().size());
  return to_db(a.cost / scalars);
}

TrialSummary aggregate(const std::vector<TrialOutcome>& trials) {
  if (trials.empty()) throw std::invalid_argument("no trials to aggregate");
  TrialSummary s;
  s.trials = trials.size();
  double nmse_lin = 0.0, mse_lin = 0.0, runtime = 0.0;
  std::size_t mse_count = 0, nmse_count = 0;
  for (const TrialOutcome& t : trials) {
    // NMSE is undefined (NaN) for signal-free trials.
    if (std::isfinite(t.nmse_db)) {
      nmse_lin += std::pow(10.0, t.nmse_db / 10.0);
      ++nmse_count;
    }
    runtime += t.runtime_s;
    s.max_runtime_s = std::max(s.max_runtime_s, t.runtime_s);
    if (t.k_hat == t.k_true) {
      ++s.correct;
      if (t.freq_mse_db) {
        mse_lin += std::pow(10.0, *t.freq_mse_db / 10.0);
        ++mse_count;
      }
    }
  }
  const double n = static_cast<double>(s.trials);
  s.p_correct = static_cast<double>(s.correct) / n;
  s.mean_nmse_db = nmse_count ? to_db(nmse_lin / static_cast<double>(nmse_count))
                            : std::numeric_limits<double>::quiet_NaN();
  s.mean_runtime_s = runtime / n;
  if (mse_count > 0) s.mean_freq_mse_db = to_db(mse_lin / static_cast<double>(mse_count));
  return s;
}

}  // namespace mdvalse
