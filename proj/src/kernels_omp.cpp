#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdvalse/kernels.hpp"

namespace mdvalse::kernels::parallel {
namespace {

std::size_t block_count(std::size_t n) { return (n + kReduceBlock - 1) / kReduceBlock; }

std::vector<std::size_t> unravel(std::size_t flat, std::span<const std::size_t> dims) {
  std::vector<std::size_t> idx(dims.size());
  for (std::size_t d = dims.size(); d-- > 0;) {
    idx[d] = flat % dims[d];
    flat /= dims[d];
  }
  return idx;
}

void advance(std::vector<std::size_t>& idx, std::span<const std::size_t> dims) {
  for (std::size_t d = dims.size(); d-- > 0;) {
    if (++idx[d] < dims[d]) return;
    idx[d] = 0;
  }
}

// positions[d][i] = i - origin[d]
std::vector<std::vector<double>> position_tables(std::span<const std::size_t> dims,
                                                 std::span<const double> origin) {
  if (!origin.empty() && origin.size() != dims.size()) throw std::invalid_argument("origin rank mismatch");
  std::vector<std::vector<double>> pos(dims.size());
  for (std::size_t d = 0; d < dims.size(); ++d) {
    pos[d].resize(dims[d]);
    for (std::size_t i = 0; i < dims[d]; ++i)
      pos[d][i] = static_cast<double>(i) - (origin.empty() ? 0.0 : origin[d]);
  }
  return pos;
}

std::vector<std::vector<cdouble>> phase_tables(const std::vector<std::vector<double>>& pos,
                                               std::span<const double> theta) {
  std::vector<std::vector<cdouble>> tables(pos.size());
  for (std::size_t d = 0; d < pos.size(); ++d) {
    tables[d].resize(pos[d].size());
    for (std::size_t i = 0; i < pos[d].size(); ++i) tables[d][i] = std::polar(1.0, pos[d][i] * theta[d]);
  }
  return tables;
}

}  // namespace

cdouble conj_dot(std::span<const cdouble> a, std::span<const cdouble> b) {
  if (a.size() != b.size()) throw std::invalid_argument("conj_dot: length mismatch");
  const std::size_t n = a.size();
  const std::size_t nb = block_count(n);
  std::vector<cdouble> partial(nb);
#pragma omp parallel for schedule(static) if (nb > 1)
  for (std::size_t blk = 0; blk < nb; ++blk) {
    const std::size_t end = std::min(n, (blk + 1) * kReduceBlock);
    double re = 0.0, im = 0.0;
    for (std::size_t i = blk * kReduceBlock; i < end; ++i) {
      re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
      im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    partial[blk] = cdouble(re, im);
  }
  cdouble acc{};
  for (const cdouble& p : partial) acc += p;
  return acc;
}

double abs2_sum(std::span<const cdouble> a) {
  const std::size_t n = a.size();
  const std::size_t nb = block_count(n);
  std::vector<double> partial(nb);
#pragma omp parallel for schedule(static) if (nb > 1)
  for (std::size_t blk = 0; blk < nb; ++blk) {
    const std::size_t end = std::min(n, (blk + 1) * kReduceBlock);
    double acc = 0.0;
    for (std::size_t i = blk * kReduceBlock; i < end; ++i) acc += std::norm(a[i]);
    partial[blk] = acc;
  }
  double acc = 0.0;
  for (double p : partial) acc += p;
  return acc;
}

void outer_product(const std::vector<std::vector<cdouble>>& factors, std::span<cdouble> out) {
  const std::size_t rank = factors.size();
  const std::size_t last = factors.back().size();
  const std::size_t rows = out.size() / last;
  std::vector<std::size_t> dims(rank);
  for (std::size_t d = 0; d < rank; ++d) dims[d] = factors[d].size();
  const std::span<const std::size_t> lead(dims.data(), rank - 1);
#pragma omp parallel for schedule(static) if (rows * last > kReduceBlock)
  for (std::size_t r = 0; r < rows; ++r) {
    cdouble prefix = 1.0;
    if (rank > 1) {
      const auto idx = unravel(r, lead);
      for (std::size_t d = 0; d + 1 < rank; ++d) prefix *= factors[d][idx[d]];
    }
    cdouble* row = out.data() + r * last;
    const std::vector<cdouble>& tail = factors.back();
    for (std::size_t i = 0; i < last; ++i) row[i] = prefix * tail[i];
  }
}

void linear_combination(std::span<const std::span<const cdouble>> terms,
                        std::span<const cdouble> coeffs, bool conjugate_terms,
                        std::span<cdouble> out) {
  if (terms.size() != coeffs.size()) throw std::invalid_argument("linear_combination: size mismatch");
  const std::size_t n = out.size();
#pragma omp parallel for schedule(static) if (n > kReduceBlock)
  for (std::size_t i = 0; i < n; ++i) {
    cdouble acc{};
    for (std::size_t t = 0; t < terms.size(); ++t)
      acc += coeffs[t] * (conjugate_terms ? std::conj(terms[t][i]) : terms[t][i]);
    out[i] = acc;
  }
}

CoherentSums coherent_sums(std::span<const cdouble> eta, std::span<const std::size_t> dims,
                           std::span<const double> theta, std::span<const double> origin) {
  const std::size_t rank = dims.size();
  const std::size_t n = eta.size();
  const std::size_t nb = block_count(n);
  const auto pos = position_tables(dims, origin);
  const auto tables = phase_tables(pos, theta);
  std::vector<CoherentSums> partial(nb);
#pragma omp parallel for schedule(static) if (nb > 1)
  for (std::size_t blk = 0; blk < nb; ++blk) {
    CoherentSums& s = partial[blk];
    s.grad.assign(rank, 0.0);
    s.hess.assign(rank * rank, 0.0);
    const std::size_t begin = blk * kReduceBlock;
    const std::size_t end = std::min(n, begin + kReduceBlock);
    auto idx = unravel(begin, dims);
    for (std::size_t i = begin; i < end; ++i) {
      cdouble a = 1.0;
      for (std::size_t d = 0; d < rank; ++d) a *= tables[d][idx[d]];
      const cdouble z = eta[i] * a;
      s.value += z.real();
      for (std::size_t d = 0; d < rank; ++d) {
        const double id = pos[d][idx[d]];
        s.grad[d] -= id * z.imag();
        for (std::size_t e = d; e < rank; ++e)
          s.hess[d * rank + e] -= id * pos[e][idx[e]] * z.real();
      }
      advance(idx, dims);
    }
  }
  CoherentSums total;
  total.grad.assign(rank, 0.0);
  total.hess.assign(rank * rank, 0.0);
  for (const CoherentSums& s : partial) {
    total.value += s.value;
    for (std::size_t d = 0; d < rank; ++d) total.grad[d] += s.grad[d];
    for (std::size_t k = 0; k < rank * rank; ++k) total.hess[k] += s.hess[k];
  }
  for (std::size_t d = 0; d < rank; ++d)
    for (std::size_t e = 0; e < d; ++e) total.hess[d * rank + e] = total.hess[e * rank + d];
  return total;
}

double coherent_value(std::span<const cdouble> eta, std::span<const std::size_t> dims,
                      std::span<const double> theta, std::span<const double> origin) {
  const std::size_t n = eta.size();
  const std::size_t nb = block_count(n);
  const auto tables = phase_tables(position_tables(dims, origin), theta);
  std::vector<double> partial(nb);
#pragma omp parallel for schedule(static) if (nb > 1)
  for (std::size_t blk = 0; blk < nb; ++blk) {
    const std::size_t begin = blk * kReduceBlock;
    const std::size_t end = std::min(n, begin + kReduceBlock);
    auto idx = unravel(begin, dims);
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      cdouble a = 1.0;
      for (std::size_t d = 0; d < dims.size(); ++d) a *= tables[d][idx[d]];
      acc += (eta[i] * a).real();
      advance(idx, dims);
    }
    partial[blk] = acc;
  }
  double acc = 0.0;
  for (double p : partial) acc += p;
  return acc;
}

}  // namespace mdvalse::kernels::parallel
