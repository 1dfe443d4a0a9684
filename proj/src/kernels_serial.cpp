#include <cmath>
#include <stdexcept>

#include "mdvalse/kernels.hpp"

namespace mdvalse::kernels::serial {
namespace {

double position(const std::vector<std::size_t>& idx, std::span<const double> origin, std::size_t d) {
  return static_cast<double>(idx[d]) - (origin.empty() ? 0.0 : origin[d]);
}

}  // namespace

cdouble conj_dot(std::span<const cdouble> a, std::span<const cdouble> b) {
  if (a.size() != b.size()) throw std::invalid_argument("conj_dot: length mismatch");
  cdouble acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double abs2_sum(std::span<const cdouble> a) {
  double acc = 0.0;
  for (const cdouble& z : a) acc += std::norm(z);
  return acc;
}

void outer_product(const std::vector<std::vector<cdouble>>& factors, std::span<cdouble> out) {
  const std::size_t rank = factors.size();
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    cdouble v = 1.0;
    for (std::size_t d = 0; d < rank; ++d) v *= factors[d][idx[d]];
    out[n] = v;
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < factors[d].size()) break;
      idx[d] = 0;
    }
  }
}

void linear_combination(std::span<const std::span<const cdouble>> terms,
                        std::span<const cdouble> coeffs, bool conjugate_terms,
                        std::span<cdouble> out) {
  if (terms.size() != coeffs.size()) throw std::invalid_argument("linear_combination: size mismatch");
  for (std::size_t i = 0; i < out.size(); ++i) {
    cdouble acc{};
    for (std::size_t t = 0; t < terms.size(); ++t)
      acc += coeffs[t] * (conjugate_terms ? std::conj(terms[t][i]) : terms[t][i]);
    out[i] = acc;
  }
}

CoherentSums coherent_sums(std::span<const cdouble> eta, std::span<const std::size_t> dims,
                           std::span<const double> theta, std::span<const double> origin) {
  const std::size_t rank = dims.size();
  CoherentSums s;
  s.grad.assign(rank, 0.0);
  s.hess.assign(rank * rank, 0.0);
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t n = 0; n < eta.size(); ++n) {
    double phase = 0.0;
    for (std::size_t d = 0; d < rank; ++d) phase += position(idx, origin, d) * theta[d];
    const cdouble z = eta[n] * std::polar(1.0, phase);
    s.value += z.real();
    for (std::size_t d = 0; d < rank; ++d) {
      const double id = position(idx, origin, d);
      s.grad[d] -= id * z.imag();
      for (std::size_t e = 0; e < rank; ++e)
        s.hess[d * rank + e] -= id * position(idx, origin, e) * z.real();
    }
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < dims[d]) break;
      idx[d] = 0;
    }
  }
  return s;
}

double coherent_value(std::span<const cdouble> eta, std::span<const std::size_t> dims,
                      std::span<const double> theta, std::span<const double> origin) {
  const std::size_t rank = dims.size();
  std::vector<std::size_t> idx(rank, 0);
  double acc = 0.0;
  for (std::size_t n = 0; n < eta.size(); ++n) {
    double phase = 0.0;
    for (std::size_t d = 0; d < rank; ++d) phase += position(idx, origin, d) * theta[d];
    acc += (eta[n] * std::polar(1.0, phase)).real();
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < dims[d]) break;
      idx[d] = 0;
    }
  }
  return acc;
}

}  // namespace mdvalse::kernels::serial
