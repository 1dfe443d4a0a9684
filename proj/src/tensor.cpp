#include "mdvalse/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "mdvalse/kernels.hpp"

namespace mdvalse {

double wrap_angle(double theta) {
  double w = theta - kTwoPi * std::floor((theta + kPi) / kTwoPi);
  if (w >= kPi) w -= kTwoPi;
  if (w < -kPi) w = -kPi;
  return w;
}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("shape must have at least one dimension");
  size_ = 1;
  for (std::size_t m : dims_) {
    if (m == 0) throw std::invalid_argument("shape dimensions must be positive");
    size_ *= m;
  }
}

std::size_t Shape::min_dim() const { return *std::min_element(dims_.begin(), dims_.end()); }
std::size_t Shape::max_dim() const { return *std::max_element(dims_.begin(), dims_.end()); }

std::size_t Shape::stride(std::size_t d) const {
  std::size_t s = 1;
  for (std::size_t e = d + 1; e < dims_.size(); ++e) s *= dims_[e];
  return s;
}

std::size_t Shape::flat(const MultiIndex& idx) const {
  if (idx.size() != dims_.size()) throw std::invalid_argument("multi-index rank mismatch");
  std::size_t f = 0;
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    if (idx[d] >= dims_[d]) throw std::out_of_range("multi-index out of range");
    f = f * dims_[d] + idx[d];
  }
  return f;
}

MultiIndex Shape::unravel(std::size_t flat) const {
  MultiIndex idx(dims_.size());
  for (std::size_t d = dims_.size(); d-- > 0;) {
    idx[d] = flat % dims_[d];
    flat /= dims_[d];
  }
  return idx;
}

SpectralTensor::SpectralTensor(Shape shape)
    : shape_(std::move(shape)), data_(shape_.size(), cdouble{}) {}

SpectralTensor::SpectralTensor(Shape shape, std::vector<cdouble> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.size())
    throw std::invalid_argument("tensor data length does not match shape");
  for (const cdouble& z : data_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::invalid_argument("tensor entries must be finite");
}

double SpectralTensor::norm_sq() const { return kernels::parallel::abs2_sum(data_); }

bool SpectralTensor::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](cdouble z) { return z == cdouble{}; });
}

SpectralTensor& SpectralTensor::operator+=(const SpectralTensor& other) {
  if (other.shape_ != shape_) throw std::invalid_argument("shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

SpectralTensor& SpectralTensor::operator-=(const SpectralTensor& other) {
  if (other.shape_ != shape_) throw std::invalid_argument("shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

SpectralTensor& SpectralTensor::operator*=(cdouble scale) {
  for (cdouble& z : data_) z *= scale;
  return *this;
}

Component::Component(cdouble w, std::vector<double> theta) : weight(w), freq(std::move(theta)) {
  for (double& t : freq) t = wrap_angle(t);
}

std::vector<MultiIndex> multi_indices(const Shape& shape) {
  std::vector<MultiIndex> out;
  out.reserve(shape.size());
  MultiIndex idx(shape.rank(), 0);
  for (std::size_t n = 0; n < shape.size(); ++n) {
    out.push_back(idx);
    for (std::size_t d = shape.rank(); d-- > 0;) {
      if (++idx[d] < shape[d]) break;
      idx[d] = 0;
    }
  }
  return out;
}

SpectralTensor separable_product(const Shape& shape,
                                 const std::vector<std::vector<cdouble>>& factors) {
  if (factors.size() != shape.rank()) throw std::invalid_argument("factor count must equal rank");
  for (std::size_t d = 0; d < shape.rank(); ++d)
    if (factors[d].size() != shape[d]) throw std::invalid_argument("factor length mismatch");
  SpectralTensor out(shape);
  kernels::parallel::outer_product(factors, out.values());
  return out;
}

SpectralTensor atom(const Shape& shape, std::span<const double> freq) {
  if (freq.size() != shape.rank()) throw std::invalid_argument("frequency dimension mismatch");
  std::vector<std::vector<cdouble>> factors(shape.rank());
  for (std::size_t d = 0; d < shape.rank(); ++d) {
    const double theta = wrap_angle(freq[d]);
    factors[d].resize(shape[d]);
    for (std::size_t i = 0; i < shape[d]; ++i)
      factors[d][i] = std::polar(1.0, static_cast<double>(i) * theta);
  }
  return separable_product(shape, factors);
}

SpectralTensor synthesize(std::span<const Component> components, const Shape& shape) {
  SpectralTensor x(shape);
  for (const Component& c : components) {
    SpectralTensor a = atom(shape, c.freq);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += c.weight * a[i];
  }
  return x;
}

SpectralTensor add_noise(const SpectralTensor& x, double nu, std::uint64_t seed) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::invalid_argument("noise variance must be >= 0");
  SpectralTensor y = x;
  if (nu == 0.0) return y;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(nu / 2.0));
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    y[i] += cdouble(re, im);
  }
  return y;
}

double snr_to_nu(const SpectralTensor& x, double snr_db) {
  const double power = x.norm_sq();
  if (power == 0.0) throw std::invalid_argument("SNR is undefined for a zero signal");
  return power / (static_cast<double>(x.size()) * std::pow(10.0, snr_db / 10.0));
}

cdouble conj_inner(const SpectralTensor& a, const SpectralTensor& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("shape mismatch");
  return kernels::parallel::conj_dot(a.values(), b.values());
}

}  // namespace mdvalse
