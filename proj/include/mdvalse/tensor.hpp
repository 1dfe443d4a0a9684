#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace mdvalse {

using cdouble = std::complex<double>;
using MultiIndex = std::vector<std::size_t>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Maps an angle onto [-pi, pi).
double wrap_angle(double theta);

/// Dimensions (M_1, ..., M_D) of a uniformly sampled D-dimensional array.
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<std::size_t> dims);
  Shape(std::initializer_list<std::size_t> dims)
      : Shape(std::vector<std::size_t>(dims)) {}

  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return size_; }
  std::size_t operator[](std::size_t d) const { return dims_[d]; }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }

  std::size_t min_dim() const;
  std::size_t max_dim() const;

  /// Row-major stride of dimension d (last dimension fastest).
  std::size_t stride(std::size_t d) const;
  std::size_t flat(const MultiIndex& idx) const;
  MultiIndex unravel(std::size_t flat) const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::size_t size_ = 0;
};

/// Dense complex D-dimensional array, row-major.
class SpectralTensor {
 public:
  SpectralTensor() = default;
  explicit SpectralTensor(Shape shape);
  SpectralTensor(Shape shape, std::vector<cdouble> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  cdouble& operator[](std::size_t i) { return data_[i]; }
  const cdouble& operator[](std::size_t i) const { return data_[i]; }
  cdouble& at(const MultiIndex& idx) { return data_[shape_.flat(idx)]; }
  const cdouble& at(const MultiIndex& idx) const { return data_[shape_.flat(idx)]; }

  std::span<cdouble> values() noexcept { return data_; }
  std::span<const cdouble> values() const noexcept { return data_; }

  double norm_sq() const;
  bool is_zero() const;

  SpectralTensor& operator+=(const SpectralTensor& other);
  SpectralTensor& operator-=(const SpectralTensor& other);
  SpectralTensor& operator*=(cdouble scale);

  friend SpectralTensor operator+(SpectralTensor a, const SpectralTensor& b) { return a += b; }
  friend SpectralTensor operator-(SpectralTensor a, const SpectralTensor& b) { return a -= b; }
  friend SpectralTensor operator*(cdouble s, SpectralTensor a) { return a *= s; }

  friend bool operator==(const SpectralTensor&, const SpectralTensor&) = default;

 private:
  Shape shape_;
  std::vector<cdouble> data_;
};

/// One sinusoid: complex weight and D frequencies, stored wrapped.
struct Component {
  Component() = default;
  Component(cdouble w, std::vector<double> theta);

  cdouble weight{};
  std::vector<double> freq;
};

/// Every multi-index of `shape` in row-major order (0-based).
std::vector<MultiIndex> multi_indices(const Shape& shape);

/// Outer product tensor T[i_1..i_D] = prod_d factors[d][i_d].
SpectralTensor separable_product(const Shape& shape,
                                 const std::vector<std::vector<cdouble>>& factors);

/// a(M, theta) = prod_d exp(j * i_d * theta_d).
SpectralTensor atom(const Shape& shape, std::span<const double> freq);

SpectralTensor synthesize(std::span<const Component> components, const Shape& shape);

/// Adds i.i.d. CN(0, nu) noise; deterministic given `seed`.
SpectralTensor add_noise(const SpectralTensor& x, double nu, std::uint64_t seed);

/// Noise variance giving the nominal SNR ||X||^2 / E||N||^2 = 10^(snr/10).
double snr_to_nu(const SpectralTensor& x, double snr_db);

/// Sum over all entries of conj(a) * b.
cdouble conj_inner(const SpectralTensor& a, const SpectralTensor& b);

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// MDLS binary format: "MDLS", u8 version, u8 D, D x u32 dims, then
/// (re, im) f64 pairs in row-major order; little-endian, no padding.
void write_tensor(const std::filesystem::path& path, const SpectralTensor& t);
SpectralTensor read_tensor(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_tensor(const SpectralTensor& t);
SpectralTensor decode_tensor(std::span<const std::uint8_t> bytes);

}  // namespace mdvalse
