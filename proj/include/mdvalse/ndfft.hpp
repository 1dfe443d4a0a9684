#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mdvalse/tensor.hpp"

namespace mdvalse {

/// Correlation c(theta) = sum_M conj(Y_M) a(M, theta) sampled on a uniform
/// frequency grid with G_d >= gamma * M_d points per dimension.
struct FreqGrid {
  double gamma = 1.0;
  std::size_t sample_count = 0;              // prod M_d
  std::vector<std::size_t> sizes;            // G_d
  std::vector<std::vector<double>> angles;   // angles[d][g] = wrap(2 pi g / G_d)
  std::vector<cdouble> values;               // row-major over sizes

  std::size_t total() const noexcept { return values.size(); }
};

struct GridPeak {
  std::vector<std::size_t> bin;
  std::vector<double> angles;
  double magnitude = 0.0;  // |c|^2 / prod M_d
};

/// Smallest n' >= n whose only prime factors are 2, 3, 5 and 7.
std::size_t next_fft_size(std::size_t n);

FreqGrid correlate_grid(const SpectralTensor& y, double gamma);
/// Same correlation on explicit grid sizes (each >= the matching M_d).
FreqGrid correlate_grid(const SpectralTensor& y, const std::vector<std::size_t>& sizes);

/// Largest-|c| cell; ties go to the lowest row-major index.
GridPeak periodogram_peak(const FreqGrid& grid);

/// |DFT(x)|^2 / len(x), bin g at angle 2 pi g / len.
std::vector<double> periodogram_1d(std::span<const cdouble> x);

}  // namespace mdvalse
