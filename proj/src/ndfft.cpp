#include "mdvalse/ndfft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace mdvalse {
namespace {

// FFTW's planner is not reentrant; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void backward_fft_inplace(std::vector<cdouble>& buf, const std::vector<int>& dims) {
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), data, data, FFTW_BACKWARD,
                         FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

std::size_t next_fft_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

FreqGrid correlate_grid(const SpectralTensor& y, double gamma) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be >= 1");
  const Shape& shape = y.shape();
  std::vector<std::size_t> sizes(shape.rank());
  for (std::size_t d = 0; d < shape.rank(); ++d) {
    const auto target = static_cast<std::size_t>(std::llround(gamma * static_cast<double>(shape[d])));
    sizes[d] = next_fft_size(std::max(target, shape[d]));
  }
  FreqGrid grid = correlate_grid(y, sizes);
  grid.gamma = gamma;
  return grid;
}

FreqGrid correlate_grid(const SpectralTensor& y, const std::vector<std::size_t>& sizes) {
  const Shape& shape = y.shape();
  const std::size_t rank = shape.rank();
  if (sizes.size() != rank) throw std::invalid_argument("grid rank differs from tensor rank");

  FreqGrid grid;
  grid.sample_count = shape.size();
  grid.sizes = sizes;
  grid.angles.resize(rank);
  std::vector<int> dims(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    if (sizes[d] < shape[d]) throw std::invalid_argument("grid smaller than the tensor");
    grid.gamma = d == 0 ? static_cast<double>(sizes[d]) / static_cast<double>(shape[d])
                        : std::min(grid.gamma, static_cast<double>(sizes[d]) / static_cast<double>(shape[d]));
    dims[d] = static_cast<int>(grid.sizes[d]);
    grid.angles[d].resize(grid.sizes[d]);
    for (std::size_t g = 0; g < grid.sizes[d]; ++g)
      grid.angles[d][g] = wrap_angle(kTwoPi * static_cast<double>(g) / static_cast<double>(grid.sizes[d]));
  }

  std::size_t total = 1;
  for (std::size_t g : grid.sizes) total *= g;
  grid.values.assign(total, cdouble{});

  // Zero-pad conj(Y) into the grid; the +j sign of the atom makes this a
  // backward (e^{+j}) transform.
  Shape grid_shape(grid.sizes);
  MultiIndex idx(rank, 0);
  for (std::size_t n = 0; n < y.size(); ++n) {
    grid.values[grid_shape.flat(idx)] = std::conj(y[n]);
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < shape[d]) break;
      idx[d] = 0;
    }
  }
  backward_fft_inplace(grid.values, dims);
  return grid;
}

GridPeak periodogram_peak(const FreqGrid& grid) {
  if (grid.values.empty()) throw std::invalid_argument("empty grid");
  std::size_t best = 0;
  double best_mag = std::norm(grid.values[0]);
  for (std::size_t i = 1; i < grid.values.size(); ++i) {
    const double m = std::norm(grid.values[i]);
    if (m > best_mag) {
      best_mag = m;
      best = i;
    }
  }
  GridPeak peak;
  peak.bin = Shape(grid.sizes).unravel(best);
  peak.angles.resize(peak.bin.size());
  for (std::size_t d = 0; d < peak.bin.size(); ++d) peak.angles[d] = grid.angles[d][peak.bin[d]];
  peak.magnitude = best_mag / static_cast<double>(grid.sample_count);
  return peak;
}

std::vector<double> periodogram_1d(std::span<const cdouble> x) {
  if (x.empty()) throw std::invalid_argument("empty sequence");
  std::vector<cdouble> buf(x.size());
  // Conjugating puts a tone exp(j theta i) at the bin of angle theta.
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = std::conj(x[i]);
  backward_fft_inplace(buf, {static_cast<int>(buf.size())});
  std::vector<double> power(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i)
    power[i] = std::norm(buf[i]) / static_cast<double>(buf.size());
  return power;
}

}  // namespace mdvalse
