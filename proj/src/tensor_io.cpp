#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mdvalse/tensor.hpp"

namespace mdvalse {
namespace {

constexpr char kMagic[4] = {'M', 'D', 'L', 'S'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const SpectralTensor& t) {
  const Shape& shape = t.shape();
  if (shape.rank() > 255) throw FormatError("rank exceeds 255");
  std::vector<std::uint8_t> out;
  out.reserve(6 + 4 * shape.rank() + 16 * t.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(shape.rank()));
  for (std::size_t m : shape.dims()) {
    if (m > 0xffffffffu) throw FormatError("dimension exceeds u32");
    put_u32(out, static_cast<std::uint32_t>(m));
  }
  for (const cdouble& z : t.values()) {
    put_f64(out, z.real());
    put_f64(out, z.imag());
  }
  return out;
}

SpectralTensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) throw FormatError("truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic bytes");
  if (bytes[4] != kVersion) throw FormatError("unsupported format version " + std::to_string(bytes[4]));
  const std::size_t rank = bytes[5];
  if (rank == 0) throw FormatError("rank must be at least 1");
  const std::size_t header = 6 + 4 * rank;
  if (bytes.size() < header) throw FormatError("truncated dimension list");

  std::vector<std::size_t> dims(rank);
  std::size_t count = 1;
  for (std::size_t d = 0; d < rank; ++d) {
    dims[d] = get_u32(bytes.data() + 6 + 4 * d);
    if (dims[d] == 0) throw FormatError("zero-length dimension");
    count *= dims[d];
  }
  if (bytes.size() != header + 16 * count)
    throw FormatError("payload length " + std::to_string(bytes.size() - header) +
                      " does not match declared size " + std::to_string(16 * count));

  std::vector<cdouble> data(count);
  const std::uint8_t* p = bytes.data() + header;
  for (std::size_t i = 0; i < count; ++i, p += 16) data[i] = cdouble(get_f64(p), get_f64(p + 8));
  try {
    return SpectralTensor(Shape(std::move(dims)), std::move(data));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

void write_tensor(const std::filesystem::path& path, const SpectralTensor& t) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SpectralTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

}  // namespace mdvalse
