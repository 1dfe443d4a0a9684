#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mdvalse/tensor.hpp"
#include "test_util.hpp"

namespace mdvalse {
namespace {

TEST(Shape, RejectsEmptyAndZeroDimensions) {
  EXPECT_THROW(Shape(std::vector<std::size_t>{}), std::invalid_argument);
  EXPECT_THROW(Shape({3, 0}), std::invalid_argument);
}

TEST(Shape, FlatAndUnravelAreInverse) {
  Shape s{3, 4, 5};
  EXPECT_EQ(s.size(), 60u);
  for (std::size_t f = 0; f < s.size(); ++f) EXPECT_EQ(s.flat(s.unravel(f)), f);
  EXPECT_EQ(s.stride(2), 1u);
  EXPECT_EQ(s.stride(0), 20u);
}

TEST(MultiIndices, RowMajorOrder) {
  auto idx = multi_indices(Shape{2, 3});
  ASSERT_EQ(idx.size(), 6u);
  EXPECT_EQ(idx[0], (MultiIndex{0, 0}));
  EXPECT_EQ(idx[1], (MultiIndex{0, 1}));
  EXPECT_EQ(idx[3], (MultiIndex{1, 0}));
  EXPECT_EQ(idx[5], (MultiIndex{1, 2}));
}

TEST(Atom, ZeroFrequencyIsAllOnes) {
  std::vector<double> f{0.0, 0.0};
  auto a = atom(Shape{4, 3}, f);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], cdouble(1.0, 0.0));
}

TEST(Atom, NyquistAlternates) {
  std::vector<double> f{kPi};
  auto a = atom(Shape{6}, f);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(std::abs(a[i] - cdouble(i % 2 ? -1.0 : 1.0)), 0.0, 1e-14);
}

TEST(Atom, UnitModulusAndPeriodic) {
  std::vector<double> f{0.731, -2.2, 1.4};
  std::vector<double> g{0.731 + kTwoPi, -2.2 - 2 * kTwoPi, 1.4};
  auto a = atom(Shape{5, 4, 3}, f);
  auto b = atom(Shape{5, 4, 3}, g);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(std::abs(a[i]), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-12);
  }
}

TEST(Atom, SeparableAcrossDimensions) {
  std::vector<double> f{0.4, -1.1};
  auto a = atom(Shape{4, 5}, f);
  for (const auto& idx : multi_indices(a.shape())) {
    cdouble expect = std::polar(1.0, idx[0] * f[0]) * std::polar(1.0, idx[1] * f[1]);
    EXPECT_NEAR(std::abs(a.at(idx) - expect), 0.0, 1e-13);
  }
}

TEST(Synthesize, EmptyListIsZero) {
  auto x = synthesize({}, Shape{3, 3});
  EXPECT_TRUE(x.is_zero());
}

TEST(Synthesize, IsLinearInWeights) {
  std::vector<Component> c{{cdouble(1.0, 2.0), {0.3, 1.2}}, {cdouble(-0.5, 0.1), {-2.0, 0.7}}};
  Shape s{6, 5};
  auto x = synthesize(c, s);
  auto expect = c[0].weight * atom(s, c[0].freq) + c[1].weight * atom(s, c[1].freq);
  EXPECT_LT(testing::max_abs_diff(x, expect), 1e-13);
}

TEST(Noise, DeterministicAndCalibrated) {
  SpectralTensor zero(Shape{200, 100});
  auto a = add_noise(zero, 2.0, 11);
  auto b = add_noise(zero, 2.0, 11);
  EXPECT_EQ(a, b);
  double power = a.norm_sq() / a.size();
  EXPECT_NEAR(power, 2.0, 0.05);
  EXPECT_THROW(add_noise(zero, -1.0, 1), std::invalid_argument);
}

TEST(Noise, SnrToNu) {
  std::vector<double> f{0.2, 0.3};
  auto x = atom(Shape{10, 10}, f);
  EXPECT_NEAR(snr_to_nu(x, 0.0), 1.0, 1e-12);
  EXPECT_NEAR(snr_to_nu(x, 20.0), 0.01, 1e-14);
  EXPECT_THROW(snr_to_nu(SpectralTensor(Shape{3}), 10.0), std::invalid_argument);
}

TEST(Tensor, ConjInnerIsHermitian) {
  auto a = testing::random_tensor(Shape{4, 7}, 1);
  auto b = testing::random_tensor(Shape{4, 7}, 2);
  EXPECT_NEAR(std::abs(conj_inner(a, b) - std::conj(conj_inner(b, a))), 0.0, 1e-12);
  EXPECT_NEAR(conj_inner(a, a).real(), a.norm_sq(), 1e-12);
  EXPECT_THROW(conj_inner(a, testing::random_tensor(Shape{7, 4}, 3)), std::invalid_argument);
}

TEST(Tensor, RejectsNonFiniteAndBadLength) {
  EXPECT_THROW(SpectralTensor(Shape{2}, {cdouble(1.0), cdouble(NAN)}), std::invalid_argument);
  EXPECT_THROW(SpectralTensor(Shape{3}, {cdouble(1.0)}), std::invalid_argument);
}

TEST(WrapAngle, MapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.5), 0.5);
  EXPECT_NEAR(wrap_angle(kPi + 0.25), -kPi + 0.25, 1e-14);
  EXPECT_NEAR(wrap_angle(-3 * kTwoPi + 1.0), 1.0, 1e-13);
  double w = wrap_angle(kPi);
  EXPECT_GE(w, -kPi);
  EXPECT_LT(w, kPi);
}

TEST(TensorIo, RoundTripIsExact) {
  auto t = testing::random_tensor(Shape{3, 2, 4}, 5);
  EXPECT_EQ(decode_tensor(encode_tensor(t)), t);
  auto path = std::filesystem::temp_directory_path() / "mdvalse_io_test.mdls";
  write_tensor(path, t);
  EXPECT_EQ(read_tensor(path), t);
  std::filesystem::remove(path);
}

TEST(TensorIo, LayoutIsLittleEndian) {
  SpectralTensor t(Shape{2}, {cdouble(1.0, 0.0), cdouble(0.0, -2.0)});
  auto bytes = encode_tensor(t);
  ASSERT_EQ(bytes.size(), 4u + 1 + 1 + 4 + 2 * 16);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MDLS");
  EXPECT_EQ(bytes[5], 1u);
  EXPECT_EQ(bytes[6], 2u);
  EXPECT_EQ(bytes[7], 0u);
  // 1.0 = 0x3FF0000000000000
  EXPECT_EQ(bytes[10 + 7], 0x3Fu);
  EXPECT_EQ(bytes[10 + 6], 0xF0u);
}

TEST(TensorIo, MalformedInputs) {
  auto good = encode_tensor(testing::random_tensor(Shape{2, 2}, 9));
  std::vector<std::uint8_t> short_header(good.begin(), good.begin() + 5);
  EXPECT_THROW(decode_tensor(short_header), FormatError);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_tensor(bad_magic), FormatError);

  auto bad_version = good;
  bad_version[4] = 99;
  EXPECT_THROW(decode_tensor(bad_version), FormatError);

  auto zero_rank = good;
  zero_rank[5] = 0;
  EXPECT_THROW(decode_tensor(zero_rank), FormatError);

  auto zero_dim = good;
  zero_dim[6] = zero_dim[7] = zero_dim[8] = zero_dim[9] = 0;
  EXPECT_THROW(decode_tensor(zero_dim), FormatError);

  auto truncated = good;
  truncated.pop_back();
  EXPECT_THROW(decode_tensor(truncated), FormatError);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_THROW(decode_tensor(trailing), FormatError);

  EXPECT_ANY_THROW(read_tensor("/nonexistent/path/x.mdls"));
}

}  // namespace
}  // namespace mdvalse
