#include <gtest/gtest.h>

#include "mdvalse/selfcheck.hpp"

namespace mdvalse {
namespace {

void expect_pass(const CheckResult& r) {
  EXPECT_TRUE(r.passed) << r.name << ": worst " << r.worst << " tol " << r.tolerance << " " << r.detail;
  EXPECT_FALSE(r.informational);
}

TEST(Selfcheck, SupportEnumeration) { expect_pass(check_support_enumeration({})); }
TEST(Selfcheck, RankOneDeltas) { expect_pass(check_rank_one_deltas({})); }
TEST(Selfcheck, NoiseIdentity) { expect_pass(check_noise_identity({})); }
TEST(Selfcheck, FftCorrelation) { expect_pass(check_fft_correlation({})); }
TEST(Selfcheck, MeanResultantRoundTrip) { expect_pass(check_mean_resultant_roundtrip({})); }

TEST(Selfcheck, TamperedSupportIsCaught) {
  SelfcheckOptions o;
  o.tamper_support = true;
  EXPECT_FALSE(check_support_enumeration(o).passed);
}

}  // namespace
}  // namespace mdvalse
