#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "screenot/pseudo_noise.hpp"
#include "screenot/rng.hpp"

using namespace screenot;

namespace {
SingularSpectrum spec54321() { return SingularSpectrum({5, 4, 3, 2, 1}, 5, 5); }
}  // namespace

TEST(SingularSpectrum, SortsDefensivelyAndValidates) {
  SingularSpectrum y({1, 3, 2}, 7, 3);
  EXPECT_EQ(y.values, (std::vector<double>{3, 2, 1}));
  EXPECT_THROW(SingularSpectrum({1, -2, 3}, 7, 3), ConstraintError);
  EXPECT_THROW(SingularSpectrum({1, 2}, 7, 3), ConstraintError);  // wrong length
  EXPECT_THROW(SingularSpectrum({1, std::nan(""), 3}, 7, 3), ConstraintError);
}

TEST(TransportToZero, Definitional) {
  auto F = transport_to_zero(spec54321(), 2);
  EXPECT_EQ(F.atoms(), (std::vector<double>{3, 2, 1, 0, 0}));
  EXPECT_EQ(transport_to_zero(spec54321(), 0).atoms(), (std::vector<double>{5, 4, 3, 2, 1}));
  auto G = transport_to_zero(SingularSpectrum({1, 1, 1}, 3, 3), 2);
  EXPECT_EQ(G.atoms(), (std::vector<double>{1, 0, 0}));
}

TEST(Winsorize, Definitional) {
  auto F = winsorize(spec54321(), 2);
  EXPECT_EQ(F.atoms(), (std::vector<double>{3, 3, 3, 2, 1}));
  EXPECT_DOUBLE_EQ(F.bulk_edge(), 3.0);
  EXPECT_EQ(winsorize(spec54321(), 0).atoms(), (std::vector<double>{5, 4, 3, 2, 1}));
  // Degenerate: clipping to a zero value yields the all-zero CDF.
  auto G = winsorize(SingularSpectrum({2, 0}, 2, 2), 1);
  EXPECT_EQ(G.atoms(), (std::vector<double>{0, 0}));
  EXPECT_TRUE(G.all_zero());
}

TEST(RankBounds, Rejected) {
  EXPECT_THROW(transport_to_zero(spec54321(), 5), ConstraintError);
  EXPECT_THROW(winsorize(spec54321(), 5), ConstraintError);
  EXPECT_THROW(impute(spec54321(), 3), ConstraintError);  // 2k+1 = 7 > 5
  EXPECT_THROW(impute(spec54321(), -1), ConstraintError);
  EXPECT_NO_THROW(impute(spec54321(), 2));  // 2k+1 = 5 = p accepted
}

TEST(Impute, HandValues) {
  const double denom = std::cbrt(4.0) - 1.0;
  auto F = impute(spec54321(), 2);
  const double y1 = 3.0 + 2.0 / denom;                                    // 6.4047...
  const double y2 = 3.0 + (1.0 - std::pow(0.5, 2.0 / 3.0)) * 2.0 / denom;  // 4.2599...
  ASSERT_EQ(F.size(), 5u);
  EXPECT_NEAR(F.atoms()[0], y1, 1e-12);
  EXPECT_NEAR(F.atoms()[0], 6.40473, 1e-4);
  EXPECT_NEAR(F.atoms()[1], y2, 1e-12);
  EXPECT_NEAR(F.atoms()[1], 4.25992, 1e-4);
  EXPECT_EQ(F.atoms()[2], 3.0);
  EXPECT_EQ(F.atoms()[3], 2.0);
  EXPECT_EQ(F.atoms()[4], 1.0);
}

TEST(Impute, SingleValueProsthesis) {
  SingularSpectrum y({9, 3, 2}, 3, 3);
  auto F = impute(y, 1);
  EXPECT_NEAR(F.atoms()[0], 3.0 + 1.0 / (std::cbrt(4.0) - 1.0), 1e-12);
  EXPECT_NEAR(F.atoms()[0], 4.70240, 1e-4);
}

TEST(Impute, FlatTailCollapses) {
  SingularSpectrum y({9, 8, 3, 3, 3}, 5, 5);
  auto F = impute(y, 2);
  EXPECT_EQ(F.atoms(), (std::vector<double>{3, 3, 3, 3, 3}));
}

TEST(Impute, KZeroIsIdentity) {
  EXPECT_EQ(impute(spec54321(), 0).atoms(), (std::vector<double>{5, 4, 3, 2, 1}));
}

TEST(AllStrategies, OutputShapeAndOrderInvariants) {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 5 + static_cast<int>(rng.next_u64() % 60);
    std::vector<double> v(p);
    for (double& x : v) x = 10.0 * rng.next_uniform();
    SingularSpectrum y(std::move(v), p + 3, p);
    const int k = static_cast<int>(rng.next_u64() % ((p - 1) / 2 + 1));
    for (Strategy s : {Strategy::TransportToZero, Strategy::Winsorize, Strategy::Impute}) {
      AtomicCDF F = pseudo_noise_cdf(y, k, s);
      ASSERT_EQ(F.size(), static_cast<std::size_t>(p));
      for (std::size_t i = 0; i + 1 < F.atoms().size(); ++i)
        ASSERT_GE(F.atoms()[i], F.atoms()[i + 1]);
      ASSERT_GE(F.atoms().back(), 0.0);
    }
    // Imputed prosthesis sits in order above the clip point.
    AtomicCDF Fi = impute(y, k);
    for (int i = 0; i + 1 < k; ++i) ASSERT_GE(Fi.atoms()[i], Fi.atoms()[i + 1]);
    if (k > 0) ASSERT_GE(Fi.atoms()[k - 1], y.values[k]);
  }
}

TEST(KsDistance, HandValues) {
  AtomicCDF F({1, 0}), G({1, 1});
  EXPECT_DOUBLE_EQ(ks_distance(F, F), 0.0);
  EXPECT_DOUBLE_EQ(ks_distance(F, G), 0.5);
  EXPECT_DOUBLE_EQ(ks_distance(G, F), 0.5);
}

TEST(KsDistance, PseudoNoiseWithinKOverP) {
  // Replacing k atoms moves the CDF by at most k/p at any point, whatever
  // the strategy; this is the deterministic half of the KS bound.
  SplitMix64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 11 + static_cast<int>(rng.next_u64() % 80);
    std::vector<double> v(p);
    for (double& x : v) x = 5.0 * rng.next_uniform();
    SingularSpectrum y(std::move(v), p, p);
    const int k = static_cast<int>(rng.next_u64() % ((p - 1) / 2 + 1));
    AtomicCDF base(y.values);
    for (Strategy s : {Strategy::TransportToZero, Strategy::Winsorize, Strategy::Impute}) {
      const double d = ks_distance(pseudo_noise_cdf(y, k, s), base);
      ASSERT_LE(d, static_cast<double>(k) / p);
    }
  }
}
