#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "screenot/rng.hpp"
#include "screenot/screenot.hpp"

using namespace screenot;

TEST(NormalizeShape, TransposeConvention) {
  NormalizedShape s = normalize_shape(500, 1000);
  EXPECT_EQ(s.n, 1000);
  EXPECT_EQ(s.p, 500);
  EXPECT_DOUBLE_EQ(s.gamma, 0.5);
  EXPECT_DOUBLE_EQ(normalize_shape(500, 500).gamma, 1.0);
  EXPECT_DOUBLE_EQ(normalize_shape(3, 7).gamma, 3.0 / 7.0);
  EXPECT_THROW(normalize_shape(0, 5), ConstraintError);
}

TEST(Screenot, AllOnesSpectrumSqrt3) {
  std::vector<double> ones(64, 1.0);
  ThresholdResult r = screenot::screenot(ones, 64, 64, 0);
  EXPECT_NEAR(r.theta_hat, std::sqrt(3.0), 1e-8);
  EXPECT_EQ(r.retained_rank, 0);
  EXPECT_DOUBLE_EQ(r.gamma_used, 1.0);
  EXPECT_NEAR(r.psi_at_theta, -4.0, 1e-6);
}

TEST(Screenot, SortsUnsortedInput) {
  std::vector<double> shuffled{1.0, 3.0, 0.5, 2.0, 0.2, 0.7, 0.9, 0.4};
  ThresholdResult a = screenot::screenot(shuffled, 8, 8, 1);
  std::sort(shuffled.begin(), shuffled.end(), std::greater<double>());
  ThresholdResult b = screenot::screenot(shuffled, 8, 8, 1);
  EXPECT_EQ(a.theta_hat, b.theta_hat);
}

TEST(Screenot, RejectsBadInput) {
  EXPECT_THROW(screenot::screenot({1.0, std::nan("")}, 2, 2, 0), ConstraintError);
  EXPECT_THROW(screenot::screenot({1.0, -0.5}, 2, 2, 0), ConstraintError);
  std::vector<double> five{5, 4, 3, 2, 1};
  EXPECT_THROW(screenot::screenot(five, 5, 5, 3, Strategy::Impute), ConstraintError);
  EXPECT_THROW(screenot::screenot({0.0, 0.0, 0.0}, 3, 3, 0), DegenerateCdfError);
  // Winsorizing down to zero forces the degenerate solve.
  EXPECT_THROW(screenot::screenot({2.0, 0.0}, 2, 2, 1, Strategy::Winsorize), DegenerateCdfError);
}

TEST(Screenot, ScaleEquivariance) {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 30 + static_cast<int>(rng.next_u64() % 100);
    std::vector<double> y(p);
    for (double& v : y) v = 0.2 + 3.0 * rng.next_uniform();
    const int k = static_cast<int>(rng.next_u64() % 10);
    const Strategy s =
        std::array{Strategy::TransportToZero, Strategy::Winsorize, Strategy::Impute}[trial % 3];
    const double base = screenot::screenot(y, 2 * p, p, k, s).theta_hat;
    for (double c : {1e-3, 1.0, 1e3}) {
      std::vector<double> scaled = y;
      for (double& v : scaled) v *= c;
      const double theta = screenot::screenot(scaled, 2 * p, p, k, s).theta_hat;
      ASSERT_NEAR(theta, c * base, 1e-8 * c * base);
    }
  }
}

TEST(Screenot, DeterministicBitIdentical) {
  std::vector<double> y;
  SplitMix64 rng(32);
  for (int i = 0; i < 200; ++i) y.push_back(2.5 * rng.next_uniform());
  ThresholdResult a = screenot::screenot(y, 400, 200, 7);
  ThresholdResult b = screenot::screenot(y, 400, 200, 7);
  EXPECT_EQ(std::memcmp(&a.theta_hat, &b.theta_hat, sizeof(double)), 0);
  EXPECT_EQ(a.retained_rank, b.retained_rank);
  EXPECT_EQ(a.solver_iterations, b.solver_iterations);
}

TEST(Screenot, RetainedRankCountsAboveTheta) {
  // Spectrum with two clear outliers over a unit bulk.
  std::vector<double> y(100, 1.0);
  y[0] = 8.0;
  y[1] = 5.0;
  ThresholdResult r = screenot::screenot(y, 100, 100, 4);
  EXPECT_GT(r.theta_hat, 1.0);
  EXPECT_LT(r.theta_hat, 5.0);
  EXPECT_EQ(r.retained_rank, 2);
}

TEST(Screenot, RankMonotoneInTheta) {
  SplitMix64 rng(33);
  std::vector<double> y(150);
  for (double& v : y) v = 3.0 * rng.next_uniform();
  std::sort(y.begin(), y.end(), std::greater<double>());
  int prev_rank = 151;
  for (double theta : {0.1, 0.5, 1.0, 2.0, 2.9}) {
    const int rank = static_cast<int>(
        std::count_if(y.begin(), y.end(), [&](double v) { return v > theta; }));
    EXPECT_LE(rank, prev_rank);
    prev_rank = rank;
  }
}
