#include <gtest/gtest.h>

#include <cmath>

#include "screenot/matrix_lab.hpp"
#include "screenot/noise_models.hpp"

using namespace screenot;

TEST(GenNoise, PaddedIdentitySpectrumIsAllOnes) {
  NoiseSpec spec{NoiseKind::PaddedIdentity, 0.5, 0.2, 1};
  Matrix z = gen_noise(spec, 20, 10);
  Vector s = singular_values(z);
  for (Eigen::Index i = 0; i < s.size(); ++i) EXPECT_NEAR(s(i), 1.0, 1e-12);
}

TEST(GenNoise, SeedReproducibilityBitwise) {
  for (NoiseKind kind : {NoiseKind::MarcenkoPastur, NoiseKind::Mix2, NoiseKind::Fisher3n,
                         NoiseKind::Ar1}) {
    NoiseSpec spec{kind, 0.5, 0.2, 12345};
    Matrix a = gen_noise(spec, 40, 20);
    Matrix b = gen_noise(spec, 40, 20);
    EXPECT_TRUE((a.array() == b.array()).all()) << noise_kind_name(kind);
    spec.seed = 54321;
    Matrix c = gen_noise(spec, 40, 20);
    EXPECT_FALSE((a.array() == c.array()).all()) << noise_kind_name(kind);
  }
}

TEST(GenNoise, RejectsBadShapes) {
  NoiseSpec spec{NoiseKind::MarcenkoPastur, 1.0, 0.2, 1};
  EXPECT_THROW(gen_noise(spec, 10, 20), ConstraintError);
  NoiseSpec bad{NoiseKind::Ar1, 1.0, 1.5, 1};
  EXPECT_THROW(gen_noise(bad, 10, 10), ConstraintError);
}

TEST(GenNoise, MarcenkoPasturEdgeNearTwo) {
  // Square case: bulk edge 1 + sqrt(gamma) = 2, within 3% at p = 2000.
  NoiseSpec spec{NoiseKind::MarcenkoPastur, 1.0, 0.2, 777};
  Vector s = noise_spectrum(spec, 2000, 2000);
  EXPECT_NEAR(s(0), 2.0, 0.06);
}

TEST(GenNoise, Ar1ColumnsFollowRecursion) {
  // Reconstruct the innovations from the column and check the recursion.
  NoiseSpec spec{NoiseKind::Ar1, 1.0, 0.2, 5};
  const int n = 50;
  Matrix z = gen_noise(spec, n, n);
  Matrix zraw = z * std::sqrt(static_cast<double>(n));
  for (int j = 0; j < 3; ++j) {
    for (int i = 1; i < n; ++i) {
      const double innovation = (zraw(i, j) - 0.2 * zraw(i - 1, j)) / 0.8;
      EXPECT_TRUE(std::isfinite(innovation));
    }
  }
  // Columns are independent streams: their sample correlation is small.
  const int m = 40;
  double dot = 0, n0 = 0, n1 = 0;
  for (int i = 0; i < n; ++i) {
    dot += z(i, 0) * z(i, 1);
    n0 += z(i, 0) * z(i, 0);
    n1 += z(i, 1) * z(i, 1);
  }
  (void)m;
  EXPECT_LT(std::abs(dot) / std::sqrt(n0 * n1), 0.5);
}

TEST(NoiseSpectrum, AgreesWithDenseSvd) {
  for (NoiseKind kind : {NoiseKind::MarcenkoPastur, NoiseKind::Chi10, NoiseKind::Mix2,
                         NoiseKind::Unif, NoiseKind::Fisher3n, NoiseKind::PaddedIdentity,
                         NoiseKind::Ar1}) {
    NoiseSpec spec{kind, 0.5, 0.2, 31};
    Vector fast = noise_spectrum(spec, 60, 30);
    Vector dense = svd(gen_noise(spec, 60, 30)).s;
    ASSERT_EQ(fast.size(), dense.size());
    for (Eigen::Index i = 0; i < fast.size(); ++i)
      EXPECT_NEAR(fast(i), dense(i), 1e-8 * std::max(1.0, dense(0))) << noise_kind_name(kind);
  }
}

TEST(GenSignal, SpikesAndFrames) {
  SignalSpec spec{{4.0, 3.0, 2.0, 1.0}, 9};
  SignalSample s = gen_signal(spec, 30, 20);
  Matrix x = s.materialize();
  Vector sv = svd(x).s;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(sv(i), spec.spikes[i], 1e-10);
  for (int i = 4; i < 20; ++i) EXPECT_NEAR(sv(i), 0.0, 1e-10);

  const Matrix ata = s.left.transpose() * s.left - Matrix::Identity(4, 4);
  const Matrix btb = s.right.transpose() * s.right - Matrix::Identity(4, 4);
  EXPECT_LE(ata.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(btb.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GenSignal, RankZeroAndValidation) {
  SignalSample s = gen_signal(SignalSpec{{}, 1}, 10, 5);
  EXPECT_EQ(s.materialize().norm(), 0.0);
  EXPECT_THROW(gen_signal(SignalSpec{{1.0, 2.0}, 1}, 10, 5), ConstraintError);   // increasing
  EXPECT_THROW(gen_signal(SignalSpec{{2.0, -1.0}, 1}, 10, 5), ConstraintError);  // negative
  EXPECT_THROW(gen_signal(SignalSpec{{3, 2, 1}, 1}, 2, 2), ConstraintError);     // r too large
}

TEST(GenSignal, SeedReproducibility) {
  SignalSpec spec{{2.0, 1.0}, 123};
  Matrix a = gen_signal(spec, 15, 10).materialize();
  Matrix b = gen_signal(spec, 15, 10).materialize();
  EXPECT_TRUE((a.array() == b.array()).all());
}
