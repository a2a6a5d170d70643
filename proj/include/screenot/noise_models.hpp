#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "screenot/errors.hpp"
#include "screenot/matrix_lab.hpp"
#include "screenot/rng.hpp"

namespace screenot {

/// The noise ensembles driven by the experiment harness. The correlated
/// ensembles are Z = W S^{1/2} with W iid N(0, 1/n) and S a diagonal of
/// iid draws from the named eigenvalue law.
enum class NoiseKind {
  MarcenkoPastur,  // iid N(0, 1/n)
  Chi10,           // S ~ mean of 10 squared standard normals (mean 1)
  Mix2,            // S ~ equal mix of atoms 1 and 10
  Unif,            // S ~ Uniform[1, 10]
  Fisher3n,        // W1 S2^{-1/2} with a Wishart S2 (see gen_noise)
  PaddedIdentity,  // identity padded with zero rows; all singular values 1
  Ar1,             // independent AR(1) columns, innovation weight (1 - rho)
};

inline const char* noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::MarcenkoPastur: return "MarcenkoPastur";
    case NoiseKind::Chi10: return "Chi10";
    case NoiseKind::Mix2: return "Mix2";
    case NoiseKind::Unif: return "Unif";
    case NoiseKind::Fisher3n: return "Fisher3n";
    case NoiseKind::PaddedIdentity: return "PaddedIdentity";
    case NoiseKind::Ar1: return "AR1";
  }
  return "?";
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::MarcenkoPastur;
  double gamma = 1.0;           // target shape p/n
  double rho = 0.2;             // AR(1) coefficient, in [0, 1)
  std::uint64_t seed = 0;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConstraintError("NoiseSpec: gamma not in (0, 1]");
    if (kind == NoiseKind::Ar1 && !(rho >= 0.0 && rho < 1.0))
      throw ConstraintError("NoiseSpec: rho not in [0, 1)");
  }
};

struct SignalSpec {
  std::vector<double> spikes;   // strictly decreasing, positive; may be empty
  std::uint64_t seed = 0;

  void validate() const {
    for (std::size_t i = 0; i < spikes.size(); ++i) {
      if (!(spikes[i] > 0.0)) throw ConstraintError("SignalSpec: spikes must be positive");
      if (i > 0 && !(spikes[i] < spikes[i - 1]))
        throw ConstraintError("SignalSpec: spikes must be strictly decreasing");
    }
  }
};

namespace detail {

/// Column-major fill so the draw order is independent of how the matrix is
/// consumed downstream.
inline Matrix gaussian_matrix(SplitMix64& rng, int rows, int cols, double sd) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = sd * rng.next_normal();
  return m;
}

/// Diagonal of S for the correlated-columns ensembles.
inline Vector covariance_eigenvalues(SplitMix64& rng, NoiseKind kind, int p) {
  Vector s(p);
  switch (kind) {
    case NoiseKind::Chi10:
      for (int j = 0; j < p; ++j) {
        double acc = 0.0;
        for (int t = 0; t < 10; ++t) {
          const double g = rng.next_normal();
          acc += g * g;
        }
        s(j) = acc / 10.0;
      }
      break;
    case NoiseKind::Mix2:
      for (int j = 0; j < p; ++j) s(j) = rng.next_uniform() < 0.5 ? 1.0 : 10.0;
      break;
    case NoiseKind::Unif:
      for (int j = 0; j < p; ++j) s(j) = 1.0 + 9.0 * rng.next_uniform();
      break;
    default:
      throw ConstraintError("covariance_eigenvalues: not a correlated-columns kind");
  }
  return s;
}

// The Fisher denominator: S2 = W2^T W2 with W2 of shape (8p) x p and
// entries N(0, 1/(8p)), so E[S2] = I with Wishart aspect ratio 1/8. The
// ensemble's reference bulk edges and thresholds correspond to this ratio.
constexpr int kFisherRows = 8;

}  // namespace detail

/// Sample a noise matrix. Requires p <= n (normalize the shape first).
inline Matrix gen_noise(const NoiseSpec& spec, int n, int p) {
  spec.validate();
  if (p > n) throw ConstraintError("gen_noise: requires p <= n");
  if (n < 1 || p < 1) throw ConstraintError("gen_noise: n, p must be >= 1");
  SplitMix64 rng(spec.seed);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  switch (spec.kind) {
    case NoiseKind::MarcenkoPastur:
      return detail::gaussian_matrix(rng, n, p, inv_sqrt_n);

    case NoiseKind::Chi10:
    case NoiseKind::Mix2:
    case NoiseKind::Unif: {
      Vector s = detail::covariance_eigenvalues(rng, spec.kind, p);
      Matrix w = detail::gaussian_matrix(rng, n, p, inv_sqrt_n);
      for (int j = 0; j < p; ++j) w.col(j) *= std::sqrt(s(j));
      return w;
    }

    case NoiseKind::Fisher3n: {
      Matrix w1 = detail::gaussian_matrix(rng, n, p, inv_sqrt_n);
      const int m = detail::kFisherRows * p;
      Matrix w2 = detail::gaussian_matrix(rng, m, p, 1.0 / std::sqrt(static_cast<double>(m)));
      Matrix s2 = Matrix::Zero(p, p);
      s2.selfadjointView<Eigen::Lower>().rankUpdate(w2.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(s2.selfadjointView<Eigen::Lower>());
      Vector inv_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cwiseInverse();
      return w1 * (es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose());
    }

    case NoiseKind::PaddedIdentity: {
      Matrix z = Matrix::Zero(n, p);
      z.topRows(p).setIdentity();
      return z;
    }

    case NoiseKind::Ar1: {
      Matrix z(n, p);
      for (int j = 0; j < p; ++j) {
        double prev = rng.next_normal();
        z(0, j) = prev;
        for (int i = 1; i < n; ++i) {
          prev = spec.rho * prev + (1.0 - spec.rho) * rng.next_normal();
          z(i, j) = prev;
        }
      }
      return z * inv_sqrt_n;
    }
  }
  throw ConstraintError("gen_noise: unknown kind");
}

/// Singular values of gen_noise(spec, n, p) without materializing the dense
/// matrix product chain: the same random draws, but the spectrum is taken
/// from the p x p Gram matrix (generalized eigenproblem for Fisher3n).
/// Matches svd(gen_noise(...)).s up to eigensolver roundoff.
inline Vector noise_spectrum(const NoiseSpec& spec, int n, int p) {
  spec.validate();
  if (p > n) throw ConstraintError("noise_spectrum: requires p <= n");
  SplitMix64 rng(spec.seed);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  switch (spec.kind) {
    case NoiseKind::PaddedIdentity:
      return Vector::Ones(p);

    case NoiseKind::Fisher3n: {
      Matrix w1 = detail::gaussian_matrix(rng, n, p, inv_sqrt_n);
      const int m = detail::kFisherRows * p;
      Matrix w2 = detail::gaussian_matrix(rng, m, p, 1.0 / std::sqrt(static_cast<double>(m)));
      Matrix g1 = Matrix::Zero(p, p);
      g1.selfadjointView<Eigen::Lower>().rankUpdate(w1.transpose());
      Matrix s2 = Matrix::Zero(p, p);
      s2.selfadjointView<Eigen::Lower>().rankUpdate(w2.transpose());
      // eig of S2^{-1/2} G1 S2^{-1/2} == generalized eig G1 v = t S2 v
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(
          Matrix(g1.selfadjointView<Eigen::Lower>()), Matrix(s2.selfadjointView<Eigen::Lower>()),
          Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
      Vector s(p);
      for (int i = 0; i < p; ++i) s(i) = std::sqrt(std::max(0.0, es.eigenvalues()(p - 1 - i)));
      return s;
    }

    default:
      return singular_values(gen_noise(spec, n, p));
  }
}

/// A rank-r signal with prescribed singular values and uniformly random
/// orthonormal frames on both sides.
struct SignalSample {
  Vector spikes;  // r, descending
  Matrix left;    // n x r, orthonormal columns
  Matrix right;   // p x r, orthonormal columns

  Matrix materialize() const {
    if (spikes.size() == 0) return Matrix::Zero(left.rows(), right.rows());
    return left * spikes.asDiagonal() * right.transpose();
  }
};

inline SignalSample gen_signal(const SignalSpec& spec, int n, int p) {
  spec.validate();
  const int r = static_cast<int>(spec.spikes.size());
  if (r > std::min(n, p)) throw ConstraintError("gen_signal: rank exceeds min(n, p)");

  SignalSample out;
  out.spikes = Eigen::Map<const Vector>(spec.spikes.data(), r);
  if (r == 0) {
    out.left = Matrix::Zero(n, 0);
    out.right = Matrix::Zero(p, 0);
    return out;
  }
  SplitMix64 rng(spec.seed);
  Matrix ga = detail::gaussian_matrix(rng, n, r, 1.0);
  Matrix gb = detail::gaussian_matrix(rng, p, r, 1.0);
  Eigen::HouseholderQR<Matrix> qa(ga), qb(gb);
  out.left = qa.householderQ() * Matrix::Identity(n, r);
  out.right = qb.householderQ() * Matrix::Identity(p, r);
  return out;
}

}  // namespace screenot
