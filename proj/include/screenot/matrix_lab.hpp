#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "screenot/errors.hpp"

namespace screenot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SvdTriple {
  Matrix U;  // n x m, orthonormal columns
  Vector s;  // m = min(n, p), nonincreasing
  Matrix V;  // p x m, orthonormal columns
};

namespace detail {
inline void require_finite(const Matrix& A, const char* who) {
  if (!A.allFinite()) throw ConstraintError(std::string(who) + ": non-finite entries");
}
}  // namespace detail

/// Thin SVD. Divide-and-conquer for anything nontrivial, one-sided Jacobi
/// for tiny inputs where it is both faster and more accurate.
inline SvdTriple svd(const Matrix& A) {
  detail::require_finite(A, "svd");
  if (std::min(A.rows(), A.cols()) <= 16) {
    Eigen::JacobiSVD<Matrix> j(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {j.matrixU(), j.singularValues(), j.matrixV()};
  }
  Eigen::BDCSVD<Matrix> b(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {b.matrixU(), b.singularValues(), b.matrixV()};
}

/// Singular values only, via the Gram matrix of the smaller side. Much
/// faster than a full SVD at the simulation sizes used here; absolute
/// accuracy is ~eps * s_max^2 / s, ample for spectra feeding the
/// threshold solver.
inline Vector singular_values(const Matrix& A) {
  detail::require_finite(A, "singular_values");
  const bool wide = A.rows() < A.cols();
  const Eigen::Index m = std::min(A.rows(), A.cols());
  Matrix G = Matrix::Zero(m, m);
  if (wide)
    G.selfadjointView<Eigen::Lower>().rankUpdate(A);
  else
    G.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(G.selfadjointView<Eigen::Lower>(),
                                           Eigen::EigenvaluesOnly);
  Vector s(m);
  for (Eigen::Index i = 0; i < m; ++i)
    s(i) = std::sqrt(std::max(0.0, es.eigenvalues()(m - 1 - i)));
  return s;
}

/// Sum of the dyads with singular value strictly above theta, accumulated
/// in descending order. The oracle below replays the same accumulation so
/// that per-level losses coincide bitwise with this reconstruction.
inline Matrix hard_threshold_reconstruct(const SvdTriple& svd_, double theta) {
  if (!(theta >= 0.0)) throw ConstraintError("hard_threshold_reconstruct: theta must be >= 0");
  Matrix out = Matrix::Zero(svd_.U.rows(), svd_.V.rows());
  for (Eigen::Index i = 0; i < svd_.s.size(); ++i) {
    if (svd_.s(i) > theta)
      out.noalias() += svd_.s(i) * svd_.U.col(i) * svd_.V.col(i).transpose();
  }
  return out;
}

/// Squared Frobenius distance.
inline double se_loss(const Matrix& X, const Matrix& Xhat) {
  if (X.rows() != Xhat.rows() || X.cols() != Xhat.cols())
    throw ConstraintError("se_loss: shape mismatch");
  return (X - Xhat).squaredNorm();
}

/// Oracle-side of a denoising report: the lowest loss achievable by any
/// hard threshold on this realization, which rank attains it, and the open
/// interval of thresholds realizing it. attained_oracle is filled in by the
/// caller once a concrete threshold is chosen.
struct DenoiseReport {
  double se_at_theta = std::numeric_limits<double>::quiet_NaN();
  double oracle_se = 0.0;
  int oracle_rank = 0;
  double interval_lo = 0.0;
  double interval_hi = std::numeric_limits<double>::infinity();
  bool attained_oracle = false;
};

/// levels[kk] = ||X - Xhat_[kk]||_F^2 for kk = 0..m, where Xhat_[kk] keeps
/// the top kk components. The reconstruction is accumulated in the same
/// descending order as hard_threshold_reconstruct, so levels[kk] coincides
/// bitwise with se_loss(X, hard_threshold_reconstruct(svdY, theta)) for any
/// theta strictly between y_{kk+1} and y_kk.
inline std::vector<double> threshold_loss_levels(const Matrix& X, const SvdTriple& svdY) {
  if (X.rows() != svdY.U.rows() || X.cols() != svdY.V.rows())
    throw ConstraintError("threshold_loss_levels: shape mismatch");
  const Eigen::Index m = svdY.s.size();
  std::vector<double> levels;
  levels.reserve(m + 1);
  Matrix acc = Matrix::Zero(X.rows(), X.cols());
  levels.push_back(se_loss(X, acc));
  for (Eigen::Index kk = 1; kk <= m; ++kk) {
    acc.noalias() += svdY.s(kk - 1) * svdY.U.col(kk - 1) * svdY.V.col(kk - 1).transpose();
    levels.push_back(se_loss(X, acc));
  }
  return levels;
}

/// Same levels for a known low-rank truth X = L diag(x) R^T, through the
/// telescoping identity se(kk) - se(kk-1) = y_kk^2 - 2 y_kk <u_kk, X v_kk>.
/// O(m r (n + p)) instead of O(m n p); used by the experiment harness at
/// sizes where materializing every residual is too slow. Differs from the
/// dense version only by roundoff.
inline std::vector<double> threshold_loss_levels_low_rank(const Vector& spikes,
                                                          const Matrix& left,
                                                          const Matrix& right,
                                                          const SvdTriple& svdY) {
  if (left.rows() != svdY.U.rows() || right.rows() != svdY.V.rows())
    throw ConstraintError("threshold_loss_levels_low_rank: shape mismatch");
  const Eigen::Index m = svdY.s.size();
  const Eigen::Index r = spikes.size();

  Matrix P = svdY.U.transpose() * left;   // m x r
  Matrix Q = svdY.V.transpose() * right;  // m x r
  std::vector<double> levels;
  levels.reserve(m + 1);
  double se = spikes.squaredNorm();  // ||X||_F^2
  levels.push_back(se);
  for (Eigen::Index kk = 1; kk <= m; ++kk) {
    double c = 0.0;
    for (Eigen::Index j = 0; j < r; ++j) c += P(kk - 1, j) * spikes(j) * Q(kk - 1, j);
    se += svdY.s(kk - 1) * svdY.s(kk - 1) - 2.0 * svdY.s(kk - 1) * c;
    levels.push_back(se);
  }
  return levels;
}

namespace detail {
inline DenoiseReport report_from_levels(const std::vector<double>& levels, const Vector& s) {
  const Eigen::Index m = s.size();
  Eigen::Index best_k = 0;
  for (Eigen::Index kk = 1; kk <= m; ++kk)
    if (levels[kk] < levels[best_k]) best_k = kk;  // ties keep the smaller rank
  DenoiseReport rep;
  rep.oracle_se = levels[best_k];
  rep.oracle_rank = static_cast<int>(best_k);
  rep.interval_lo = (best_k < m) ? s(best_k) : 0.0;
  rep.interval_hi = (best_k > 0) ? s(best_k - 1) : std::numeric_limits<double>::infinity();
  return rep;
}
}  // namespace detail

/// Exact oracle by rank enumeration: the loss of thresholding is piecewise
/// constant in theta, so the minimum over thresholds is the minimum over
/// the m+1 levels. Ties break toward smaller rank; the optimal interval is
/// (y_{k*+1}, y_{k*}) with y_0 = +inf and y_{m+1} = 0.
inline DenoiseReport oracle(const Matrix& X, const SvdTriple& svdY) {
  return detail::report_from_levels(threshold_loss_levels(X, svdY), svdY.s);
}

inline DenoiseReport oracle_low_rank(const Vector& spikes, const Matrix& left,
                                     const Matrix& right, const SvdTriple& svdY) {
  return detail::report_from_levels(threshold_loss_levels_low_rank(spikes, left, right, svdY),
                                    svdY.s);
}

inline bool interval_contains(const DenoiseReport& rep, double theta) {
  return theta > rep.interval_lo && theta < rep.interval_hi;
}

}  // namespace screenot
