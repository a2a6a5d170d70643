#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "screenot/errors.hpp"

namespace screenot {

/// A finite discrete CDF of p equal-mass atoms, kept sorted nonincreasing.
/// This is the container for every spectral distribution in the library:
/// empirical noise spectra, observed spectra, and the pseudo-noise CDFs.
class AtomicCDF {
 public:
  explicit AtomicCDF(std::vector<double> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ConstraintError("AtomicCDF: needs at least one atom");
    for (double a : atoms_) {
      if (!std::isfinite(a)) throw ConstraintError("AtomicCDF: non-finite atom");
      if (a < 0.0) throw ConstraintError("AtomicCDF: negative atom");
    }
    std::sort(atoms_.begin(), atoms_.end(), std::greater<double>());
  }

  const std::vector<double>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  /// Largest atom; the upper edge of the support.
  double bulk_edge() const { return atoms_.front(); }

  bool all_zero() const { return atoms_.front() == 0.0; }

  /// F(z) = fraction of atoms <= z (right-continuous).
  double cdf(double z) const {
    auto first_le = std::partition_point(atoms_.begin(), atoms_.end(),
                                         [z](double a) { return a > z; });
    return static_cast<double>(atoms_.end() - first_le) / static_cast<double>(atoms_.size());
  }

 private:
  std::vector<double> atoms_;
};

namespace detail {

/// Neumaier compensated sum; the functionals below sum up to ~1e4 terms
/// with severe cancellation in y^2 - z^2 near the bulk edge.
class CompensatedSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline void require_above_edge(double y, const AtomicCDF& H, const char* who) {
  if (!(y > H.bulk_edge()))
    throw ConstraintError(std::string(who) + ": evaluation point " + std::to_string(y) +
                          " not above bulk edge " + std::to_string(H.bulk_edge()));
}

inline void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw ConstraintError("gamma must lie in (0, 1], got " + std::to_string(gamma));
}

}  // namespace detail

/// phi(y; H) = (1/p) sum_i y / (y^2 - z_i^2), defined for y above the edge.
inline double phi(double y, const AtomicCDF& H) {
  detail::require_above_edge(y, H, "phi");
  detail::CompensatedSum s;
  for (double z : H.atoms()) s.add(y / ((y - z) * (y + z)));
  return s.value() / static_cast<double>(H.size());
}

/// phi'(y; H) = -(1/p) sum_i (y^2 + z_i^2) / (y^2 - z_i^2)^2.
inline double phi_prime(double y, const AtomicCDF& H) {
  detail::require_above_edge(y, H, "phi_prime");
  detail::CompensatedSum s;
  for (double z : H.atoms()) {
    const double d = (y - z) * (y + z);
    s.add((y * y + z * z) / (d * d));
  }
  return -s.value() / static_cast<double>(H.size());
}

/// Companion transform: the same distribution diluted with (1-gamma) mass at
/// zero, i.e. the spectrum of the transposed matrix.
inline double phi_tilde(double y, const AtomicCDF& H, double gamma) {
  detail::require_gamma(gamma);
  return gamma * phi(y, H) + (1.0 - gamma) / y;
}

inline double phi_tilde_prime(double y, const AtomicCDF& H, double gamma) {
  detail::require_gamma(gamma);
  return gamma * phi_prime(y, H) - (1.0 - gamma) / (y * y);
}

/// D_gamma = phi * phi_tilde; positive, strictly decreasing, -> 0 at infinity.
inline double big_d(double y, const AtomicCDF& H, double gamma) {
  return phi(y, H) * phi_tilde(y, H, gamma);
}

inline double big_d_prime(double y, const AtomicCDF& H, double gamma) {
  const double p = phi(y, H);
  const double pp = phi_prime(y, H);
  return pp * phi_tilde(y, H, gamma) + p * phi_tilde_prime(y, H, gamma);
}

/// Psi_gamma(y; H) = y * (phi'/phi + phi_tilde'/phi_tilde) = y * D'/D.
/// Negative, strictly increasing on (edge, inf), tends to -2 from below.
/// The master equation Psi(theta) = -4 defines the optimal threshold.
inline double psi(double y, const AtomicCDF& H, double gamma) {
  detail::require_gamma(gamma);
  if (H.all_zero())
    throw DegenerateCdfError("psi: all atoms are zero, Psi is identically -2");
  detail::require_above_edge(y, H, "psi");
  const double p = phi(y, H);
  const double pp = phi_prime(y, H);
  const double pt = gamma * p + (1.0 - gamma) / y;
  const double ptp = gamma * pp - (1.0 - gamma) / (y * y);
  return y * (pp / p + ptp / pt);
}

struct ThresholdSolve {
  double theta = 0.0;
  int iterations = 0;
  double psi_value = 0.0;
};

/// Bisection for Psi(theta) = -4. Psi is monotone with a pole at the bulk
/// edge, so bisection converges unconditionally where Newton would not.
/// Lower bracket starts at edge*(1 + 1e-10) and is shrunk geometrically
/// toward the edge until Psi < -4 there; the upper bracket doubles its
/// distance from the edge until Psi > -4 (at most 200 doublings).
inline ThresholdSolve solve_optimal_threshold(const AtomicCDF& H, double gamma,
                                              double tol = 1e-9) {
  detail::require_gamma(gamma);
  if (!(tol > 0.0)) throw ConstraintError("optimal_threshold: tol must be positive");
  if (H.all_zero())
    throw DegenerateCdfError(
        "optimal_threshold: all atoms are zero; Psi = -2 everywhere and "
        "Psi(theta) = -4 has no solution");

  const double edge = H.bulk_edge();
  double rel = 1e-10;
  double lo = edge * (1.0 + rel);
  int guard = 0;
  while (psi(lo, H, gamma) >= -4.0) {
    rel *= 0.5;
    lo = edge * (1.0 + rel);
    if (lo <= edge || ++guard > 80)
      throw SolverError("optimal_threshold: could not bracket below the root");
  }

  double hi = edge + 1.0;
  int doublings = 0;
  while (psi(hi, H, gamma) <= -4.0) {
    hi = edge + 2.0 * (hi - edge);
    if (++doublings > 200)
      throw SolverError("optimal_threshold: upper bracket failed after 200 doublings");
  }

  // Resolve to the requested absolute width, but never coarser than
  // 1e-10 relative so that rescaling the input rescales the answer.
  ThresholdSolve out;
  const double width_goal = std::min(tol, 1e-10 * hi);
  while (hi - lo > width_goal && out.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (psi(mid, H, gamma) < -4.0)
      lo = mid;
    else
      hi = mid;
    ++out.iterations;
  }
  out.theta = 0.5 * (lo + hi);
  out.psi_value = psi(out.theta, H, gamma);
  return out;
}

/// Root of the master equation; the optimal threshold functional T_gamma(H).
inline double optimal_threshold(const AtomicCDF& H, double gamma, double tol = 1e-9) {
  return solve_optimal_threshold(H, gamma, tol).theta;
}

/// Inverse of the strictly decreasing map y -> D_gamma(y; H), by bisection.
inline double big_d_inverse(double d, const AtomicCDF& H, double gamma, double tol = 1e-12) {
  detail::require_gamma(gamma);
  if (!(d > 0.0))
    throw ConstraintError("big_d_inverse: d must be positive, got " + std::to_string(d));

  const double edge = H.bulk_edge();
  double rel = 1e-9;
  double lo = (edge > 0.0) ? edge * (1.0 + rel) : rel;
  int guard = 0;
  while (big_d(lo, H, gamma) <= d) {
    rel *= 0.5;
    lo = (edge > 0.0) ? edge * (1.0 + rel) : rel;
    if (lo <= edge || ++guard > 80)
      throw ConstraintError("big_d_inverse: d is not below the value of D at the edge");
  }
  double hi = edge + 1.0;
  int doublings = 0;
  while (big_d(hi, H, gamma) >= d) {
    hi = edge + 2.0 * (hi - edge);
    if (++doublings > 200)
      throw ConstraintError("big_d_inverse: d is below the range of D");
  }
  const double width_goal = std::min(tol, 1e-13 * hi);
  int iters = 0;
  while (hi - lo > width_goal && iters < 300) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (big_d(mid, H, gamma) > d)
      lo = mid;
    else
      hi = mid;
    ++iters;
  }
  return 0.5 * (lo + hi);
}

/// Heuristic location of the spike phase transition: D evaluated a fixed
/// 0.01 above the edge, as a stand-in for the (divergent, for atomic H)
/// limit at the edge itself. A biased estimate, reported as-is.
inline double bbp_location(const AtomicCDF& H, double gamma) {
  return 1.0 / std::sqrt(big_d(H.bulk_edge() + 0.01, H, gamma));
}

/// Limiting observed location of a spike with strength x: Y(x) = D^{-1}(1/x^2).
/// Increasing in x; defined above the (heuristic) phase transition.
inline double spike_forward(double x, const AtomicCDF& H, double gamma) {
  if (!(x > 0.0)) throw ConstraintError("spike_forward: spike must be positive");
  if (x <= bbp_location(H, gamma))
    throw ConstraintError("spike_forward: spike " + std::to_string(x) +
                          " at or below the phase transition");
  return big_d_inverse(1.0 / (x * x), H, gamma);
}

/// Limiting cosine alignment between the spike's dyad and its observed
/// counterpart: C(x) = (-2/x^3) / D'(Y(x)). Zero at or below the transition.
inline double spike_cosine(double x, const AtomicCDF& H, double gamma) {
  if (!(x > 0.0)) throw ConstraintError("spike_cosine: spike must be positive");
  if (x <= bbp_location(H, gamma)) return 0.0;
  const double y = big_d_inverse(1.0 / (x * x), H, gamma);
  return (-2.0 / (x * x * x)) / big_d_prime(y, H, gamma);
}

}  // namespace screenot
