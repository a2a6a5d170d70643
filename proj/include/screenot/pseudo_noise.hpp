#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "screenot/errors.hpp"
#include "screenot/spectral.hpp"

namespace screenot {

/// Observed singular values of an n-by-p data matrix, sorted nonincreasing.
/// After shape normalization p <= n and the spectrum has length p.
struct SingularSpectrum {
  std::vector<double> values;
  int n = 0;
  int p = 0;

  SingularSpectrum(std::vector<double> v, int n_, int p_) : values(std::move(v)), n(n_), p(p_) {
    if (n < 1 || p < 1) throw ConstraintError("SingularSpectrum: n, p must be >= 1");
    if (static_cast<int>(values.size()) != std::min(n, p))
      throw ConstraintError("SingularSpectrum: expected " + std::to_string(std::min(n, p)) +
                            " values, got " + std::to_string(values.size()));
    for (double v_ : values) {
      if (!std::isfinite(v_)) throw ConstraintError("SingularSpectrum: non-finite value");
      if (v_ < 0.0) throw ConstraintError("SingularSpectrum: negative singular value");
    }
    std::sort(values.begin(), values.end(), std::greater<double>());
  }
};

/// How the top k observed singular values are replaced when reconstructing
/// the noise CDF from the observed one.
enum class Strategy {
  TransportToZero,  // replace with k zeros
  Winsorize,        // replace with k copies of y_{k+1}
  Impute,           // reconstruct the missing upper tail from the edge profile
};

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::TransportToZero: return "zero";
    case Strategy::Winsorize: return "winsorize";
    case Strategy::Impute: return "impute";
  }
  return "?";
}

namespace detail {
inline void require_rank_bound(const SingularSpectrum& y, int k, bool imputing) {
  const int p = static_cast<int>(y.values.size());
  if (k < 0) throw ConstraintError("rank bound k must be >= 0");
  if (imputing) {
    if (2 * k + 1 > p)
      throw ConstraintError("impute requires 2k+1 <= p, got k=" + std::to_string(k) +
                            ", p=" + std::to_string(p));
  } else if (k >= p) {
    throw ConstraintError("rank bound k=" + std::to_string(k) +
                          " must be < p=" + std::to_string(p));
  }
}
}  // namespace detail

/// F^0_{n,k}: drop the top k values, append k zeros.
inline AtomicCDF transport_to_zero(const SingularSpectrum& y, int k) {
  detail::require_rank_bound(y, k, false);
  std::vector<double> atoms(y.values.begin() + k, y.values.end());
  atoms.insert(atoms.end(), static_cast<std::size_t>(k), 0.0);
  return AtomicCDF(std::move(atoms));
}

/// F^w_{n,k}: clip the top k values to y_{k+1}.
inline AtomicCDF winsorize(const SingularSpectrum& y, int k) {
  detail::require_rank_bound(y, k, false);
  std::vector<double> atoms(y.values.begin() + k, y.values.end());
  atoms.insert(atoms.end(), static_cast<std::size_t>(k), y.values[k]);
  return AtomicCDF(std::move(atoms));
}

/// F^i_{n,k}: replace the top k values with pseudo singular values
///   y~_i = y_{k+1} + [1 - ((i-1)/k)^{2/3}] / (2^{2/3} - 1) * (y_{k+1} - y_{2k+1})
/// for i = 1..k, extrapolating the square-root edge profile of the bulk
/// upward from y_{k+1}. k = 0 is the identity.
inline AtomicCDF impute(const SingularSpectrum& y, int k) {
  detail::require_rank_bound(y, k, true);
  std::vector<double> atoms = y.values;
  if (k > 0) {
    const double gap = y.values[k] - y.values[2 * k];  // y_{k+1} - y_{2k+1} >= 0
    const double denom = std::cbrt(4.0) - 1.0;         // 2^{2/3} - 1
    for (int i = 1; i <= k; ++i) {
      const double frac = std::pow(static_cast<double>(i - 1) / k, 2.0 / 3.0);
      atoms[i - 1] = y.values[k] + (1.0 - frac) / denom * gap;
    }
  }
  return AtomicCDF(std::move(atoms));
}

inline AtomicCDF pseudo_noise_cdf(const SingularSpectrum& y, int k, Strategy s) {
  switch (s) {
    case Strategy::TransportToZero: return transport_to_zero(y, k);
    case Strategy::Winsorize: return winsorize(y, k);
    case Strategy::Impute: return impute(y, k);
  }
  throw ConstraintError("unknown strategy");
}

/// Kolmogorov-Smirnov distance between two atomic CDFs, computed exactly
/// over the merged atom set (both step functions are right-continuous and
/// constant between atoms, so the sup is attained at an atom). Counts are
/// cross-multiplied in integer arithmetic and divided once, so the k/p
/// bound on the pseudo-noise CDFs holds with no tolerance.
inline double ks_distance(const AtomicCDF& F, const AtomicCDF& G) {
  const auto count_le = [](const AtomicCDF& h, double z) -> long long {
    const auto& a = h.atoms();
    auto first_le =
        std::partition_point(a.begin(), a.end(), [z](double v) { return v > z; });
    return static_cast<long long>(a.end() - first_le);
  };
  const long long pf = static_cast<long long>(F.size());
  const long long pg = static_cast<long long>(G.size());
  long long sup_num = 0;
  for (const AtomicCDF* h : {&F, &G})
    for (double z : h->atoms())
      sup_num = std::max(sup_num, std::abs(count_le(F, z) * pg - count_le(G, z) * pf));
  return static_cast<double>(sup_num) / (static_cast<double>(pf) * static_cast<double>(pg));
}

}  // namespace screenot
