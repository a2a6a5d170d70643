#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "screenot/errors.hpp"
#include "screenot/pseudo_noise.hpp"
#include "screenot/spectral.hpp"

namespace screenot {

struct ThresholdResult {
  double theta_hat = 0.0;
  int retained_rank = 0;
  Strategy strategy = Strategy::Impute;
  double gamma_used = 0.0;
  AtomicCDF pseudo_cdf;
  int solver_iterations = 0;
  double psi_at_theta = 0.0;
};

struct NormalizedShape {
  int n = 0;       // larger dimension
  int p = 0;       // smaller dimension
  double gamma = 0.0;  // p/n in (0, 1]
};

/// Orient the shape so that p <= n; gamma = p/n.
inline NormalizedShape normalize_shape(int n, int p) {
  if (n < 1 || p < 1) throw ConstraintError("normalize_shape: n, p must be >= 1");
  NormalizedShape s;
  s.n = std::max(n, p);
  s.p = std::min(n, p);
  s.gamma = static_cast<double>(s.p) / static_cast<double>(s.n);
  return s;
}

/// The full pipeline: sort the observed spectrum, amputate the top k values
/// and fit the prosthesis chosen by `strategy`, then solve the master
/// equation Psi(theta) = -4 on the resulting pseudo-noise CDF. Returns the
/// threshold together with the rank it retains on the input spectrum.
///
/// k must be an upper bound on the unknown signal rank for the optimality
/// guarantees to apply; the computation itself only requires the strategy's
/// rank bound (2k+1 <= p for imputation, k < p otherwise).
inline ThresholdResult screenot(std::vector<double> spectrum, int n, int p, int k,
                                Strategy strategy = Strategy::Impute, double tol = 1e-9) {
  const NormalizedShape shape = normalize_shape(n, p);
  SingularSpectrum y(std::move(spectrum), shape.n, shape.p);  // sorts, validates

  AtomicCDF pseudo = pseudo_noise_cdf(y, k, strategy);
  const ThresholdSolve solve = solve_optimal_threshold(pseudo, shape.gamma, tol);

  ThresholdResult out{solve.theta, 0, strategy, shape.gamma, std::move(pseudo),
                      solve.iterations, solve.psi_value};
  out.retained_rank = static_cast<int>(std::count_if(
      y.values.begin(), y.values.end(), [&](double v) { return v > solve.theta; }));
  return out;
}

}  // namespace screenot
