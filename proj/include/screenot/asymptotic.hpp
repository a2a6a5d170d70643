#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "screenot/errors.hpp"
#include "screenot/spectral.hpp"

namespace screenot {

/// Limiting quantities evaluated on a plugin noise spectrum: the bulk edge,
/// the (heuristic) phase transition, the optimal threshold, and the spike
/// loss curves R0/R1 built from the spike maps. "Plugin" means a large
/// finite spectrum stands in for the limiting law everywhere.
class PluginModel {
 public:
  PluginModel(AtomicCDF spectrum, double gamma, double tol = 1e-9)
      : H_(std::move(spectrum)), gamma_(gamma) {
    z_plus_ = H_.bulk_edge();
    x_plus_ = bbp_location(H_, gamma_);
    t_gamma_ = optimal_threshold(H_, gamma_, tol);
    x_star_ = 1.0 / std::sqrt(big_d(t_gamma_, H_, gamma_));
  }

  const AtomicCDF& spectrum() const { return H_; }
  double gamma() const { return gamma_; }
  double bulk_edge() const { return z_plus_; }
  double transition() const { return x_plus_; }      // heuristic X+
  double threshold() const { return t_gamma_; }      // T_gamma(H)
  double crossing_spike() const { return x_star_; }  // x* = Y^{-1}(T_gamma)

  bool above_transition(double x) const { return x > x_plus_; }

  /// Limiting observed singular value of a spike: Y(x) above the
  /// transition, the bulk edge otherwise.
  double observed_limit(double x) const {
    return above_transition(x) ? spike_forward(x, H_, gamma_) : z_plus_;
  }

  double cosine(double x) const { return spike_cosine(x, H_, gamma_); }

  /// Loss of discarding the spike.
  static double r0(double x) { return x * x; }

  /// Loss of keeping the spike's observed component (defined above the
  /// transition): x^2 + Y^2 - 2 x Y C.
  double r1(double x) const {
    if (!above_transition(x))
      throw ConstraintError("r1: spike at or below the phase transition");
    const double y = spike_forward(x, H_, gamma_);
    return x * x + y * y - 2.0 * x * y * cosine(x);
  }

  /// Asymptotic loss of thresholding at theta: each spike pays R0 if its
  /// observed limit falls at or below theta, R1 if it survives.
  double ase(std::span<const double> spikes, double theta) const {
    if (!(theta > z_plus_))
      throw ConstraintError("ase: theta must exceed the bulk edge (loss diverges below)");
    double total = 0.0;
    for (double x : spikes) {
      const double y_inf = observed_limit(x);
      total += (y_inf <= theta) ? r0(x) : r1(x);
    }
    return total;
  }

  /// min over theta of ase: each spike pays R0 below the transition and
  /// min(R0, R1) above.
  double ase_star(std::span<const double> spikes) const {
    double total = 0.0;
    for (double x : spikes)
      total += above_transition(x) ? std::min(r0(x), r1(x)) : r0(x);
    return total;
  }

  /// The interval of thresholds attaining ase_star: between the largest
  /// observed limit below T_gamma (at least the bulk edge) and the smallest
  /// one above (infinity if none).
  std::pair<double, double> optimal_interval(std::span<const double> spikes) const {
    double lo = z_plus_;
    double hi = std::numeric_limits<double>::infinity();
    for (double x : spikes) {
      const double y_inf = observed_limit(x);
      if (y_inf < t_gamma_)
        lo = std::max(lo, y_inf);
      else if (y_inf > t_gamma_)
        hi = std::min(hi, y_inf);
    }
    return {lo, hi};
  }

 private:
  AtomicCDF H_;
  double gamma_;
  double z_plus_;
  double x_plus_;
  double t_gamma_;
  double x_star_;
};

}  // namespace screenot
