#pragma once

// Recovery of the offset scaling law t_eff = tbar + alpha * x from sweeps of
// estimated temperatures, where x is either 1/j_enc or T_machine / J_phys.

#include <optional>
#include <vector>

#include "qathermo/thermometer.hpp"

namespace qathermo {

struct SweepPoint {
  double x = 0.0;
  double t_eff = 0.0;
  double epsilon = 0.0;
  Flags flags;
  int n_qb = 0;
  double tau_us = 0.0;
  /// Only consulted by weighted fits.
  double weight = 1.0;
};

struct ExclusionPolicy {
  bool zero_temperature = true;
  bool high_t_saturation = true;
  bool poor_fit = false;

  bool excludes(Flags flags) const;
};

struct FitOptions {
  ExclusionPolicy exclusion;
  bool weighted = false;
};

struct FitResult {
  double tbar = 0.0;
  double alpha = 0.0;
  /// NaN when only two points are used (no residual degrees of freedom).
  double stderr_tbar = 0.0;
  double stderr_alpha = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
  int points_excluded = 0;
};

/// Least squares of t_eff on x with intercept. Throws Errc::insufficient_points
/// with fewer than two usable points and Errc::degenerate_abscissa when all
/// usable x coincide.
FitResult fit_teff_scaling(const std::vector<SweepPoint>& points, const FitOptions& options = {});

/// One estimate at ring size n_qb and abscissa x.
struct SizedEstimate {
  int n_qb = 0;
  double x = 0.0;
  double t_eff = 0.0;  // ignored when flags mark a degenerate regime
  double epsilon = 0.0;
  Flags flags;
  double tau_us = 0.0;
};

struct AggregatePoint {
  SweepPoint point;  // t_eff is the size-average, epsilon the mean fit TVD
  double t_min = 0.0;
  double t_max = 0.0;
  double spread = 0.0;  // t_max - t_min
  int sizes = 0;
};

struct AggregateResult {
  std::vector<AggregatePoint> points;  // ascending x
  /// Abscissae whose entries were all degenerate and therefore dropped.
  std::vector<double> dropped;
};

/// Averages t_eff over sizes n_qb >= min_size for each distinct x.
/// Degenerate-flagged entries (zero_temperature, high_t_saturation) are
/// removed first. Throws Errc::empty_group for an x with no entry of size at
/// least min_size.
AggregateResult aggregate_over_sizes(const std::vector<SizedEstimate>& results, int min_size = 100);

}  // namespace qathermo
