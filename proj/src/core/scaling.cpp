#include "qathermo/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qathermo/error.hpp"

namespace qathermo {

bool ExclusionPolicy::excludes(Flags flags) const {
  return (zero_temperature && flags.has(RegimeFlag::zero_temperature)) ||
         (high_t_saturation && flags.has(RegimeFlag::high_t_saturation)) ||
         (poor_fit && flags.has(RegimeFlag::poor_fit));
}

FitResult fit_teff_scaling(const std::vector<SweepPoint>& points, const FitOptions& options) {
  std::vector<const SweepPoint*> used;
  for (const auto& p : points) {
    if (!(p.x > 0.0) || !std::isfinite(p.x)) fail(Errc::domain, "sweep abscissa must be positive");
    if (!options.exclusion.excludes(p.flags)) used.push_back(&p);
  }

  FitResult fit;
  fit.points_used = static_cast<int>(used.size());
  fit.points_excluded = static_cast<int>(points.size() - used.size());
  if (used.size() < 2)
    fail(Errc::insufficient_points, "need at least two usable points, have " + std::to_string(used.size()));

  // Centered sums keep the normal equations well conditioned.
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (const auto* p : used) {
    const double w = options.weighted ? p->weight : 1.0;
    if (!(w > 0.0)) fail(Errc::domain, "fit weights must be positive");
    sw += w;
    swx += w * p->x;
    swy += w * p->t_eff;
  }
  const double x_bar = swx / sw;
  const double y_bar = swy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto* p : used) {
    const double w = options.weighted ? p->weight : 1.0;
    const double dx = p->x - x_bar;
    const double dy = p->t_eff - y_bar;
    sxx += w * dx * dx;
    sxy += w * dx * dy;
    syy += w * dy * dy;
  }
  if (!(sxx > 0.0)) fail(Errc::degenerate_abscissa, "all usable points share the same abscissa");

  fit.alpha = sxy / sxx;
  fit.tbar = y_bar - fit.alpha * x_bar;

  double ssr = 0.0;
  for (const auto* p : used) {
    const double w = options.weighted ? p->weight : 1.0;
    const double r = p->t_eff - (fit.tbar + fit.alpha * p->x);
    ssr += w * r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;

  const auto dof = static_cast<double>(used.size()) - 2.0;
  if (dof > 0.0) {
    const double s2 = ssr / dof;
    fit.stderr_alpha = std::sqrt(s2 / sxx);
    fit.stderr_tbar = std::sqrt(s2 * (1.0 / sw + x_bar * x_bar / sxx));
  } else {
    fit.stderr_alpha = fit.stderr_tbar = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

AggregateResult aggregate_over_sizes(const std::vector<SizedEstimate>& results, int min_size) {
  struct Group {
    bool has_size = false;
    std::vector<const SizedEstimate*> members;
  };
  std::map<double, Group> groups;
  const ExclusionPolicy degenerate{};
  for (const auto& r : results) {
    Group& g = groups[r.x];
    if (r.n_qb < min_size) continue;
    g.has_size = true;
    if (!degenerate.excludes(r.flags)) g.members.push_back(&r);
  }

  AggregateResult out;
  for (const auto& [x, g] : groups) {
    if (!g.has_size)
      fail(Errc::empty_group, "no estimate with n_qb >= " + std::to_string(min_size) + " at x = " + std::to_string(x));
    if (g.members.empty()) {
      out.dropped.push_back(x);
      continue;
    }
    AggregatePoint a;
    a.point.x = x;
    a.point.tau_us = g.members.front()->tau_us;
    a.t_min = std::numeric_limits<double>::infinity();
    a.t_max = -std::numeric_limits<double>::infinity();
    double sum_t = 0.0, sum_eps = 0.0;
    for (const auto* m : g.members) {
      sum_t += m->t_eff;
      sum_eps += m->epsilon;
      a.t_min = std::min(a.t_min, m->t_eff);
      a.t_max = std::max(a.t_max, m->t_eff);
      if (m->flags.has(RegimeFlag::poor_fit)) a.point.flags.set(RegimeFlag::poor_fit);
    }
    a.sizes = static_cast<int>(g.members.size());
    a.point.t_eff = sum_t / a.sizes;
    a.point.epsilon = sum_eps / a.sizes;
    a.point.n_qb = 0;
    a.spread = a.t_max - a.t_min;
    out.points.push_back(a);
  }
  return out;
}

}  // namespace qathermo
