#include "qathermo/thermometer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "qathermo/error.hpp"

namespace qathermo {

namespace {

constexpr std::pair<RegimeFlag, std::string_view> kFlagNames[] = {
    {RegimeFlag::zero_temperature, "zero_temperature"},
    {RegimeFlag::high_t_saturation, "high_t_saturation"},
    {RegimeFlag::poor_fit, "poor_fit"},
};

constexpr double kGolden = 0.3819660112501051;  // 2 - phi
constexpr double kGrow = 1.618033988749895;
constexpr double kFlatTolerance = 1e-12;

void check_same_ring(RingSpec a, RingSpec b) {
  if (a != b)
    fail(Errc::mismatch, "ring sizes differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

double half_l1(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(Errc::mismatch, "distributions have different support sizes");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return std::clamp(0.5 * s, 0.0, 1.0);
}

/// Probability of any excitation above the single-wall ground state.
double excitation_probability(Temperature t, RingSpec ring) {
  const double log_p1 = std::log(2.0 * ring.size()) - 2.0 * t.beta() - log_partition(t, ring);
  return -std::expm1(log_p1);
}

/// TVD as a function of u = ln t.
class Objective {
 public:
  Objective(const EmpiricalHistogram& hist, RingSpec ring) : hist_(hist), pmf_(ring) {}

  double operator()(double u) const { return tvd(hist_, pmf_(Temperature(std::exp(u)))); }

 private:
  const EmpiricalHistogram& hist_;
  PmfEvaluator pmf_;
};

struct Bracket {
  double a, b, c;     // a <= b <= c in ln t
  double fa, fb, fc;  // objective at each
};

}  // namespace

std::string Flags::to_string() const {
  std::string out;
  for (const auto& [flag, name] : kFlagNames) {
    if (!has(flag)) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

Flags Flags::parse(std::string_view text) {
  Flags flags;
  while (!text.empty()) {
    const auto bar = text.find('|');
    const std::string_view token = text.substr(0, bar);
    bool known = false;
    for (const auto& [flag, name] : kFlagNames) {
      if (token == name) {
        flags.set(flag);
        known = true;
      }
    }
    if (!known) fail(Errc::parse, "unknown flag '" + std::string(token) + "'");
    if (bar == std::string_view::npos) break;
    text.remove_prefix(bar + 1);
  }
  return flags;
}

double tvd(const EmpiricalHistogram& hist, const DomainWallPmf& pmf) {
  check_same_ring(hist.ring, pmf.ring);
  return half_l1(hist.freq, pmf.probs);
}

double tvd(const EmpiricalHistogram& a, const EmpiricalHistogram& b) {
  check_same_ring(a.ring, b.ring);
  return half_l1(a.freq, b.freq);
}

double zero_temperature_delta(RingSpec ring, const EstimatorOptions& options) {
  if (options.zero_t_delta) return *options.zero_t_delta;
  // Bisect ln t for 1 - p(1) = resolution_floor; excitation grows with t.
  double lo = std::log(1e-4);
  double hi = std::log(Temperature::kInfinity);
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (excitation_probability(Temperature(std::exp(mid)), ring) < options.resolution_floor)
      lo = mid;
    else
      hi = mid;
  }
  const Temperature t_res(std::exp(0.5 * (lo + hi)));
  return 0.5 * (mean_density(t_res, ring) - 1.0 / ring.size());
}

Flags classify_regime(const EmpiricalHistogram& hist, RingSpec ring, std::optional<double> epsilon,
                      const EstimatorOptions& options) {
  check_same_ring(hist.ring, ring);
  const double density = hist.mean_density();
  Flags flags;
  if (density <= 1.0 / ring.size() + zero_temperature_delta(ring, options)) flags.set(RegimeFlag::zero_temperature);
  if (density >= 0.5 - options.high_t_delta) flags.set(RegimeFlag::high_t_saturation);
  if (epsilon && *epsilon > options.poor_fit_threshold) flags.set(RegimeFlag::poor_fit);
  return flags;
}

EstimateResult estimate_temperature(const EmpiricalHistogram& hist, RingSpec ring, const EstimatorOptions& options) {
  check_same_ring(hist.ring, ring);
  if (!(options.t_min > 0.0) || !(options.t_max > options.t_min))
    fail(Errc::invalid_argument, "estimator bounds must satisfy 0 < t_min < t_max");
  if (options.max_iterations < 1) fail(Errc::invalid_argument, "iteration cap must be positive");

  const Objective objective(hist, ring);
  const double u_lo = std::log(options.t_min);
  const double u_hi = std::log(std::min(options.t_max, Temperature::kInfinity));

  EstimateResult result;
  result.flags = classify_regime(hist, ring, std::nullopt, options);
  if (result.flags.has(RegimeFlag::zero_temperature)) {
    result.epsilon = objective(u_lo);
    result.converged = true;
    if (result.epsilon > options.poor_fit_threshold) result.flags.set(RegimeFlag::poor_fit);
    return result;
  }

  double t0;
  try {
    t0 = invert_mean_density(hist.mean_density(), ring).value();
  } catch (const Error& e) {
    if (e.code() != Errc::saturation) throw;
    t0 = hist.mean_density() >= 0.5 ? options.t_max : options.t_min;
  }
  const double u0 = std::clamp(std::log(t0), u_lo, u_hi);

  // Bracket the minimum, growing the step geometrically in the downhill direction.
  double step = options.initial_step;
  Bracket br{std::max(u_lo, u0 - step), u0, std::min(u_hi, u0 + step), 0, 0, 0};
  br.fa = objective(br.a);
  br.fb = objective(br.b);
  br.fc = objective(br.c);
  int iterations = 0;
  bool on_boundary = false;
  while (!(br.fb <= br.fa && br.fb <= br.fc) && iterations < options.max_iterations) {
    ++iterations;
    step *= kGrow;
    if (br.fa < br.fb) {
      if (br.a <= u_lo) {
        on_boundary = true;
        break;
      }
      br.c = br.b, br.fc = br.fb;
      br.b = br.a, br.fb = br.fa;
      br.a = std::max(u_lo, br.b - step);
      br.fa = objective(br.a);
    } else {
      if (br.c >= u_hi) {
        on_boundary = true;
        break;
      }
      br.a = br.b, br.fa = br.fb;
      br.b = br.c, br.fb = br.fc;
      br.c = std::min(u_hi, br.b + step);
      br.fc = objective(br.c);
    }
  }

  double u_best = br.b;
  double f_best = br.fb;
  bool converged = false;
  if (on_boundary) {
    u_best = br.fa < br.fb ? br.a : br.c;
    f_best = std::min(br.fa, br.fc);
    converged = true;
  } else if (std::max({br.fa, br.fb, br.fc}) - std::min({br.fa, br.fb, br.fc}) <= kFlatTolerance) {
    u_best = 0.5 * (br.a + br.c);
    f_best = objective(u_best);
    converged = true;
  } else {
    // Brent's parabolic/golden-section minimization on [a, c].
    double a = br.a, b = br.c;
    double x = br.b, w = br.b, v = br.b;
    double fx = br.fb, fw = br.fb, fv = br.fb;
    double d = 0.0, e = 0.0;
    while (iterations < options.max_iterations) {
      const double xm = 0.5 * (a + b);
      // |dt| = t |du| for small du.
      const double tol1 = 0.25 * options.t_tolerance / std::exp(x) + 1e-15 * std::abs(x);
      const double tol2 = 2.0 * tol1;
      if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) {
        converged = true;
        break;
      }
      ++iterations;
      bool golden = true;
      if (std::abs(e) > tol1) {
        double r = (x - w) * (fx - fv);
        double q = (x - v) * (fx - fw);
        double p = (x - v) * q - (x - w) * r;
        q = 2.0 * (q - r);
        if (q > 0.0) p = -p;
        q = std::abs(q);
        const double e_prev = e;
        e = d;
        if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
          d = p / q;
          const double u = x + d;
          if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
          golden = false;
        }
      }
      if (golden) {
        e = x >= xm ? a - x : b - x;
        d = kGolden * e;
      }
      const double u = std::abs(d) >= tol1 ? x + d : x + std::copysign(tol1, d);
      const double fu = objective(u);
      if (fu <= fx) {
        (u >= x ? a : b) = x;
        v = w, fv = fw;
        w = x, fw = fx;
        x = u, fx = fu;
      } else {
        (u < x ? a : b) = u;
        if (fu <= fw || w == x) {
          v = w, fv = fw;
          w = u, fw = fu;
        } else if (fu <= fv || v == x || v == w) {
          v = u, fv = fu;
        }
      }
    }
    u_best = x;
    f_best = fx;
  }

  result.t_eff = Temperature(std::exp(u_best));
  result.epsilon = f_best;
  result.iterations = iterations;
  result.converged = converged;
  result.flags = classify_regime(hist, ring, result.epsilon, options);
  return result;
}

}  // namespace qathermo
