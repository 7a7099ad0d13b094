#include "qathermo/ising.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "qathermo/error.hpp"

namespace qathermo {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

/// Pieces shared by Z and <n_dw>, written in terms of x = exp(-2/t):
///
///   (1 + x)^N - (1 - x)^N = (1 + x)^N [1 - r^N],   r = (1 - x)/(1 + x) = tanh(1/t)
///
/// and r^k = exp(-2k atanh(x)). Keeping atanh(x) in log form lets the
/// frozen limit (x underflows) and the hot limit (x -> 1) both stay exact.
struct RingTerms {
  double log_x;        // -2/t
  double x;            // may underflow to 0
  double log_atanh_x;  // ln atanh(x), finite even when x underflows
};

RingTerms ring_terms(Temperature t) {
  RingTerms r{};
  r.log_x = -2.0 * t.beta();
  r.x = std::exp(r.log_x);
  if (r.x < 1e-8) {
    r.log_atanh_x = r.log_x + r.x * r.x / 3.0;
  } else if (r.x < 0.5) {
    r.log_atanh_x = std::log(std::atanh(r.x));
  } else {
    // 1 - x from expm1 so that t ~ 1e12 does not cancel to zero.
    r.log_atanh_x = std::log(0.5 * (std::log1p(r.x) - std::log(-std::expm1(r.log_x))));
  }
  return r;
}

/// ln(1 - exp(y)) for y = -exp(log_neg_y) < 0.
double log1m_exp_neg(double log_neg_y) {
  const double neg_y = std::exp(log_neg_y);
  if (neg_y < 1e-5) {
    const double y = -neg_y;
    return log_neg_y + std::log1p(y / 2.0 + y * y / 6.0 + y * y * y / 24.0);
  }
  if (neg_y < kLn2) return std::log(-std::expm1(-neg_y));
  return std::log1p(-std::exp(-neg_y));
}

/// ln(1 - r^k).
double log1m_rpow(const RingTerms& r, int k) {
  return log1m_exp_neg(std::log(2.0 * k) + r.log_atanh_x);
}

/// r^k.
double rpow(const RingTerms& r, int k) { return std::exp(-2.0 * k * std::exp(r.log_atanh_x)); }

double log_choose(int n, int k) {
  using boost::math::lgamma;
  return lgamma(static_cast<double>(n) + 1.0) - lgamma(static_cast<double>(k) + 1.0) -
         lgamma(static_cast<double>(n - k) + 1.0);
}

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double a : v) s += std::exp(a - m);
  return m + std::log(s);
}

}  // namespace

RingSpec::RingSpec(int n_qb) : n_qb_(n_qb) {
  if (n_qb < 3) fail(Errc::domain, "ring size must be at least 3, got " + std::to_string(n_qb));
  if (n_qb % 2 == 0) fail(Errc::domain, "ring size must be odd, got " + std::to_string(n_qb));
}

Temperature::Temperature(double t) : t_(t) {
  if (!std::isfinite(t) || t <= 0.0)
    fail(Errc::domain, "temperature must be positive and finite, got " + std::to_string(t));
  t_ = std::min(t, kInfinity);
}

double DomainWallPmf::mean_wall_count() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) m += wall_count_at(i) * probs[i];
  return m;
}

double log_partition(Temperature t, RingSpec ring) {
  const int n = ring.size();
  const RingTerms r = ring_terms(t);
  return n * std::log1p(r.x) + log1m_rpow(r, n);
}

/// <N_dw> - 1 as a ratio of positive series in x^2, relative to p(1):
///   p(k) / p(1) = C(N, k) x^(k-1) / N.
/// Used when N x <= 1, where the closed form buries the excess under 1/N.
double excess_wall_count(int n, double x) {
  const double x2 = x * x;
  double term = 1.0;
  double s0 = 1.0;
  double s1 = 0.0;
  for (int k = 1; k + 2 <= n; k += 2) {
    term *= static_cast<double>(n - k) * (n - k - 1) / ((k + 1.0) * (k + 2.0)) * x2;
    s0 += term;
    s1 += (k + 1) * term;
    if (term < 1e-20 * s0) break;
  }
  return s1 / s0;
}

double mean_density(Temperature t, RingSpec ring) {
  const int n = ring.size();
  const RingTerms r = ring_terms(t);
  double density;
  if (n * r.x <= 1.0) {
    density = (1.0 + excess_wall_count(n, r.x)) / n;
  } else {
    // <n_dw> = x/(1+x) * (1 + r^(N-1)) / (1 - r^N)
    const double log_n = r.log_x - std::log1p(r.x) + std::log1p(rpow(r, n - 1)) - log1m_rpow(r, n);
    density = std::exp(log_n);
  }
  // Rounding can land a few ulps outside the exact bounds at the extremes.
  return std::clamp(density, 1.0 / n, 0.5);
}

Temperature invert_mean_density(double target_density, RingSpec ring) {
  const double floor = 1.0 / ring.size();
  if (!(target_density > floor))
    fail(Errc::saturation, "density " + std::to_string(target_density) +
                               " is at or below the ground-state value 1/" + std::to_string(ring.size()));
  if (!(target_density < 0.5))
    fail(Errc::saturation, "density " + std::to_string(target_density) + " is at or above the infinite-temperature value 1/2");

  double lo = std::log(1e-4);
  double hi = std::log(Temperature::kInfinity);
  if (mean_density(Temperature(std::exp(lo)), ring) >= target_density) return Temperature(std::exp(lo));
  if (mean_density(Temperature(std::exp(hi)), ring) <= target_density) return Temperature(std::exp(hi));
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mean_density(Temperature(std::exp(mid)), ring) < target_density)
      lo = mid;
    else
      hi = mid;
  }
  return Temperature(std::exp(0.5 * (lo + hi)));
}

PmfEvaluator::PmfEvaluator(RingSpec ring) : ring_(ring) {
  log_degeneracy_.resize(ring.support_size());
  for (std::size_t i = 0; i < log_degeneracy_.size(); ++i)
    log_degeneracy_[i] = kLn2 + log_choose(ring.size(), wall_count_at(i));
}

DomainWallPmf PmfEvaluator::operator()(Temperature t) const {
  std::vector<double> logw(log_degeneracy_.size());
  for (std::size_t i = 0; i < logw.size(); ++i)
    logw[i] = log_degeneracy_[i] - 2.0 * wall_count_at(i) * t.beta();
  const double log_z = log_sum_exp(logw);
  DomainWallPmf pmf{ring_, std::vector<double>(logw.size())};
  for (std::size_t i = 0; i < logw.size(); ++i) pmf.probs[i] = std::exp(logw[i] - log_z);
  return pmf;
}

DomainWallPmf domain_wall_pmf(Temperature t, RingSpec ring) { return PmfEvaluator(ring)(t); }

Enumeration enumerate_ring(Temperature t, RingSpec ring) {
  const int n = ring.size();
  if (n > kMaxEnumerationSize)
    fail(Errc::size, "enumeration is limited to rings of at most " + std::to_string(kMaxEnumerationSize) +
                         " spins, got " + std::to_string(n));

  // Group configurations by raw energy E = sum s_i s_{i+1}, then weight each
  // group once. Weights are taken relative to the lowest energy -n + 2.
  std::vector<long long> multiplicity(static_cast<std::size_t>(n) + 1, 0);
  const std::uint32_t total = 1u << n;
  for (std::uint32_t bits = 0; bits < total; ++bits) {
    int energy = 0;
    for (int i = 0; i < n; ++i) {
      const int a = (bits >> i) & 1u ? 1 : -1;
      const int b = (bits >> ((i + 1) % n)) & 1u ? 1 : -1;
      energy += a * b;
    }
    const int walls = (energy + n) / 2;
    ++multiplicity[static_cast<std::size_t>(walls)];
  }

  const double e_min = 2.0 - n;
  std::vector<double> weight(ring.support_size(), 0.0);
  double sum = 0.0;
  for (int walls = 0; walls <= n; ++walls) {
    if (multiplicity[static_cast<std::size_t>(walls)] == 0) continue;
    if (walls % 2 == 0) fail(Errc::parity, "enumeration produced an even wall count");
    const double energy = 2.0 * walls - n;
    const double w = static_cast<double>(multiplicity[static_cast<std::size_t>(walls)]) *
                     std::exp(-(energy - e_min) * t.beta());
    weight[support_index(walls)] = w;
    sum += w;
  }

  Enumeration out{DomainWallPmf{ring, std::vector<double>(weight.size())}, std::log(sum) - e_min * t.beta()};
  for (std::size_t i = 0; i < weight.size(); ++i) out.pmf.probs[i] = weight[i] / sum;
  return out;
}

}  // namespace qathermo
