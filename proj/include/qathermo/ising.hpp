#pragma once

// Exact statistics of the odd antiferromagnetic Ising ring
//
//   h = s_1 s_2 + s_2 s_3 + ... + s_N s_1,   N odd.
//
// A domain wall is a bond whose two spins are equal. For an odd ring the wall
// count k is always odd, and the distribution over k at dimensionless
// temperature t is
//
//   p(k; t) = 2 C(N, k) exp(-2k / t) / Z(t, N),
//   Z(t, N) = 2^N exp(-N / t) [cosh^N(1/t) - sinh^N(1/t)].
//
// Everything here is evaluated in log space so that rings with thousands of
// spins stay finite at any temperature in [1e-3, 1e12].

#include <cstddef>
#include <vector>

namespace qathermo {

/// An odd ring of at least three spins.
class RingSpec {
 public:
  explicit RingSpec(int n_qb);

  int size() const noexcept { return n_qb_; }
  /// Number of admissible wall counts: 1, 3, ..., n_qb.
  std::size_t support_size() const noexcept { return static_cast<std::size_t>(n_qb_ + 1) / 2; }

  friend bool operator==(const RingSpec&, const RingSpec&) = default;

 private:
  int n_qb_;
};

/// Wall count stored at support index `i`, and the inverse.
constexpr int wall_count_at(std::size_t i) noexcept { return static_cast<int>(2 * i + 1); }
constexpr std::size_t support_index(int n_dw) noexcept { return static_cast<std::size_t>(n_dw - 1) / 2; }

/// Strictly positive, finite dimensionless temperature. Values above
/// `kInfinity` are clamped to it; that cap stands in for t = infinity.
class Temperature {
 public:
  static constexpr double kInfinity = 1e12;

  explicit Temperature(double t);

  double value() const noexcept { return t_; }
  double beta() const noexcept { return 1.0 / t_; }

 private:
  double t_;
};

/// Probability of each odd wall count 1, 3, ..., n_qb.
struct DomainWallPmf {
  RingSpec ring;
  std::vector<double> probs;  // probs[i] is p(2i + 1)

  double operator()(int n_dw) const { return probs.at(support_index(n_dw)); }
  double mean_wall_count() const;
};

/// ln Z(t, n_qb).
double log_partition(Temperature t, RingSpec ring);

DomainWallPmf domain_wall_pmf(Temperature t, RingSpec ring);

/// Evaluates domain_wall_pmf repeatedly for one ring, caching ln(2 C(n, k)).
class PmfEvaluator {
 public:
  explicit PmfEvaluator(RingSpec ring);

  RingSpec ring() const noexcept { return ring_; }
  DomainWallPmf operator()(Temperature t) const;

 private:
  RingSpec ring_;
  std::vector<double> log_degeneracy_;
};

/// <N_dw> / n_qb, in (1/n_qb, 1/2).
double mean_density(Temperature t, RingSpec ring);

/// Bisection inverse of mean_density. Throws Errc::saturation when the target
/// is at or below 1/n_qb (frozen) or at or above 1/2 (infinite temperature).
Temperature invert_mean_density(double target_density, RingSpec ring);

// ---------------------------------------------------------------------------
// Enumeration oracle

inline constexpr int kMaxEnumerationSize = 21;

struct Enumeration {
  DomainWallPmf pmf;
  /// ln of sum over all 2^n configurations of exp(-h / t), with h the raw ring
  /// energy (2 N_dw - n_qb). Equals log_partition + n_qb / t.
  double log_weight_sum;
};

/// Sums Boltzmann weights over every spin configuration. Throws Errc::size for
/// n_qb above kMaxEnumerationSize.
Enumeration enumerate_ring(Temperature t, RingSpec ring);

inline DomainWallPmf brute_force_pmf(Temperature t, RingSpec ring) { return enumerate_ring(t, ring).pmf; }

}  // namespace qathermo
