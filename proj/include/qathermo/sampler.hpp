#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qathermo/ising.hpp"

namespace qathermo {

/// Seeded generator used by every stochastic routine. Wraps std::mt19937_64
/// seeded directly with the 64-bit seed; the uniform and bounded draws below
/// are written out by hand so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t bound);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with an index (splitmix64) to give independent streams
/// for grid points of a sweep.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

/// A +/-1 spin assignment on an odd ring.
class SpinConfig {
 public:
  explicit SpinConfig(std::vector<int> spins);

  RingSpec ring() const { return RingSpec(static_cast<int>(spins_.size())); }
  std::span<const int> spins() const noexcept { return spins_; }
  std::size_t size() const noexcept { return spins_.size(); }
  void flip(std::size_t i) { spins_[i] = -spins_[i]; }

  /// "+-+-+" rendering.
  std::string to_string() const;
  /// Parses '+' and '-' (ASCII or U+2212). Throws Errc::parse on other symbols.
  static SpinConfig parse(std::string_view text);

 private:
  std::vector<int> spins_;
};

enum class SampleSource { synthetic, ingested };

struct SampleMetadata {
  SampleSource source = SampleSource::synthetic;
  std::optional<std::uint64_t> seed;
  std::optional<double> t_eff;
  std::optional<double> j_enc;
  std::optional<double> tau_us;
  std::optional<std::string> machine;
  std::optional<std::string> perturbation;
};

/// Observed wall counts for one ensemble, in draw order.
class SampleSet {
 public:
  SampleSet(RingSpec ring, std::vector<int> counts, SampleMetadata metadata = {});

  RingSpec ring() const noexcept { return ring_; }
  std::span<const int> counts() const noexcept { return counts_; }
  std::size_t shots() const noexcept { return counts_.size(); }
  const SampleMetadata& metadata() const noexcept { return metadata_; }

 private:
  RingSpec ring_;
  std::vector<int> counts_;
  SampleMetadata metadata_;
};

/// Normalized frequency xi(N_dw) over the full odd support.
struct EmpiricalHistogram {
  RingSpec ring;
  std::vector<double> freq;  // freq[i] is xi(2i + 1)

  double operator()(int n_dw) const { return freq.at(support_index(n_dw)); }
  double mean_density() const;

  /// Validates and wraps raw frequencies (must be non-negative and sum to 1).
  static EmpiricalHistogram from_frequencies(RingSpec ring, std::vector<double> freq);
  static EmpiricalHistogram from_pmf(const DomainWallPmf& pmf) { return {pmf.ring, pmf.probs}; }
};

/// Draws i.i.d. wall counts from domain_wall_pmf(t, ring) by inverse CDF.
SampleSet sample_counts(Temperature t, RingSpec ring, std::uint64_t shots, std::uint64_t seed);
std::vector<int> draw_counts(const DomainWallPmf& pmf, std::uint64_t shots, Rng& rng);

/// Uniformly random configuration with exactly `n_dw` walls.
SpinConfig realize_config(RingSpec ring, int n_dw, std::uint64_t seed);
SpinConfig realize_config(RingSpec ring, int n_dw, Rng& rng);

/// Number of cyclic neighbor pairs with equal spins.
int count_domain_walls(const SpinConfig& config);

EmpiricalHistogram empirical_histogram(const SampleSet& samples);

}  // namespace qathermo
