#include "qathermo/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qathermo/error.hpp"

namespace qathermo {

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) fail(Errc::invalid_argument, "Rng::below needs a positive bound");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do v = engine_();
  while (v >= limit);
  return v % bound;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SpinConfig::SpinConfig(std::vector<int> spins) : spins_(std::move(spins)) {
  if (spins_.size() < 3 || spins_.size() % 2 == 0)
    fail(Errc::domain, "spin configuration length must be odd and at least 3, got " + std::to_string(spins_.size()));
  for (int s : spins_)
    if (s != 1 && s != -1) fail(Errc::domain, "spins must be +1 or -1");
}

std::string SpinConfig::to_string() const {
  std::string out;
  out.reserve(spins_.size());
  for (int s : spins_) out.push_back(s > 0 ? '+' : '-');
  return out;
}

SpinConfig SpinConfig::parse(std::string_view text) {
  static constexpr std::string_view kUnicodeMinus = "\xE2\x88\x92";
  std::vector<int> spins;
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '+') {
      spins.push_back(1);
      ++i;
    } else if (text[i] == '-') {
      spins.push_back(-1);
      ++i;
    } else if (text.substr(i, kUnicodeMinus.size()) == kUnicodeMinus) {
      spins.push_back(-1);
      i += kUnicodeMinus.size();
    } else {
      fail(Errc::parse, "unexpected symbol in spin string at offset " + std::to_string(i));
    }
  }
  return SpinConfig(std::move(spins));
}

SampleSet::SampleSet(RingSpec ring, std::vector<int> counts, SampleMetadata metadata)
    : ring_(ring), counts_(std::move(counts)), metadata_(std::move(metadata)) {
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const int k = counts_[i];
    if (k % 2 == 0)
      fail(Errc::parity, "sample " + std::to_string(i) + " has even wall count " + std::to_string(k));
    if (k < 1 || k > ring_.size())
      fail(Errc::range, "sample " + std::to_string(i) + " has wall count " + std::to_string(k) +
                            " outside [1, " + std::to_string(ring_.size()) + "]");
  }
}

double EmpiricalHistogram::mean_density() const {
  double m = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) m += wall_count_at(i) * freq[i];
  return m / ring.size();
}

EmpiricalHistogram EmpiricalHistogram::from_frequencies(RingSpec ring, std::vector<double> freq) {
  if (freq.size() != ring.support_size())
    fail(Errc::mismatch, "histogram has " + std::to_string(freq.size()) + " bins, ring of size " +
                             std::to_string(ring.size()) + " needs " + std::to_string(ring.support_size()));
  double sum = 0.0;
  for (double f : freq) {
    if (!(f >= 0.0) || !std::isfinite(f)) fail(Errc::domain, "histogram frequencies must be finite and non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(Errc::domain, "histogram frequencies sum to " + std::to_string(sum));
  return {ring, std::move(freq)};
}

std::vector<int> draw_counts(const DomainWallPmf& pmf, std::uint64_t shots, Rng& rng) {
  std::vector<double> cdf(pmf.probs.size());
  std::partial_sum(pmf.probs.begin(), pmf.probs.end(), cdf.begin());
  // Guard against a total just below 1 leaving the top of [0, 1) uncovered.
  cdf.back() = 1.0;
  std::vector<int> counts;
  counts.reserve(shots);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    counts.push_back(wall_count_at(static_cast<std::size_t>(it - cdf.begin())));
  }
  return counts;
}

SampleSet sample_counts(Temperature t, RingSpec ring, std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) fail(Errc::domain, "shots must be at least 1");
  Rng rng(seed);
  SampleMetadata meta;
  meta.seed = seed;
  meta.t_eff = t.value();
  return SampleSet(ring, draw_counts(domain_wall_pmf(t, ring), shots, rng), std::move(meta));
}

SpinConfig realize_config(RingSpec ring, int n_dw, Rng& rng) {
  const int n = ring.size();
  if (n_dw % 2 == 0) fail(Errc::parity, "wall count must be odd, got " + std::to_string(n_dw));
  if (n_dw < 1 || n_dw > n)
    fail(Errc::range, "wall count " + std::to_string(n_dw) + " outside [1, " + std::to_string(n) + "]");

  // Partial Fisher-Yates picks n_dw of the n bonds; bond i joins spins i and i+1.
  std::vector<int> bonds(static_cast<std::size_t>(n));
  std::iota(bonds.begin(), bonds.end(), 0);
  std::vector<bool> wall(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n_dw; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(n - i));
    std::swap(bonds[static_cast<std::size_t>(i)], bonds[j]);
    wall[static_cast<std::size_t>(bonds[static_cast<std::size_t>(i)])] = true;
  }

  std::vector<int> spins(static_cast<std::size_t>(n));
  spins[0] = rng.bernoulli(0.5) ? 1 : -1;
  for (std::size_t i = 0; i + 1 < spins.size(); ++i) spins[i + 1] = wall[i] ? spins[i] : -spins[i];
  // The closing bond n-1 is consistent automatically because n - n_dw is even.
  return SpinConfig(std::move(spins));
}

SpinConfig realize_config(RingSpec ring, int n_dw, std::uint64_t seed) {
  Rng rng(seed);
  return realize_config(ring, n_dw, rng);
}

int count_domain_walls(const SpinConfig& config) {
  const auto s = config.spins();
  int walls = 0;
  for (std::size_t i = 0; i < s.size(); ++i) walls += s[i] == s[(i + 1) % s.size()];
  return walls;
}

EmpiricalHistogram empirical_histogram(const SampleSet& samples) {
  if (samples.shots() == 0) fail(Errc::domain, "cannot build a histogram from zero shots");
  const RingSpec ring = samples.ring();
  std::vector<std::uint64_t> tally(ring.support_size(), 0);
  for (int k : samples.counts()) ++tally[support_index(k)];
  EmpiricalHistogram h{ring, std::vector<double>(tally.size())};
  const double total = static_cast<double>(samples.shots());
  for (std::size_t i = 0; i < tally.size(); ++i) h.freq[i] = static_cast<double>(tally[i]) / total;
  return h;
}

}  // namespace qathermo
