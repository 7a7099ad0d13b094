#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "errc_check.hpp"
#include "oracles.hpp"
#include "qathermo/ising.hpp"
#include "qathermo/sampler.hpp"

using namespace qathermo;

namespace {

std::vector<int> to_vector(const SpinConfig& c) { return {c.spins().begin(), c.spins().end()}; }

}  // namespace

TEST_CASE("rng is deterministic and seed-sensitive") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
  Rng u(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(7) < 7u);
  }
  CHECK_ERRC(u.below(0), Errc::invalid_argument);

  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(5, i));
  CHECK(seeds.size() == 1000);
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
  CHECK(derive_seed(5, 3) != derive_seed(6, 3));
}

TEST_CASE("spin configuration parsing and rendering") {
  const auto c = SpinConfig::parse("+-+-+");
  CHECK(c.size() == 5);
  CHECK(c.to_string() == "+-+-+");
  CHECK(SpinConfig::parse("+−+").to_string() == "+-+");
  CHECK_ERRC(SpinConfig::parse("+-x"), Errc::parse);
  CHECK_ERRC(SpinConfig::parse("+-+-"), Errc::domain);
  CHECK_ERRC(SpinConfig({1, 0, 1}), Errc::domain);
  CHECK_ERRC(SpinConfig({1, -1}), Errc::domain);
}

TEST_CASE("domain wall counting") {
  CHECK(count_domain_walls(SpinConfig({1, 1, 1, 1, 1})) == 5);
  CHECK(count_domain_walls(SpinConfig::parse("+-+-+")) == 1);
  CHECK(count_domain_walls(SpinConfig::parse("++-")) == 1);
  CHECK(count_domain_walls(SpinConfig::parse("+++")) == 3);

  Rng rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 3 + 2 * static_cast<int>(rng.below(60));
    std::vector<int> spins(n);
    for (int& s : spins) s = rng.bernoulli(0.5) ? 1 : -1;
    const int walls = count_domain_walls(SpinConfig(spins));
    CHECK(walls == oracle::recount_walls(spins));
    CHECK(walls % 2 == 1);
  }
}

TEST_CASE("realized configurations carry the requested wall count") {
  const auto full = realize_config(RingSpec(5), 5, 1);
  const auto spins = to_vector(full);
  CHECK(std::all_of(spins.begin(), spins.end(), [&](int s) { return s == spins[0]; }));
  CHECK(count_domain_walls(realize_config(RingSpec(5), 1, 2)) == 1);

  for (int n : {3, 5, 9, 21, 101}) {
    for (int k = 1; k <= n; k += 2) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto c = realize_config(RingSpec(n), k, seed * 977 + k);
        CHECK(c.size() == static_cast<std::size_t>(n));
        CHECK(oracle::recount_walls(to_vector(c)) == k);
      }
    }
  }
  CHECK_ERRC(realize_config(RingSpec(9), 2, 0), Errc::parity);
  CHECK_ERRC(realize_config(RingSpec(9), 11, 0), Errc::range);
  CHECK_ERRC(realize_config(RingSpec(9), -1, 0), Errc::range);
}

TEST_CASE("wall positions are uniform given the count") {
  // All C(9, 3) = 84 position triples should be equally likely.
  const int n = 9;
  const int draws = 84 * 250;
  std::map<std::vector<int>, int> hits;
  int first_up = 0;
  Rng rng(2024);
  for (int d = 0; d < draws; ++d) {
    const auto spins = to_vector(realize_config(RingSpec(n), 3, rng));
    std::vector<int> walls;
    for (int i = 0; i < n; ++i)
      if (spins[i] == spins[(i + 1) % n]) walls.push_back(i);
    ++hits[walls];
    first_up += spins[0] == 1;
  }
  CHECK(hits.size() == 84);
  const double expected = draws / 84.0;
  double chi2 = 0;
  for (const auto& [k, c] : hits) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(83);
  CHECK(chi2 < boost::math::quantile(dist, 0.999));
  // Sign of the first spin is a fair coin: 4-sigma band.
  CHECK(std::fabs(first_up - draws / 2.0) < 4 * std::sqrt(draws / 4.0));
}

TEST_CASE("sample set validation") {
  CHECK_ERRC(SampleSet(RingSpec(5), {1, 2}), Errc::parity);
  CHECK_ERRC(SampleSet(RingSpec(5), {1, 7}), Errc::range);
  CHECK_ERRC(SampleSet(RingSpec(5), {1, -1}), Errc::range);
  const SampleSet ok(RingSpec(5), {1, 3, 5});
  CHECK(ok.shots() == 3);
}

TEST_CASE("empirical histogram") {
  const auto h = empirical_histogram(SampleSet(RingSpec(3), {1, 1, 1, 3}));
  CHECK(h(1) == 0.75);
  CHECK(h(3) == 0.25);

  const auto point = empirical_histogram(SampleSet(RingSpec(7), {5}));
  CHECK(point.freq == std::vector<double>{0, 0, 1, 0});

  CHECK_ERRC(EmpiricalHistogram::from_frequencies(RingSpec(3), {0.5, 0.4}), Errc::domain);
  CHECK_ERRC(EmpiricalHistogram::from_frequencies(RingSpec(3), {1.1, -0.1}), Errc::domain);
  CHECK_ERRC(EmpiricalHistogram::from_frequencies(RingSpec(3), {1.0}), Errc::mismatch);
}

TEST_CASE("sampled counts") {
  const auto one = sample_counts(Temperature(2.0), RingSpec(31), 1, 3);
  REQUIRE(one.shots() == 1);
  CHECK(one.counts()[0] % 2 == 1);
  CHECK(one.counts()[0] >= 1);
  CHECK(one.counts()[0] <= 31);

  const auto frozen = sample_counts(Temperature(0.02), RingSpec(11), 100, 5);
  CHECK(std::all_of(frozen.counts().begin(), frozen.counts().end(), [](int k) { return k == 1; }));

  CHECK_ERRC(sample_counts(Temperature(1.0), RingSpec(11), 0, 5), Errc::domain);
}

TEST_CASE("sample mean density agrees with the exact mean") {
  const RingSpec ring(101);
  const auto pmf = domain_wall_pmf(Temperature(1.0), ring);
  double m = 0, m2 = 0;
  for (std::size_t i = 0; i < pmf.probs.size(); ++i) {
    const double k = wall_count_at(i);
    m += k * pmf.probs[i];
    m2 += k * k * pmf.probs[i];
  }
  const double shots = 1e5;
  const double se = std::sqrt(m2 - m * m) / ring.size() / std::sqrt(shots);
  const auto hist = empirical_histogram(sample_counts(Temperature(1.0), ring, 100000, 7));
  CHECK(std::fabs(hist.mean_density() - mean_density(Temperature(1.0), ring)) < 3 * se);
}

TEST_CASE("sampled histograms converge to the pmf") {
  for (int n : {3, 11, 101, 301, 1001}) {
    for (double t : {0.3, 1.0, 3.0}) {
      CAPTURE(n);
      CAPTURE(t);
      const auto hist = empirical_histogram(sample_counts(Temperature(t), RingSpec(n), 100000, 11));
      const auto pmf = domain_wall_pmf(Temperature(t), RingSpec(n));
      CHECK(oracle::total_variation(hist.freq, pmf.probs) <= 0.01);
    }
  }
  const auto big = empirical_histogram(sample_counts(Temperature(1.0), RingSpec(301), 1000000, 3));
  CHECK(oracle::total_variation(big.freq, domain_wall_pmf(Temperature(1.0), RingSpec(301)).probs) <= 0.005);
}

TEST_CASE("sampled counts are always odd and in range") {
  Rng rng(77);
  long violations = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 3 + 2 * static_cast<int>(rng.below(500));
    const double t = std::exp(std::log(0.02) + rng.uniform() * (std::log(1e6) - std::log(0.02)));
    const auto s = sample_counts(Temperature(t), RingSpec(n), 500, rng.next());
    for (int k : s.counts()) violations += (k % 2 == 0) || k < 1 || k > n;
  }
  CHECK(violations == 0);
}

TEST_CASE("identical seeds give identical sample sets") {
  const auto a = sample_counts(Temperature(0.7), RingSpec(51), 5000, 123);
  const auto b = sample_counts(Temperature(0.7), RingSpec(51), 5000, 123);
  const auto c = sample_counts(Temperature(0.7), RingSpec(51), 5000, 124);
  CHECK(std::equal(a.counts().begin(), a.counts().end(), b.counts().begin(), b.counts().end()));
  CHECK_FALSE(std::equal(a.counts().begin(), a.counts().end(), c.counts().begin(), c.counts().end()));
  CHECK(a.metadata().seed == std::optional<std::uint64_t>(123));
}
