#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "errc_check.hpp"
#include "qathermo/annealer.hpp"
#include "qathermo/thermometer.hpp"

using namespace qathermo;

namespace {

MachineProfile flat_profile(double tbar, double alpha) {
  MachineProfile p;
  p.name = "flat";
  p.b1_kelvin = 0.407;
  p.t_machine_kelvin = 0.015;
  p.alpha_table = {{1.0, alpha}, {2000.0, alpha}};
  p.tbar_table = {{1.0, tbar}, {2000.0, tbar}};
  return p;
}

MachineProfile shaped_profile() {
  MachineProfile p;
  p.name = "shaped";
  p.b1_kelvin = 0.407;
  p.t_machine_kelvin = 0.015;
  p.alpha_table = {{1.0, 2.4}, {10.0, 2.0}, {100.0, 1.8}, {1000.0, 1.6}};
  p.tbar_table = {{1.0, 0.40}, {10.0, 0.36}, {100.0, 0.33}, {1000.0, 0.30}};
  return p;
}

}  // namespace

TEST_CASE("profile validation") {
  auto p = shaped_profile();
  CHECK_NOTHROW(p.validate());
  p.b1_kelvin = 0;
  CHECK_ERRC(p.validate(), Errc::domain);
  p = shaped_profile();
  p.tbar_table.erase(10.0);
  CHECK_ERRC(p.validate(), Errc::domain);
  p = shaped_profile();
  p.alpha_table[10.0] = -1;
  CHECK_ERRC(p.validate(), Errc::domain);
}

TEST_CASE("physical coupling") {
  const auto p = flat_profile(0.3, 1.5);
  CHECK(std::fabs(physical_coupling(p, 1.0) - 0.2035) < 1e-15);
  CHECK(physical_coupling(p, 0.0) == 0.0);
  CHECK(std::fabs(physical_coupling(p, 0.5) - 0.10175) < 1e-15);
  CHECK_ERRC(physical_coupling(p, 1.5), Errc::range);
  CHECK_ERRC(physical_coupling(p, -0.1), Errc::range);
}

TEST_CASE("offset temperature model") {
  const auto p = flat_profile(0.3, 1.5);
  CHECK(std::fabs(model_teff(p, 1.0, 10.0).value() - 0.410565110565110565) < 1e-12);
  const auto no_offset = flat_profile(0.0, 1.5);
  CHECK(std::fabs(model_teff(no_offset, 0.5, 10.0).value() - 1.5 * 0.015 / 0.10175) < 1e-12);
  CHECK_ERRC(model_teff(p, 0.0, 10.0), Errc::range);
  CHECK_ERRC(model_teff(p, 1.01, 10.0), Errc::range);
}

TEST_CASE("table interpolation in log tau") {
  const auto p = shaped_profile();
  CHECK(alpha_at(p, 10.0) == 2.0);
  CHECK(tbar_at(p, 1000.0) == 0.30);
  // Geometric midpoint of 10 and 100 is halfway in ln tau.
  CHECK(std::fabs(alpha_at(p, std::sqrt(10.0 * 100.0)) - 1.9) < 1e-12);
  CHECK(std::fabs(tbar_at(p, std::sqrt(10.0 * 100.0)) - 0.345) < 1e-12);
  CHECK_ERRC(alpha_at(p, 0.5), Errc::extrapolation);
  CHECK_ERRC(tbar_at(p, 5000.0), Errc::extrapolation);
  CHECK_ERRC(model_teff(p, 0.5, 5000.0), Errc::extrapolation);
  CHECK(std::fabs(alpha_at(p, 10000.0, TauPolicy::extrapolate) - 1.4) < 1e-12);
  CHECK(alpha_at(p, 1e30, TauPolicy::extrapolate) == 0.0);
  CHECK_ERRC(alpha_at(p, -1.0), Errc::domain);

  // Monotone tables stay monotone between keys.
  double prev = alpha_at(p, 1.0);
  for (double tau = 1.05; tau <= 1000.0; tau *= 1.05) {
    const double a = alpha_at(p, tau);
    CHECK(a <= prev);
    prev = a;
  }
}

TEST_CASE("model is affine in inverse coupling and decreasing in coupling") {
  const auto p = shaped_profile();
  for (double tau : {1.0, 10.0, 31.6, 100.0, 1000.0}) {
    const double tbar = tbar_at(p, tau);
    const double slope = alpha_at(p, tau) * p.t_machine_kelvin * 2.0 / p.b1_kelvin;
    double prev = INFINITY;
    for (int step = 1; step <= 20; ++step) {
      const double j = step / 20.0;
      const double t = model_teff(p, j, tau).value();
      CHECK(std::fabs(t - (tbar + slope / j)) <= 1e-13 * t);
      CHECK(t < prev);
      prev = t;
    }
  }
}

TEST_CASE("physical temperature") {
  CHECK(std::fabs(physical_temperature(0.2035, 0.410565110565110565, 0.3) - 0.0225) < 1e-15);
  CHECK(std::fabs(physical_temperature(0.2035, 0.410565110565110565, 0.3) / 0.015 - 1.5) < 1e-12);
  CHECK(physical_temperature(0.3, 0.25, 0.25) == 0.0);
  CHECK(std::fabs(physical_temperature(0.2035, 0.5, 0.0) - 0.10175) < 1e-15);
  CHECK_ERRC(physical_temperature(0.2035, 0.2, 0.3), Errc::negative_temperature);
}

TEST_CASE("physical to machine temperature ratio recovers alpha") {
  const auto p = shaped_profile();
  for (double tau : {1.0, 3.0, 10.0, 100.0, 500.0, 1000.0}) {
    for (int step = 1; step <= 100; ++step) {
      const double j = step / 100.0;
      const double jp = physical_coupling(p, j);
      const double t = model_teff(p, j, tau).value();
      const double ratio = physical_temperature(jp, t, tbar_at(p, tau)) / p.t_machine_kelvin;
      CHECK(std::fabs(ratio - alpha_at(p, tau)) <= 1e-12 * alpha_at(p, tau));
    }
  }
}

TEST_CASE("perturbation parsing") {
  CHECK(Perturbation::parse("none").kind == Perturbation::Kind::none);
  const auto f = Perturbation::parse("readout_flip:0.05");
  CHECK(f.kind == Perturbation::Kind::readout_flip);
  CHECK(f.parameter == 0.05);
  CHECK(f.to_string() == "readout_flip:0.05");
  CHECK(Perturbation::parse("ground_state_mix:0.3").kind == Perturbation::Kind::ground_state_mix);
  CHECK_ERRC(Perturbation::parse("readout_flip:0.5"), Errc::range);
  CHECK_ERRC(Perturbation::parse("ground_state_mix:1"), Errc::range);
  CHECK_ERRC(Perturbation::parse("readout_flip"), Errc::parse);
  CHECK_ERRC(Perturbation::parse("readout_flip:abc"), Errc::parse);
  CHECK_ERRC(Perturbation::parse("gamma_ray:0.1"), Errc::parse);
}

TEST_CASE("simulated jobs") {
  const auto p = shaped_profile();
  const AnnealJob job{RingSpec(301), 0.5, 10.0, 100000};
  const auto s = simulate_job(p, job, Perturbation::none(), 9);
  CHECK(s.shots() == 100000);
  CHECK(s.metadata().machine == std::optional<std::string>("shaped"));
  CHECK(s.metadata().j_enc == std::optional<double>(0.5));
  CHECK(s.metadata().tau_us == std::optional<double>(10.0));
  CHECK(s.metadata().perturbation == std::optional<std::string>("none"));
  const double t_model = model_teff(p, 0.5, 10.0).value();
  CHECK(*s.metadata().t_eff == t_model);

  const auto r = estimate_temperature(empirical_histogram(s), job.ring);
  REQUIRE(r.t_eff.has_value());
  CHECK(std::fabs(r.t_eff->value() - t_model) <= 0.02);

  const auto again = simulate_job(p, job, Perturbation::none(), 9);
  CHECK(std::equal(s.counts().begin(), s.counts().end(), again.counts().begin(), again.counts().end()));

  CHECK_ERRC(simulate_job(p, {RingSpec(11), 0.5, 1e5, 10}, Perturbation::none(), 1), Errc::extrapolation);
  CHECK_ERRC(simulate_job(p, {RingSpec(11), 0.5, 10.0, 0}, Perturbation::none(), 1), Errc::domain);
}

TEST_CASE("readout noise raises the fit distance") {
  const auto p = shaped_profile();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const AnnealJob job{RingSpec(301), 0.8, 100.0, 100000};
    const auto clean = simulate_job(p, job, Perturbation::none(), seed);
    const auto noisy = simulate_job(p, job, Perturbation::readout_flip(0.05), seed);
    const auto rc = estimate_temperature(empirical_histogram(clean), job.ring);
    const auto rn = estimate_temperature(empirical_histogram(noisy), job.ring);
    CAPTURE(seed);
    CHECK(rn.epsilon > rc.epsilon);
  }
}

TEST_CASE("ground state mixing") {
  const auto p = shaped_profile();
  const AnnealJob job{RingSpec(101), 0.5, 10.0, 20000};
  const auto mixed = simulate_job(p, job, Perturbation::ground_state_mix(0.3), 4);
  const auto clean = simulate_job(p, job, Perturbation::none(), 4);
  const auto ones = [](const SampleSet& s) { return std::count(s.counts().begin(), s.counts().end(), 1); };
  CHECK(ones(mixed) > ones(clean));

  // Weight 1 is outside the constructor's range; build the limit directly.
  const Perturbation all{Perturbation::Kind::ground_state_mix, 1.0};
  const auto frozen = simulate_job(p, job, all, 4);
  CHECK(ones(frozen) == 20000);
  CHECK(estimate_temperature(empirical_histogram(frozen), job.ring).flags.has(RegimeFlag::zero_temperature));
}

TEST_CASE("complexity scores") {
  const std::vector<AnnealJob> jobs{
      {RingSpec(11), 0.5, 10.0, 1}, {RingSpec(11), 1.0, 10.0, 1}, {RingSpec(11), 0.5, 20.0, 1}, {RingSpec(11), 1.0, 100.0, 1}};
  const auto s = complexity_scores(jobs);
  CHECK(s == std::vector<double>{0.0, 0.5, 0.5, 1.0});
  CHECK(complexity_scores({{RingSpec(11), 0.5, 10.0, 1}}) == std::vector<double>{1.0});
}

TEST_CASE("shot plans") {
  TimeModel tm;
  SUBCASE("single small job fits one submission") {
    const auto plan = plan_shots({{RingSpec(11), 0.5, 10.0, 1}}, 100, 100, tm);
    REQUIRE(plan.submissions.size() == 1);
    CHECK(plan.submissions[0].shots == 100);
    CHECK(plan.submissions[0].estimated_seconds <= 1.0);
  }
  SUBCASE("long anneals are split across submissions") {
    TimeModel slow;
    slow.programming_us = 10000.0;
    slow.readout_us = 190.0;
    slow.thermalization_us = 10.0;
    const auto plan = plan_shots({{RingSpec(11), 1.0, 1000.0, 1}}, 100000, 100000, slow);
    CHECK(plan.submissions.size() == 122);
    std::uint64_t total = 0;
    for (const auto& s : plan.submissions) {
      total += s.shots;
      CHECK(s.estimated_seconds <= 1.0);
    }
    CHECK(total == 100000);
  }
  SUBCASE("complexity extremes map to the shot bounds") {
    std::vector<AnnealJob> jobs;
    for (double tau : {1.0, 10.0, 100.0, 1000.0})
      for (double j : {0.2, 0.6, 1.0}) jobs.push_back({RingSpec(101), j, tau, 1});
    const auto plan = plan_shots(jobs, 10000, 100000, tm);
    CHECK(*std::min_element(plan.job_shots.begin(), plan.job_shots.end()) == 10000);
    CHECK(*std::max_element(plan.job_shots.begin(), plan.job_shots.end()) == 100000);
    CHECK(plan.job_shots.front() == 10000);
    CHECK(plan.job_shots.back() == 100000);
    std::vector<std::uint64_t> per_job(jobs.size(), 0);
    for (const auto& s : plan.submissions) {
      per_job[s.job_index] += s.shots;
      CHECK(s.estimated_seconds <= 1.0);
    }
    CHECK(per_job == plan.job_shots);
  }
  SUBCASE("infeasible and invalid plans") {
    CHECK_ERRC(plan_shots({{RingSpec(11), 1.0, 2e6, 1}}, 10, 10, tm), Errc::infeasible);
    CHECK_ERRC(plan_shots({}, 10, 10, tm), Errc::invalid_argument);
    CHECK_ERRC(plan_shots({{RingSpec(11), 1.0, 10.0, 1}}, 100, 10, tm), Errc::invalid_argument);
  }
}

TEST_CASE("random shot plans conserve totals within budget") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AnnealJob> jobs;
    const int n_jobs = 1 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n_jobs; ++i)
      jobs.push_back({RingSpec(101), 0.05 + 0.95 * rng.uniform(), std::exp(rng.uniform() * std::log(5e5)), 1});
    const std::uint64_t lo = 1 + rng.below(50000);
    const std::uint64_t hi = lo + rng.below(200000);
    TimeModel tm;
    tm.programming_us = 1000.0 + rng.uniform() * 50000.0;
    const auto plan = plan_shots(jobs, lo, hi, tm);
    std::vector<std::uint64_t> per_job(jobs.size(), 0);
    for (const auto& s : plan.submissions) {
      per_job[s.job_index] += s.shots;
      CHECK(s.shots > 0);
      CHECK(s.estimated_seconds <= tm.budget_seconds);
    }
    CHECK(per_job == plan.job_shots);
    for (auto shots : plan.job_shots) {
      CHECK(shots >= lo);
      CHECK(shots <= hi);
    }
  }
}
