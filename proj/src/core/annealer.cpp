#include "qathermo/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>
#include <sstream>

#include "qathermo/error.hpp"

namespace qathermo {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double interpolate_log_tau(const std::map<double, double>& table, double tau_us, TauPolicy policy,
                           const std::string& what) {
  if (table.empty()) fail(Errc::domain, what + " table is empty");
  if (!(tau_us > 0.0) || !std::isfinite(tau_us)) fail(Errc::domain, "annealing time must be positive, got " + num(tau_us));

  if (auto it = table.find(tau_us); it != table.end()) return it->second;
  const double lo_key = table.begin()->first;
  const double hi_key = table.rbegin()->first;
  const bool outside = tau_us < lo_key || tau_us > hi_key;
  if (outside && policy == TauPolicy::table_only)
    fail(Errc::extrapolation, "tau = " + num(tau_us) + " us lies outside the " + what + " table range [" +
                                  num(lo_key) + ", " + num(hi_key) + "]");
  if (table.size() == 1) return table.begin()->second;

  // Segment containing tau, or the nearest end segment when extrapolating.
  auto hi = table.upper_bound(tau_us);
  if (hi == table.begin()) ++hi;
  if (hi == table.end()) --hi;
  auto lo = std::prev(hi);
  const double s = (std::log(tau_us) - std::log(lo->first)) / (std::log(hi->first) - std::log(lo->first));
  return std::max(0.0, lo->second + s * (hi->second - lo->second));
}

}  // namespace

void MachineProfile::validate() const {
  if (name.empty()) fail(Errc::domain, "profile name is empty");
  if (!(b1_kelvin > 0.0) || !std::isfinite(b1_kelvin)) fail(Errc::domain, "profile " + name + ": b1_kelvin must be positive");
  if (!(t_machine_kelvin > 0.0) || !std::isfinite(t_machine_kelvin))
    fail(Errc::domain, "profile " + name + ": t_machine_kelvin must be positive");
  if (alpha_table.empty()) fail(Errc::domain, "profile " + name + ": alpha table is empty");
  if (alpha_table.size() != tbar_table.size() ||
      !std::equal(alpha_table.begin(), alpha_table.end(), tbar_table.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; }))
    fail(Errc::domain, "profile " + name + ": alpha and tbar tables must share the same tau keys");
  for (const auto* table : {&alpha_table, &tbar_table}) {
    for (const auto& [tau, value] : *table) {
      if (!(tau > 0.0)) fail(Errc::domain, "profile " + name + ": tau keys must be positive");
      if (!(value >= 0.0) || !std::isfinite(value)) fail(Errc::domain, "profile " + name + ": table values must be non-negative");
    }
  }
}

double alpha_at(const MachineProfile& profile, double tau_us, TauPolicy policy) {
  return interpolate_log_tau(profile.alpha_table, tau_us, policy, "alpha");
}

double tbar_at(const MachineProfile& profile, double tau_us, TauPolicy policy) {
  return interpolate_log_tau(profile.tbar_table, tau_us, policy, "tbar");
}

double physical_coupling(const MachineProfile& profile, double j_enc) {
  if (!(j_enc >= 0.0 && j_enc <= 1.0)) fail(Errc::range, "encoded coupling must lie in [0, 1], got " + num(j_enc));
  return profile.b1_kelvin * j_enc / 2.0;
}

Temperature model_teff(const MachineProfile& profile, double j_enc, double tau_us, TauPolicy policy) {
  if (!(j_enc > 0.0 && j_enc <= 1.0)) fail(Errc::range, "encoded coupling must lie in (0, 1], got " + num(j_enc));
  const double tbar = tbar_at(profile, tau_us, policy);
  const double alpha = alpha_at(profile, tau_us, policy);
  return Temperature(tbar + alpha * profile.t_machine_kelvin / physical_coupling(profile, j_enc));
}

double physical_temperature(double j_phys_kelvin, double t_eff, double tbar) {
  if (!(j_phys_kelvin >= 0.0)) fail(Errc::domain, "physical coupling must be non-negative");
  if (!(tbar >= 0.0)) fail(Errc::domain, "temperature offset must be non-negative");
  if (t_eff < tbar)
    fail(Errc::negative_temperature, "effective temperature " + num(t_eff) + " is below the offset " + num(tbar));
  return j_phys_kelvin * (t_eff - tbar);
}

void AnnealJob::validate() const {
  if (!(j_enc > 0.0 && j_enc <= 1.0)) fail(Errc::range, "encoded coupling must lie in (0, 1], got " + num(j_enc));
  if (!(tau_us > 0.0) || !std::isfinite(tau_us)) fail(Errc::domain, "annealing time must be positive");
  if (shots == 0) fail(Errc::domain, "shots must be at least 1");
}

Perturbation Perturbation::readout_flip(double p) {
  if (!(p >= 0.0 && p < 0.5)) fail(Errc::range, "readout flip probability must lie in [0, 0.5), got " + num(p));
  return {Kind::readout_flip, p};
}

Perturbation Perturbation::ground_state_mix(double w) {
  if (!(w >= 0.0 && w < 1.0)) fail(Errc::range, "ground-state mixing weight must lie in [0, 1), got " + num(w));
  return {Kind::ground_state_mix, w};
}

std::string Perturbation::to_string() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::readout_flip: return "readout_flip:" + num(parameter);
    case Kind::ground_state_mix: return "ground_state_mix:" + num(parameter);
  }
  return "none";
}

Perturbation Perturbation::parse(std::string_view text) {
  if (text == "none" || text.empty()) return none();
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) fail(Errc::parse, "perturbation '" + std::string(text) + "' needs a parameter");
  const std::string kind(text.substr(0, colon));
  const std::string value(text.substr(colon + 1));
  double p = 0.0;
  try {
    std::size_t used = 0;
    p = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::exception&) {
    fail(Errc::parse, "perturbation parameter '" + value + "' is not a number");
  }
  if (kind == "readout_flip") return readout_flip(p);
  if (kind == "ground_state_mix") return ground_state_mix(p);
  fail(Errc::parse, "unknown perturbation kind '" + kind + "'");
}

SampleSet simulate_job(const MachineProfile& profile, const AnnealJob& job, const Perturbation& perturbation,
                       std::uint64_t seed, TauPolicy policy) {
  job.validate();
  const Temperature t = model_teff(profile, job.j_enc, job.tau_us, policy);
  Rng rng(seed);
  std::vector<int> counts = draw_counts(domain_wall_pmf(t, job.ring), job.shots, rng);

  switch (perturbation.kind) {
    case Perturbation::Kind::none:
      break;
    case Perturbation::Kind::readout_flip:
      for (int& k : counts) {
        SpinConfig config = realize_config(job.ring, k, rng);
        for (std::size_t i = 0; i < config.size(); ++i)
          if (rng.bernoulli(perturbation.parameter)) config.flip(i);
        k = count_domain_walls(config);
      }
      break;
    case Perturbation::Kind::ground_state_mix:
      for (int& k : counts)
        if (rng.bernoulli(perturbation.parameter)) k = 1;
      break;
  }

  SampleMetadata meta;
  meta.seed = seed;
  meta.t_eff = t.value();
  meta.j_enc = job.j_enc;
  meta.tau_us = job.tau_us;
  meta.machine = profile.name;
  meta.perturbation = perturbation.to_string();
  return SampleSet(job.ring, std::move(counts), std::move(meta));
}

std::vector<double> complexity_scores(const std::vector<AnnealJob>& jobs) {
  std::set<double> distinct;
  for (const auto& job : jobs) distinct.insert(job.tau_us * job.j_enc);
  const std::vector<double> levels(distinct.begin(), distinct.end());
  std::vector<double> scores;
  scores.reserve(jobs.size());
  for (const auto& job : jobs) {
    if (levels.size() == 1) {
      scores.push_back(1.0);
      continue;
    }
    const auto rank = std::lower_bound(levels.begin(), levels.end(), job.tau_us * job.j_enc) - levels.begin();
    scores.push_back(static_cast<double>(rank) / static_cast<double>(levels.size() - 1));
  }
  return scores;
}

SubmissionPlan plan_shots(const std::vector<AnnealJob>& jobs, std::uint64_t min_shots, std::uint64_t max_shots,
                          const TimeModel& tm) {
  if (jobs.empty()) fail(Errc::invalid_argument, "no jobs to plan");
  if (min_shots == 0 || min_shots > max_shots)
    fail(Errc::invalid_argument, "shot bounds must satisfy 1 <= min_shots <= max_shots");
  if (!(tm.programming_us > 0.0) || !(tm.readout_us > 0.0) || !(tm.thermalization_us > 0.0) || !(tm.budget_seconds > 0.0))
    fail(Errc::invalid_argument, "time model entries must be positive");
  for (const auto& job : jobs) job.validate();

  SubmissionPlan plan;
  plan.complexity = complexity_scores(jobs);
  const double budget_us = tm.budget_seconds * 1e6;
  const auto seconds = [&](std::uint64_t shots, double per_shot_us) {
    return (static_cast<double>(shots) * per_shot_us + tm.programming_us) * 1e-6;
  };

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const double span = static_cast<double>(max_shots - min_shots);
    const std::uint64_t total = min_shots + static_cast<std::uint64_t>(std::llround(plan.complexity[j] * span));
    plan.job_shots.push_back(total);

    const double per_shot_us = jobs[j].tau_us + tm.readout_us + tm.thermalization_us;
    const double room = std::floor((budget_us - tm.programming_us) / per_shot_us);
    auto cap = room > 0.0 ? static_cast<std::uint64_t>(room) : std::uint64_t{0};
    while (cap > 0 && seconds(cap, per_shot_us) > tm.budget_seconds) --cap;
    if (cap == 0)
      fail(Errc::infeasible, "job " + std::to_string(j) + ": a single shot at tau = " + num(jobs[j].tau_us) +
                                 " us does not fit the " + num(tm.budget_seconds) + " s submission budget");

    const std::uint64_t parts = (total + cap - 1) / cap;
    const std::uint64_t base = total / parts;
    const std::uint64_t extra = total % parts;
    for (std::uint64_t p = 0; p < parts; ++p) {
      const std::uint64_t shots = base + (p < extra ? 1 : 0);
      plan.submissions.push_back({j, shots, seconds(shots, per_shot_us)});
    }
  }
  return plan;
}

}  // namespace qathermo
