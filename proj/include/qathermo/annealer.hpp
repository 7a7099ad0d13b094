#pragma once

// Synthetic annealer backend.
//
// Temperatures come in three kinds:
//   T_machine  cryostat temperature (kelvin)
//   J_phys     end-of-anneal coupling B(1) j_enc / 2 (kelvin)
//   t_eff      dimensionless temperature of the observed ensemble
// related through the offset model t_eff = tbar(tau) + alpha(tau) T_machine / J_phys.

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qathermo/ising.hpp"
#include "qathermo/sampler.hpp"

namespace qathermo {

struct MachineProfile {
  std::string name;
  double b1_kelvin = 0.0;
  double t_machine_kelvin = 0.0;
  std::map<double, double> alpha_table;  // tau_us -> alpha
  std::map<double, double> tbar_table;   // tau_us -> tbar
  std::string notes;

  /// Throws Errc::domain if any invariant is broken.
  void validate() const;
};

enum class TauPolicy { table_only, extrapolate };

/// alpha(tau) / tbar(tau): piecewise linear in ln tau between table keys.
/// Outside the table range throws Errc::extrapolation unless `policy` allows
/// linear extension of the end segments (clamped at zero).
double alpha_at(const MachineProfile& profile, double tau_us, TauPolicy policy = TauPolicy::table_only);
double tbar_at(const MachineProfile& profile, double tau_us, TauPolicy policy = TauPolicy::table_only);

/// J_phys = B(1) j_enc / 2, in kelvin.
double physical_coupling(const MachineProfile& profile, double j_enc);

Temperature model_teff(const MachineProfile& profile, double j_enc, double tau_us,
                       TauPolicy policy = TauPolicy::table_only);

/// T_phys = J_phys (t_eff - tbar), in kelvin.
double physical_temperature(double j_phys_kelvin, double t_eff, double tbar);

struct AnnealJob {
  RingSpec ring;
  double j_enc;
  double tau_us;
  std::uint64_t shots;

  void validate() const;
};

struct Perturbation {
  enum class Kind { none, readout_flip, ground_state_mix };

  Kind kind = Kind::none;
  double parameter = 0.0;

  static Perturbation none() { return {}; }
  /// Each spin flipped independently with probability p in [0, 0.5).
  static Perturbation readout_flip(double p);
  /// Each shot replaced by the ground state with probability w in [0, 1).
  static Perturbation ground_state_mix(double w);

  /// "none", "readout_flip:0.05", "ground_state_mix:0.3".
  std::string to_string() const;
  static Perturbation parse(std::string_view text);
};

SampleSet simulate_job(const MachineProfile& profile, const AnnealJob& job, const Perturbation& perturbation,
                       std::uint64_t seed, TauPolicy policy = TauPolicy::table_only);

// ---------------------------------------------------------------------------
// Shot planning

/// Per-shot and per-submission overheads. The anneal itself takes the job's tau.
struct TimeModel {
  double programming_us = 15000.0;
  double readout_us = 150.0;
  double thermalization_us = 10.0;
  double budget_seconds = 1.0;
};

struct Submission {
  std::size_t job_index;
  std::uint64_t shots;
  double estimated_seconds;
};

struct SubmissionPlan {
  std::vector<Submission> submissions;
  std::vector<std::uint64_t> job_shots;  // planned total per job
  std::vector<double> complexity;        // score in [0, 1] per job
};

/// Normalized rank of tau * j_enc across the job list; ties share a score,
/// and a list with a single distinct value scores 1 everywhere.
std::vector<double> complexity_scores(const std::vector<AnnealJob>& jobs);

/// Interpolates per-job shot targets linearly in complexity between min_shots
/// and max_shots, then splits each job into submissions that fit the budget.
SubmissionPlan plan_shots(const std::vector<AnnealJob>& jobs, std::uint64_t min_shots, std::uint64_t max_shots,
                          const TimeModel& time_model = {});

// ---------------------------------------------------------------------------
// File formats

/// Profile document (JSON):
///   {"name": ..., "b1_kelvin": ..., "t_machine_kelvin": ...,
///    "alpha_table": [[tau_us, alpha], ...], "tbar_table": [[tau_us, tbar], ...],
///    "notes": ...}
MachineProfile parse_profile(std::istream& in, const std::string& source_name = "<stream>");
MachineProfile load_profile(const std::string& path);
void write_profile(const MachineProfile& profile, std::ostream& out);

/// Sample file: `ring_size,<n>` followed by `count,<odd int>` or
/// `spins,<+/- string>` records, one per line. Blank lines and lines starting
/// with '#' are skipped.
SampleSet parse_samples(std::istream& in, const std::string& source_name = "<stream>");
SampleSet ingest_samples(const std::string& path);
void write_samples(const SampleSet& samples, std::ostream& out);

/// Sidecar manifest with the generating parameters (JSON).
std::string metadata_json(const SampleSet& samples);

}  // namespace qathermo
