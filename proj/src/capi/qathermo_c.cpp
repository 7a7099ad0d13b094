#include "qathermo.h"

#include <cstring>
#include <fstream>
#include <string>

#include "qathermo/annealer.hpp"
#include "qathermo/embedder.hpp"
#include "qathermo/error.hpp"
#include "qathermo/ising.hpp"
#include "qathermo/sampler.hpp"
#include "qathermo/scaling.hpp"
#include "qathermo/thermometer.hpp"

#ifndef QATHERMO_VERSION
#define QATHERMO_VERSION "0.0.0"
#endif

struct qt_samples {
  qathermo::SampleSet set;
};

struct qt_profile {
  qathermo::MachineProfile profile;
};

struct qt_plan {
  qathermo::SubmissionPlan plan;
};

struct qt_graph {
  qathermo::HardwareGraph graph;
};

namespace {

using namespace qathermo;

thread_local std::string g_last_error;

qt_status to_status(Errc code) { return static_cast<qt_status>(static_cast<int>(code)); }

qt_status set_error(qt_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

/// Runs `body`, translating exceptions into status codes.
template <class F>
qt_status guarded(F&& body) {
  try {
    body();
    return QT_OK;
  } catch (const Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(QT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(QT_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(QT_ERR_INTERNAL, "unknown failure");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) fail(Errc::invalid_argument, std::string(what) + " must not be null");
}

void check_len(std::size_t len, RingSpec ring) {
  if (len != ring.support_size())
    fail(Errc::mismatch, "buffer length " + std::to_string(len) + " does not match support size " +
                             std::to_string(ring.support_size()));
}

/// Copies `text` into a caller buffer, reporting the size including the NUL.
void copy_out(const std::string& text, char* buf, std::size_t cap, std::size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (cap == 0) return;
  require(buf, "buffer");
  if (cap < text.size() + 1) {
    std::memcpy(buf, text.data(), cap - 1);
    buf[cap - 1] = '\0';
    fail(Errc::buffer_too_small, "buffer too small: need " + std::to_string(text.size() + 1));
  }
  std::memcpy(buf, text.c_str(), text.size() + 1);
}

EstimatorOptions estimator_options(const qt_estimator_options* in) {
  EstimatorOptions o;
  if (!in) return o;
  o.max_iterations = in->max_iterations;
  o.t_tolerance = in->t_tolerance;
  o.t_min = in->t_min;
  o.t_max = in->t_max;
  o.initial_step = in->initial_step;
  o.poor_fit_threshold = in->poor_fit_threshold;
  o.high_t_delta = in->high_t_delta;
  o.resolution_floor = in->resolution_floor;
  if (in->zero_t_delta >= 0.0) o.zero_t_delta = in->zero_t_delta;
  return o;
}

void fill_estimate(const EstimateResult& r, qt_estimate* out) {
  out->is_zero = r.t_eff ? 0 : 1;
  out->t_eff = r.t_eff ? r.t_eff->value() : 0.0;
  out->epsilon = r.epsilon;
  out->iterations = r.iterations;
  out->converged = r.converged ? 1 : 0;
  out->flags = r.flags.bits();
}

TauPolicy tau_policy(int allow_extrapolation) {
  return allow_extrapolation ? TauPolicy::extrapolate : TauPolicy::table_only;
}

AnnealJob to_job(const qt_job& j) { return AnnealJob{RingSpec(j.n_qb), j.j_enc, j.tau_us, j.shots}; }

SweepPoint to_point(const qt_sweep_point& p) {
  SweepPoint s;
  s.x = p.x;
  s.t_eff = p.t_eff;
  s.epsilon = p.epsilon;
  s.flags = Flags(p.flags);
  s.n_qb = p.n_qb;
  s.tau_us = p.tau_us;
  s.weight = p.weight;
  return s;
}

}  // namespace

extern "C" {

const char* qt_last_error(void) { return g_last_error.c_str(); }

const char* qt_status_name(qt_status status) {
  switch (status) {
    case QT_OK: return "ok";
    case QT_ERR_INTERNAL: return "internal";
    default: break;
  }
  if (status >= QT_ERR_DOMAIN && status <= QT_ERR_BUFFER_TOO_SMALL)
    return errc_name(static_cast<Errc>(status)).data();
  return "unknown";
}

const char* qt_version(void) { return QATHERMO_VERSION; }

size_t qt_support_size(int n_qb) { return n_qb > 0 ? static_cast<size_t>(n_qb + 1) / 2 : 0; }

qt_status qt_log_partition(double t, int n_qb, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = log_partition(Temperature(t), RingSpec(n_qb));
  });
}

qt_status qt_mean_density(double t, int n_qb, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = mean_density(Temperature(t), RingSpec(n_qb));
  });
}

qt_status qt_invert_mean_density(double density, int n_qb, double* out_t) {
  return guarded([&] {
    require(out_t, "out_t");
    *out_t = invert_mean_density(density, RingSpec(n_qb)).value();
  });
}

qt_status qt_domain_wall_pmf(double t, int n_qb, double* probs, size_t len) {
  return guarded([&] {
    const RingSpec ring(n_qb);
    check_len(len, ring);
    require(probs, "probs");
    const DomainWallPmf pmf = domain_wall_pmf(Temperature(t), ring);
    std::copy(pmf.probs.begin(), pmf.probs.end(), probs);
  });
}

qt_status qt_brute_force_pmf(double t, int n_qb, double* probs, size_t len) {
  return guarded([&] {
    const RingSpec ring(n_qb);
    check_len(len, ring);
    require(probs, "probs");
    const DomainWallPmf pmf = brute_force_pmf(Temperature(t), ring);
    std::copy(pmf.probs.begin(), pmf.probs.end(), probs);
  });
}

qt_status qt_samples_draw(double t, int n_qb, uint64_t shots, uint64_t seed, qt_samples** out) {
  return guarded([&] {
    require(out, "out");
    *out = new qt_samples{sample_counts(Temperature(t), RingSpec(n_qb), shots, seed)};
  });
}

qt_status qt_samples_from_counts(int n_qb, const int* counts, size_t len, qt_samples** out) {
  return guarded([&] {
    require(out, "out");
    if (len) require(counts, "counts");
    SampleMetadata meta;
    meta.source = SampleSource::ingested;
    *out = new qt_samples{SampleSet(RingSpec(n_qb), std::vector<int>(counts, counts + len), meta)};
  });
}

qt_status qt_samples_read(const char* path, qt_samples** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new qt_samples{ingest_samples(path)};
  });
}

qt_status qt_samples_write(const qt_samples* samples, const char* path) {
  return guarded([&] {
    require(samples, "samples");
    require(path, "path");
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(Errc::io, std::string("cannot write ") + path);
    write_samples(samples->set, os);
    if (!os) fail(Errc::io, std::string("write failed for ") + path);
  });
}

void qt_samples_free(qt_samples* samples) { delete samples; }

int qt_samples_ring_size(const qt_samples* samples) { return samples ? samples->set.ring().size() : 0; }

uint64_t qt_samples_shots(const qt_samples* samples) { return samples ? samples->set.shots() : 0; }

qt_status qt_samples_counts(const qt_samples* samples, int* counts, size_t cap, size_t* needed) {
  return guarded([&] {
    require(samples, "samples");
    const auto c = samples->set.counts();
    if (needed) *needed = c.size();
    if (cap == 0) return;
    require(counts, "counts");
    if (cap < c.size()) fail(Errc::buffer_too_small, "buffer too small for counts");
    std::copy(c.begin(), c.end(), counts);
  });
}

qt_status qt_samples_histogram(const qt_samples* samples, double* freq, size_t len) {
  return guarded([&] {
    require(samples, "samples");
    check_len(len, samples->set.ring());
    require(freq, "freq");
    const EmpiricalHistogram h = empirical_histogram(samples->set);
    std::copy(h.freq.begin(), h.freq.end(), freq);
  });
}

qt_status qt_samples_metadata(const qt_samples* samples, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(samples, "samples");
    copy_out(metadata_json(samples->set), buf, cap, needed);
  });
}

qt_status qt_count_domain_walls(const char* spins, int* out) {
  return guarded([&] {
    require(spins, "spins");
    require(out, "out");
    *out = count_domain_walls(SpinConfig::parse(spins));
  });
}

qt_status qt_realize_config(int n_qb, int n_dw, uint64_t seed, char* buf, size_t cap) {
  return guarded([&] {
    const std::string text = realize_config(RingSpec(n_qb), n_dw, seed).to_string();
    copy_out(text, buf, cap, nullptr);
    if (cap == 0) fail(Errc::buffer_too_small, "buffer too small for spin string");
  });
}

void qt_estimator_options_default(qt_estimator_options* options) {
  if (!options) return;
  const EstimatorOptions d;
  options->max_iterations = d.max_iterations;
  options->t_tolerance = d.t_tolerance;
  options->t_min = d.t_min;
  options->t_max = d.t_max;
  options->initial_step = d.initial_step;
  options->poor_fit_threshold = d.poor_fit_threshold;
  options->high_t_delta = d.high_t_delta;
  options->resolution_floor = d.resolution_floor;
  options->zero_t_delta = -1.0;
}

qt_status qt_tvd(int n_qb, const double* freq, const double* probs, size_t len, double* out) {
  return guarded([&] {
    const RingSpec ring(n_qb);
    check_len(len, ring);
    require(freq, "freq");
    require(probs, "probs");
    require(out, "out");
    const auto hist = EmpiricalHistogram::from_frequencies(ring, std::vector<double>(freq, freq + len));
    *out = tvd(hist, DomainWallPmf{ring, std::vector<double>(probs, probs + len)});
  });
}

qt_status qt_estimate_histogram(int n_qb, const double* freq, size_t len, const qt_estimator_options* options,
                                qt_estimate* out) {
  return guarded([&] {
    const RingSpec ring(n_qb);
    check_len(len, ring);
    require(freq, "freq");
    require(out, "out");
    const auto hist = EmpiricalHistogram::from_frequencies(ring, std::vector<double>(freq, freq + len));
    fill_estimate(estimate_temperature(hist, ring, estimator_options(options)), out);
  });
}

qt_status qt_estimate_samples(const qt_samples* samples, const qt_estimator_options* options, qt_estimate* out) {
  return guarded([&] {
    require(samples, "samples");
    require(out, "out");
    fill_estimate(estimate_temperature(empirical_histogram(samples->set), samples->set.ring(),
                                       estimator_options(options)),
                  out);
  });
}

qt_status qt_classify_regime(int n_qb, const double* freq, size_t len, double epsilon,
                             const qt_estimator_options* options, unsigned* flags) {
  return guarded([&] {
    const RingSpec ring(n_qb);
    check_len(len, ring);
    require(freq, "freq");
    require(flags, "flags");
    const auto hist = EmpiricalHistogram::from_frequencies(ring, std::vector<double>(freq, freq + len));
    const std::optional<double> eps = epsilon >= 0.0 ? std::optional<double>(epsilon) : std::nullopt;
    *flags = classify_regime(hist, ring, eps, estimator_options(options)).bits();
  });
}

qt_status qt_flags_format(unsigned flags, char* buf, size_t cap, size_t* needed) {
  return guarded([&] { copy_out(Flags(flags).to_string(), buf, cap, needed); });
}

qt_status qt_flags_parse(const char* text, unsigned* flags) {
  return guarded([&] {
    require(text, "text");
    require(flags, "flags");
    *flags = Flags::parse(text).bits();
  });
}

qt_status qt_profile_load(const char* path, qt_profile** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new qt_profile{load_profile(path)};
  });
}

qt_status qt_profile_create(const char* name, double b1_kelvin, double t_machine_kelvin, const double* tau_us,
                            const double* alpha, const double* tbar, size_t n, qt_profile** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    MachineProfile p;
    p.name = name;
    p.b1_kelvin = b1_kelvin;
    p.t_machine_kelvin = t_machine_kelvin;
    if (n) {
      require(tau_us, "tau_us");
      require(alpha, "alpha");
      require(tbar, "tbar");
    }
    for (size_t i = 0; i < n; ++i) {
      p.alpha_table[tau_us[i]] = alpha[i];
      p.tbar_table[tau_us[i]] = tbar[i];
    }
    p.validate();
    *out = new qt_profile{std::move(p)};
  });
}

void qt_profile_free(qt_profile* profile) { delete profile; }

const char* qt_profile_name(const qt_profile* profile) { return profile ? profile->profile.name.c_str() : ""; }

double qt_profile_b1_kelvin(const qt_profile* profile) { return profile ? profile->profile.b1_kelvin : 0.0; }

double qt_profile_t_machine_kelvin(const qt_profile* profile) {
  return profile ? profile->profile.t_machine_kelvin : 0.0;
}

qt_status qt_profile_alpha(const qt_profile* profile, double tau_us, int allow_extrapolation, double* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    *out = alpha_at(profile->profile, tau_us, tau_policy(allow_extrapolation));
  });
}

qt_status qt_profile_tbar(const qt_profile* profile, double tau_us, int allow_extrapolation, double* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    *out = tbar_at(profile->profile, tau_us, tau_policy(allow_extrapolation));
  });
}

qt_status qt_physical_coupling(const qt_profile* profile, double j_enc, double* out_kelvin) {
  return guarded([&] {
    require(profile, "profile");
    require(out_kelvin, "out_kelvin");
    *out_kelvin = physical_coupling(profile->profile, j_enc);
  });
}

qt_status qt_model_teff(const qt_profile* profile, double j_enc, double tau_us, int allow_extrapolation, double* out) {
  return guarded([&] {
    require(profile, "profile");
    require(out, "out");
    *out = model_teff(profile->profile, j_enc, tau_us, tau_policy(allow_extrapolation)).value();
  });
}

qt_status qt_physical_temperature(double j_phys_kelvin, double t_eff, double tbar, double* out_kelvin) {
  return guarded([&] {
    require(out_kelvin, "out_kelvin");
    *out_kelvin = physical_temperature(j_phys_kelvin, t_eff, tbar);
  });
}

qt_status qt_perturbation_parse(const char* text, qt_perturbation* out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    const Perturbation p = Perturbation::parse(text);
    out->kind = static_cast<qt_perturbation_kind>(p.kind);
    out->parameter = p.parameter;
  });
}

qt_status qt_simulate_job(const qt_profile* profile, const qt_job* job, const qt_perturbation* perturbation,
                          uint64_t seed, int allow_extrapolation, qt_samples** out) {
  return guarded([&] {
    require(profile, "profile");
    require(job, "job");
    require(out, "out");
    Perturbation p;
    if (perturbation) {
      switch (perturbation->kind) {
        case QT_PERTURB_NONE: break;
        case QT_PERTURB_READOUT_FLIP: p = Perturbation::readout_flip(perturbation->parameter); break;
        case QT_PERTURB_GROUND_STATE_MIX: p = Perturbation::ground_state_mix(perturbation->parameter); break;
        default: fail(Errc::invalid_argument, "unknown perturbation kind");
      }
    }
    *out = new qt_samples{simulate_job(profile->profile, to_job(*job), p, seed, tau_policy(allow_extrapolation))};
  });
}

uint64_t qt_derive_seed(uint64_t base, uint64_t index) { return derive_seed(base, index); }

void qt_time_model_default(qt_time_model* model) {
  if (!model) return;
  const TimeModel d;
  model->programming_us = d.programming_us;
  model->readout_us = d.readout_us;
  model->thermalization_us = d.thermalization_us;
  model->budget_seconds = d.budget_seconds;
}

qt_status qt_plan_shots(const qt_job* jobs, size_t n_jobs, uint64_t min_shots, uint64_t max_shots,
                        const qt_time_model* model, qt_plan** out) {
  return guarded([&] {
    require(out, "out");
    if (n_jobs) require(jobs, "jobs");
    std::vector<AnnealJob> list;
    for (size_t i = 0; i < n_jobs; ++i) list.push_back(to_job(jobs[i]));
    TimeModel tm;
    if (model) tm = TimeModel{model->programming_us, model->readout_us, model->thermalization_us, model->budget_seconds};
    *out = new qt_plan{plan_shots(list, min_shots, max_shots, tm)};
  });
}

void qt_plan_free(qt_plan* plan) { delete plan; }

size_t qt_plan_submission_count(const qt_plan* plan) { return plan ? plan->plan.submissions.size() : 0; }

qt_status qt_plan_submission(const qt_plan* plan, size_t index, size_t* job_index, uint64_t* shots,
                             double* estimated_seconds) {
  return guarded([&] {
    require(plan, "plan");
    if (index >= plan->plan.submissions.size()) fail(Errc::range, "submission index out of range");
    const Submission& s = plan->plan.submissions[index];
    if (job_index) *job_index = s.job_index;
    if (shots) *shots = s.shots;
    if (estimated_seconds) *estimated_seconds = s.estimated_seconds;
  });
}

qt_status qt_plan_job(const qt_plan* plan, size_t job_index, uint64_t* total_shots, double* complexity) {
  return guarded([&] {
    require(plan, "plan");
    if (job_index >= plan->plan.job_shots.size()) fail(Errc::range, "job index out of range");
    if (total_shots) *total_shots = plan->plan.job_shots[job_index];
    if (complexity) *complexity = plan->plan.complexity[job_index];
  });
}

void qt_fit_options_default(qt_fit_options* options) {
  if (!options) return;
  const FitOptions d;
  options->exclude_zero_temperature = d.exclusion.zero_temperature;
  options->exclude_high_t_saturation = d.exclusion.high_t_saturation;
  options->exclude_poor_fit = d.exclusion.poor_fit;
  options->weighted = d.weighted;
}

qt_status qt_fit_scaling(const qt_sweep_point* points, size_t n, const qt_fit_options* options, qt_fit_result* out) {
  return guarded([&] {
    require(out, "out");
    if (n) require(points, "points");
    std::vector<SweepPoint> pts;
    for (size_t i = 0; i < n; ++i) pts.push_back(to_point(points[i]));
    FitOptions fo;
    if (options) {
      fo.exclusion = {options->exclude_zero_temperature != 0, options->exclude_high_t_saturation != 0,
                      options->exclude_poor_fit != 0};
      fo.weighted = options->weighted != 0;
    }
    const FitResult r = fit_teff_scaling(pts, fo);
    *out = {r.tbar, r.alpha, r.stderr_tbar, r.stderr_alpha, r.r_squared, r.points_used, r.points_excluded};
  });
}

qt_status qt_aggregate_over_sizes(const qt_sweep_point* entries, size_t n, int min_size, qt_aggregate_point* out,
                                  size_t cap, size_t* needed) {
  return guarded([&] {
    if (n) require(entries, "entries");
    std::vector<SizedEstimate> in;
    for (size_t i = 0; i < n; ++i) {
      const auto& e = entries[i];
      in.push_back({e.n_qb, e.x, e.t_eff, e.epsilon, Flags(e.flags), e.tau_us});
    }
    const AggregateResult agg = aggregate_over_sizes(in, min_size);
    if (needed) *needed = agg.points.size();
    if (cap == 0) return;
    require(out, "out");
    if (cap < agg.points.size()) fail(Errc::buffer_too_small, "buffer too small for aggregate");
    for (size_t i = 0; i < agg.points.size(); ++i) {
      const auto& a = agg.points[i];
      out[i] = {a.point.x, a.point.t_eff, a.point.epsilon, a.t_min, a.t_max, a.spread, a.sizes, a.point.flags.bits()};
    }
  });
}

qt_status qt_graph_load(const char* path, qt_graph** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new qt_graph{load_graph(path)};
  });
}

qt_status qt_graph_from_edges(const int64_t* edges, size_t n_edges, qt_graph** out) {
  return guarded([&] {
    require(out, "out");
    if (n_edges) require(edges, "edges");
    std::vector<std::pair<NodeId, NodeId>> list;
    for (size_t i = 0; i < n_edges; ++i) list.emplace_back(edges[2 * i], edges[2 * i + 1]);
    *out = new qt_graph{HardwareGraph(list)};
  });
}

void qt_graph_free(qt_graph* graph) { delete graph; }

size_t qt_graph_node_count(const qt_graph* graph) { return graph ? graph->graph.node_count() : 0; }

size_t qt_graph_edge_count(const qt_graph* graph) { return graph ? graph->graph.edge_count() : 0; }

int qt_graph_is_bipartite(const qt_graph* graph) { return graph && graph->graph.is_bipartite() ? 1 : 0; }

qt_status qt_find_ring_embedding(const qt_graph* graph, int length, double timeout_seconds, uint64_t seed,
                                 uint64_t max_expansions, int64_t* cycle, size_t cap) {
  return guarded([&] {
    require(graph, "graph");
    require(cycle, "cycle");
    if (length < 0 || cap < static_cast<size_t>(length))
      fail(Errc::buffer_too_small, "cycle buffer smaller than the ring length");
    EmbeddingSearchOptions o;
    o.seed = seed;
    o.max_expansions = max_expansions;
    if (timeout_seconds > 0.0)
      o.timeout = std::chrono::duration<double>(timeout_seconds);
    else
      o.timeout.reset();
    const RingEmbedding e = find_ring_embedding(graph->graph, length, o);
    std::copy(e.cycle.begin(), e.cycle.end(), cycle);
  });
}

qt_status qt_verify_embedding(const qt_graph* graph, const int64_t* cycle, size_t len, int length, int* ok,
                              char* message, size_t cap) {
  return guarded([&] {
    require(graph, "graph");
    require(ok, "ok");
    if (len) require(cycle, "cycle");
    const EmbeddingReport r = verify_embedding(graph->graph, RingEmbedding{std::vector<NodeId>(cycle, cycle + len)}, length);
    *ok = r.ok ? 1 : 0;
    if (message && cap) copy_out(r.message, message, cap, nullptr);
  });
}

}  // extern "C"
