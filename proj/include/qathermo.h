/*
 * qathermo C API
 *
 * Classical thermometry of Gibbs samplers on odd antiferromagnetic Ising
 * rings: exact ring statistics, synthetic annealer sampling, effective
 * temperature estimation, scaling-law fits, shot planning and native ring
 * embedding.
 *
 * Conventions
 *   - Every fallible call returns a qt_status; QT_OK is zero.
 *   - On failure, qt_last_error() returns a message for the calling thread
 *     that stays valid until the next failing call on that thread.
 *   - Objects are opaque handles created by qt_*_create / qt_*_load /
 *     qt_*_read and released with the matching qt_*_free (NULL is accepted).
 *   - Functions that produce strings or arrays write into caller buffers and
 *     report the required size through `needed`; pass cap = 0 to query it.
 */
#ifndef QATHERMO_H
#define QATHERMO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(QATHERMO_BUILDING)
#    define QT_API __declspec(dllexport)
#  else
#    define QT_API __declspec(dllimport)
#  endif
#else
#  define QT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qt_status {
  QT_OK = 0,
  QT_ERR_DOMAIN = 1,
  QT_ERR_SATURATION = 2,
  QT_ERR_SIZE = 3,
  QT_ERR_PARITY = 4,
  QT_ERR_RANGE = 5,
  QT_ERR_MISMATCH = 6,
  QT_ERR_PARSE = 7,
  QT_ERR_IO = 8,
  QT_ERR_EXTRAPOLATION = 9,
  QT_ERR_INFEASIBLE = 10,
  QT_ERR_INSUFFICIENT_POINTS = 11,
  QT_ERR_DEGENERATE_ABSCISSA = 12,
  QT_ERR_EMPTY_GROUP = 13,
  QT_ERR_NOT_FOUND = 14,
  QT_ERR_BIPARTITE = 15,
  QT_ERR_NEGATIVE_TEMPERATURE = 16,
  QT_ERR_INVALID_ARGUMENT = 17,
  QT_ERR_BUFFER_TOO_SMALL = 18,
  QT_ERR_INTERNAL = 99
} qt_status;

QT_API const char* qt_last_error(void);
QT_API const char* qt_status_name(qt_status status);
QT_API const char* qt_version(void);

/* ---- Ring statistics ---------------------------------------------------- */

/* Number of odd wall counts 1, 3, ..., n_qb, i.e. (n_qb + 1) / 2. */
QT_API size_t qt_support_size(int n_qb);

QT_API qt_status qt_log_partition(double t, int n_qb, double* out);
QT_API qt_status qt_mean_density(double t, int n_qb, double* out);
QT_API qt_status qt_invert_mean_density(double density, int n_qb, double* out_t);
/* probs[i] = p(2i + 1); len must equal qt_support_size(n_qb). */
QT_API qt_status qt_domain_wall_pmf(double t, int n_qb, double* probs, size_t len);
QT_API qt_status qt_brute_force_pmf(double t, int n_qb, double* probs, size_t len);

/* ---- Samples ------------------------------------------------------------ */

typedef struct qt_samples qt_samples;

QT_API qt_status qt_samples_draw(double t, int n_qb, uint64_t shots, uint64_t seed, qt_samples** out);
QT_API qt_status qt_samples_from_counts(int n_qb, const int* counts, size_t len, qt_samples** out);
/* Reads the ring_size/count/spins text format. */
QT_API qt_status qt_samples_read(const char* path, qt_samples** out);
QT_API qt_status qt_samples_write(const qt_samples* samples, const char* path);
QT_API void qt_samples_free(qt_samples* samples);

QT_API int qt_samples_ring_size(const qt_samples* samples);
QT_API uint64_t qt_samples_shots(const qt_samples* samples);
QT_API qt_status qt_samples_counts(const qt_samples* samples, int* counts, size_t cap, size_t* needed);
/* freq[i] = xi(2i + 1); len must equal the support size. */
QT_API qt_status qt_samples_histogram(const qt_samples* samples, double* freq, size_t len);
/* JSON object with the generating parameters. */
QT_API qt_status qt_samples_metadata(const qt_samples* samples, char* buf, size_t cap, size_t* needed);

/* Wall count of a "+-+-+" spin string. */
QT_API qt_status qt_count_domain_walls(const char* spins, int* out);
/* Writes n_qb symbols plus a terminating NUL into buf (cap >= n_qb + 1). */
QT_API qt_status qt_realize_config(int n_qb, int n_dw, uint64_t seed, char* buf, size_t cap);

/* ---- Thermometer -------------------------------------------------------- */

#define QT_FLAG_ZERO_TEMPERATURE 0x1u
#define QT_FLAG_HIGH_T_SATURATION 0x2u
#define QT_FLAG_POOR_FIT 0x4u

typedef struct qt_estimator_options {
  int max_iterations;
  double t_tolerance;
  double t_min;
  double t_max;
  double initial_step;
  double poor_fit_threshold;
  double high_t_delta;
  double resolution_floor;
  double zero_t_delta; /* negative: derive from resolution_floor */
} qt_estimator_options;

typedef struct qt_estimate {
  double t_eff;   /* 0 when is_zero is set */
  int is_zero;    /* frozen ensemble: symbolic zero temperature */
  double epsilon; /* TVD at t_eff */
  int iterations;
  int converged;
  unsigned flags; /* QT_FLAG_* */
} qt_estimate;

QT_API void qt_estimator_options_default(qt_estimator_options* options);
QT_API qt_status qt_tvd(int n_qb, const double* freq, const double* probs, size_t len, double* out);
QT_API qt_status qt_estimate_histogram(int n_qb, const double* freq, size_t len, const qt_estimator_options* options,
                                       qt_estimate* out);
QT_API qt_status qt_estimate_samples(const qt_samples* samples, const qt_estimator_options* options, qt_estimate* out);
QT_API qt_status qt_classify_regime(int n_qb, const double* freq, size_t len, double epsilon,
                                    const qt_estimator_options* options, unsigned* flags);
/* "zero_temperature|poor_fit" style rendering; empty for no flags. */
QT_API qt_status qt_flags_format(unsigned flags, char* buf, size_t cap, size_t* needed);
QT_API qt_status qt_flags_parse(const char* text, unsigned* flags);

/* ---- Machine profiles and the offset temperature model ----------------- */

typedef struct qt_profile qt_profile;

QT_API qt_status qt_profile_load(const char* path, qt_profile** out);
QT_API qt_status qt_profile_create(const char* name, double b1_kelvin, double t_machine_kelvin, const double* tau_us,
                                   const double* alpha, const double* tbar, size_t n, qt_profile** out);
QT_API void qt_profile_free(qt_profile* profile);
QT_API const char* qt_profile_name(const qt_profile* profile);
QT_API double qt_profile_b1_kelvin(const qt_profile* profile);
QT_API double qt_profile_t_machine_kelvin(const qt_profile* profile);

QT_API qt_status qt_profile_alpha(const qt_profile* profile, double tau_us, int allow_extrapolation, double* out);
QT_API qt_status qt_profile_tbar(const qt_profile* profile, double tau_us, int allow_extrapolation, double* out);
QT_API qt_status qt_physical_coupling(const qt_profile* profile, double j_enc, double* out_kelvin);
QT_API qt_status qt_model_teff(const qt_profile* profile, double j_enc, double tau_us, int allow_extrapolation,
                               double* out);
QT_API qt_status qt_physical_temperature(double j_phys_kelvin, double t_eff, double tbar, double* out_kelvin);

/* ---- Synthetic annealer ------------------------------------------------- */

typedef struct qt_job {
  int n_qb;
  double j_enc;
  double tau_us;
  uint64_t shots;
} qt_job;

typedef enum qt_perturbation_kind {
  QT_PERTURB_NONE = 0,
  QT_PERTURB_READOUT_FLIP = 1,
  QT_PERTURB_GROUND_STATE_MIX = 2
} qt_perturbation_kind;

typedef struct qt_perturbation {
  qt_perturbation_kind kind;
  double parameter;
} qt_perturbation;

QT_API qt_status qt_perturbation_parse(const char* text, qt_perturbation* out);
QT_API qt_status qt_simulate_job(const qt_profile* profile, const qt_job* job, const qt_perturbation* perturbation,
                                 uint64_t seed, int allow_extrapolation, qt_samples** out);
/* Independent per-point seed for sweeps (splitmix64 of base and index). */
QT_API uint64_t qt_derive_seed(uint64_t base, uint64_t index);

typedef struct qt_time_model {
  double programming_us;
  double readout_us;
  double thermalization_us;
  double budget_seconds;
} qt_time_model;

typedef struct qt_plan qt_plan;

QT_API void qt_time_model_default(qt_time_model* model);
QT_API qt_status qt_plan_shots(const qt_job* jobs, size_t n_jobs, uint64_t min_shots, uint64_t max_shots,
                               const qt_time_model* model, qt_plan** out);
QT_API void qt_plan_free(qt_plan* plan);
QT_API size_t qt_plan_submission_count(const qt_plan* plan);
QT_API qt_status qt_plan_submission(const qt_plan* plan, size_t index, size_t* job_index, uint64_t* shots,
                                    double* estimated_seconds);
QT_API qt_status qt_plan_job(const qt_plan* plan, size_t job_index, uint64_t* total_shots, double* complexity);

/* ---- Scaling-law fit ---------------------------------------------------- */

typedef struct qt_sweep_point {
  double x;
  double t_eff;
  double epsilon;
  unsigned flags;
  int n_qb;
  double tau_us;
  double weight;
} qt_sweep_point;

typedef struct qt_fit_options {
  int exclude_zero_temperature;
  int exclude_high_t_saturation;
  int exclude_poor_fit;
  int weighted;
} qt_fit_options;

typedef struct qt_fit_result {
  double tbar;
  double alpha;
  double stderr_tbar;
  double stderr_alpha;
  double r_squared;
  int points_used;
  int points_excluded;
} qt_fit_result;

typedef struct qt_aggregate_point {
  double x;
  double mean_t_eff;
  double mean_epsilon;
  double t_min;
  double t_max;
  double spread;
  int sizes;
  unsigned flags;
} qt_aggregate_point;

QT_API void qt_fit_options_default(qt_fit_options* options);
QT_API qt_status qt_fit_scaling(const qt_sweep_point* points, size_t n, const qt_fit_options* options,
                                qt_fit_result* out);
/* Entries are qt_sweep_points keyed by (n_qb, x). Writes up to cap aggregated
   points in ascending x; `needed` receives the full count. */
QT_API qt_status qt_aggregate_over_sizes(const qt_sweep_point* entries, size_t n, int min_size,
                                         qt_aggregate_point* out, size_t cap, size_t* needed);

/* ---- Hardware graphs and ring embedding -------------------------------- */

typedef struct qt_graph qt_graph;

QT_API qt_status qt_graph_load(const char* path, qt_graph** out);
/* edges holds 2 * n_edges node ids: a0 b0 a1 b1 ... */
QT_API qt_status qt_graph_from_edges(const int64_t* edges, size_t n_edges, qt_graph** out);
QT_API void qt_graph_free(qt_graph* graph);
QT_API size_t qt_graph_node_count(const qt_graph* graph);
QT_API size_t qt_graph_edge_count(const qt_graph* graph);
QT_API int qt_graph_is_bipartite(const qt_graph* graph);

/* timeout_seconds <= 0 disables the clock; max_expansions = 0 is unbounded.
   cycle must hold at least `length` ids. */
QT_API qt_status qt_find_ring_embedding(const qt_graph* graph, int length, double timeout_seconds, uint64_t seed,
                                        uint64_t max_expansions, int64_t* cycle, size_t cap);
/* *ok is 1 for a valid embedding; otherwise message (if given) describes the
   first violation. */
QT_API qt_status qt_verify_embedding(const qt_graph* graph, const int64_t* cycle, size_t len, int length, int* ok,
                                     char* message, size_t cap);

#ifdef __cplusplus
}
#endif

#endif /* QATHERMO_H */
