/*
 * bilinsysid — identification of discrete-time systems with linear state
 * dynamics and bilinear (input-modulated) observation models.
 *
 * C API of the shared library. All functions return a bsid_status; on
 * failure bsid_last_error() describes the problem for the calling thread.
 * Objects returned through out-parameters are owned by the caller and
 * released with the matching *_free function. NULL out-parameters or handles
 * yield BSID_ERR_INVALID_ARGUMENT.
 */
#ifndef BILINSYSID_H
#define BILINSYSID_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bsid_status {
  BSID_OK = 0,
  BSID_ERR_SHAPE = 1,         /* argument dimensions inconsistent */
  BSID_ERR_COVARIANCE = 2,    /* covariance not positive definite */
  BSID_ERR_CONDITIONING = 3,  /* factorization failed */
  BSID_ERR_EXCITATION = 4,    /* data violates excitation assumptions */
  BSID_ERR_CALIBRATION = 5,   /* SNR calibration impossible */
  BSID_ERR_VALIDATION = 6,    /* validation metric undefined */
  BSID_ERR_OPTIMIZATION = 7,  /* optimizer could not make progress */
  BSID_ERR_PARAM = 8,         /* parameter value out of range */
  BSID_ERR_IO = 9,            /* file I/O or parse failure */
  BSID_ERR_INVALID_ARGUMENT = 10,
  BSID_ERR_INTERNAL = 11
} bsid_status;

typedef struct bsid_params bsid_params;
typedef struct bsid_signal bsid_signal;
typedef struct bsid_trajectory bsid_trajectory;
typedef struct bsid_dataset bsid_dataset;
typedef struct bsid_report bsid_report;
typedef struct bsid_mc_result bsid_mc_result;
typedef struct bsid_bench_result bsid_bench_result;

/* Message for the most recent failure on this thread; never NULL. */
const char* bsid_last_error(void);
const char* bsid_status_name(bsid_status status);

/* ------------------------------------------------------------------ */
/* System parameters                                                    */

/* name: "example1" (two-state bilinear benchmark) or "example2"
 * (ZOH-discretized RC circuit with default components). */
bsid_status bsid_params_builtin(const char* name, bsid_params** out);
bsid_status bsid_params_load(const char* path, bsid_params** out);
/* provenance_json may be NULL; it is embedded in the output file. */
bsid_status bsid_params_save(const bsid_params* params, const char* path,
                             const char* provenance_json);
bsid_status bsid_params_clone(const bsid_params* params, bsid_params** out);
/* Every block multiplied by factor (half-truth initializations). */
bsid_status bsid_params_scale(const bsid_params* params, double factor,
                              bsid_params** out);
/* Each block multiplied by an independent 1 + uniform(-scale, scale) draw
 * (random-perturbation initializations). */
bsid_status bsid_params_perturb(const bsid_params* params, double scale,
                                uint64_t seed, bsid_params** out);
bsid_status bsid_params_dims(const bsid_params* params, int* nx, int* nu,
                             int* ny);
/* Writes a newline-separated list of violated invariants into buf
 * (empty string when feasible); n_violations may be NULL. */
bsid_status bsid_params_validate(const bsid_params* params, char* buf,
                                 size_t buflen, int* n_violations);
/* Zero-order-hold discretization of the RC-circuit example. */
bsid_status bsid_params_discretize_rc(double r0, double rs, double rp,
                                      double l, double c, double alpha,
                                      double sample_time, bsid_params** out);
void bsid_params_free(bsid_params* params);

/* ------------------------------------------------------------------ */
/* Input signals                                                        */

bsid_status bsid_signal_binary(int n_steps, int nu, double low, double high,
                               uint64_t seed, bsid_signal** out);
/* One tone per channel: amplitudes and angular_freqs have nu entries. */
bsid_status bsid_signal_sine(int n_steps, int nu, const double* amplitudes,
                             const double* angular_freqs, double sample_time,
                             bsid_signal** out);
/* Sum of n_tones tones, identical on every channel. */
bsid_status bsid_signal_multisine(int n_steps, int nu, int n_tones,
                                  const double* amplitudes,
                                  const double* angular_freqs,
                                  double sample_time, bsid_signal** out);
void bsid_signal_free(bsid_signal* signal);

/* ------------------------------------------------------------------ */
/* Simulation                                                           */

/* Returns a copy of params with S_w, S_v recalibrated to the target SNR. */
bsid_status bsid_calibrate_snr(const bsid_params* params,
                               const bsid_signal* inputs, double snr_db,
                               uint64_t seed, bsid_params** out);
bsid_status bsid_simulate(const bsid_params* params, const bsid_signal* inputs,
                          uint64_t seed, bsid_trajectory** out);
bsid_status bsid_trajectory_save_csv(const bsid_trajectory* trajectory,
                                     const char* path, int with_states,
                                     const char* provenance_json);
void bsid_trajectory_free(bsid_trajectory* trajectory);

/* ------------------------------------------------------------------ */
/* Datasets                                                             */

bsid_status bsid_dataset_load_csv(const char* path, bsid_dataset** out);
bsid_status bsid_dataset_dims(const bsid_dataset* dataset, int* n_steps,
                              int* nu, int* ny);
/* input_ok/output_ok receive 0 or 1; either may be NULL. */
bsid_status bsid_dataset_check_excitation(const bsid_dataset* dataset,
                                          int* input_ok, int* output_ok);
void bsid_dataset_free(bsid_dataset* dataset);

/* ------------------------------------------------------------------ */
/* Fitting                                                              */

typedef struct bsid_fit_options {
  int max_iters;          /* <= 0 selects the method default */
  double epsilon;         /* <= 0 selects the method default */
  double step_size;       /* ML initial step; <= 0 selects the default */
  int line_search;        /* ML only: 0 off, 1 on */
  int monotonicity_audit; /* EM only: log-likelihood audit per iteration */
  int record_trace;
} bsid_fit_options;

void bsid_fit_options_init(bsid_fit_options* options);

bsid_status bsid_fit_ml(const bsid_dataset* dataset, const bsid_params* init,
                        const bsid_fit_options* options, bsid_report** out);
bsid_status bsid_fit_em(const bsid_dataset* dataset, const bsid_params* init,
                        const bsid_fit_options* options, bsid_report** out);

bsid_status bsid_report_params(const bsid_report* report, bsid_params** out);
bsid_status bsid_report_stats(const bsid_report* report, int* iterations,
                              double* final_cost, double* final_step_norm,
                              double* wall_seconds);
/* "epsilon", "max_iters" or "line_search_exhausted". */
bsid_status bsid_report_termination(const bsid_report* report, char* buf,
                                    size_t buflen);
/* Newline-separated warnings; empty string when there are none. */
bsid_status bsid_report_warnings(const bsid_report* report, char* buf,
                                 size_t buflen);
bsid_status bsid_report_save_trace_csv(const bsid_report* report,
                                       const char* path,
                                       const char* provenance_json);
void bsid_report_free(bsid_report* report);

/* ------------------------------------------------------------------ */
/* Validation metrics                                                   */

typedef struct bsid_validation_metrics {
  double output_error_sum;  /* sum of per-step error ratios */
  double output_error_mean; /* sum divided by the used terms */
  int terms_used;
  int terms_skipped;
  double c_error; /* ||C - Chat|| / ||C|| */
  double m_error; /* ||M - Mhat|| / ||M|| */
} bsid_validation_metrics;

bsid_status bsid_validate(const bsid_params* truth, const bsid_params* est,
                          const bsid_signal* val_inputs,
                          bsid_validation_metrics* out);
/* Writes the metrics JSON and, when traj_csv_path is non-NULL, the two
 * noise-free rollouts behind the comparison plots. */
bsid_status bsid_validate_save(const bsid_params* truth,
                               const bsid_params* est,
                               const bsid_signal* val_inputs,
                               const char* metrics_json_path,
                               const char* traj_csv_path,
                               const char* provenance_json);

/* ------------------------------------------------------------------ */
/* Monte-Carlo sweeps and runtime benchmarks                            */

/* config_json keys:
 *   method:            "ml" | "em"                (required)
 *   system:            "example1" | "example2" | params object
 *   trials:            int                        (default 100)
 *   snr_db:            array of numbers           (required)
 *   lengths:           array of ints              (required)
 *   validation_length: int                        (default 100)
 *   init:              "half-truth" | "random-perturbation" (default half-truth)
 *   init_scale:        double, random-perturbation spread (default 0.5)
 *   seed:              unsigned int               (default 1)
 *   workers:           int                        (default 1; capped by
 *                                                  BILIN_SYSID_THREADS)
 *   max_iters, epsilon, audit: fit option overrides
 * Identical configs give identical summaries at any worker count. */
bsid_status bsid_monte_carlo_run(const char* config_json,
                                 bsid_mc_result** out);
/* Any of the three paths may be NULL to skip that file. The summary CSV is
 * byte-reproducible; wall-clock statistics live in the JSON report. */
bsid_status bsid_mc_result_save(const bsid_mc_result* result,
                                const char* summary_csv_path,
                                const char* trials_csv_path,
                                const char* report_json_path,
                                const char* provenance_json);
void bsid_mc_result_free(bsid_mc_result* result);

/* config_json keys: method ("ml"|"em"), lengths (ascending ints),
 * repetitions (default 3), iteration_cap (default 30), seed (default 1). */
bsid_status bsid_bench_run(const char* config_json, bsid_bench_result** out);
bsid_status bsid_bench_result_save(const bsid_bench_result* result,
                                   const char* csv_path,
                                   const char* provenance_json);
void bsid_bench_result_free(bsid_bench_result* result);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BILINSYSID_H */
