#ifndef BILINSYSID_IO_HPP
#define BILINSYSID_IO_HPP

#include <optional>
#include <string>

#include "bilinsysid/metrics.hpp"
#include "bilinsysid/montecarlo.hpp"
#include "bilinsysid/simulate.hpp"
#include "bilinsysid/types.hpp"

namespace bsid {

/// Doubles in CSV output are printed with "%.17g", which round-trips
/// bit-exactly. Lines starting with '#' are provenance comments and are
/// skipped by the readers.
std::string format_double(double v);

/**
 * Dataset CSV: header "t,u_1..u_nu,y_1..y_ny", one row per step. When
 * with_states is set, state columns x_1..x_nx are appended; readers ignore
 * them. An optional provenance string is embedded as a '#' comment line.
 */
void write_dataset_csv(const std::string& path, const Trajectory& trajectory,
                       bool with_states,
                       const std::string& provenance = std::string());
void write_dataset_csv(const std::string& path, const Dataset& dataset,
                       const std::string& provenance = std::string());
Dataset read_dataset_csv(const std::string& path);

/// SystemParams JSON document with keys dims, A, B, C (nu+1 row-major
/// matrices), D, mu_x0, S_x0, S_w, S_v; matrices as nested row arrays.
void write_params_json(const std::string& path, const SystemParams& params,
                       const std::string& provenance = std::string());
SystemParams read_params_json(const std::string& path);
std::string params_to_json_string(const SystemParams& params);
SystemParams params_from_json_string(const std::string& text);

/// Iteration trace CSV: iter,cost,step_norm,grad_norm,log_likelihood,
/// min_cov_eigenvalue.
void write_trace_csv(const std::string& path, const EstimationReport& report,
                     const std::string& provenance = std::string());

/// Validation metrics JSON (plus the two rollouts behind the comparison
/// figures, when traj_csv_path is non-empty).
void write_validation_outputs(const std::string& metrics_json_path,
                              const std::string& traj_csv_path,
                              const SystemParams& truth,
                              const SystemParams& est,
                              const Matrix& val_inputs,
                              const OutputErrorResult& output_error,
                              const ParamErrorResult& param_error,
                              const std::string& provenance = std::string());

/**
 * Monte-Carlo summary CSV with rows (snr_db,n_d,metric,mean,std,median,
 * n_fail,degraded). Only seed-deterministic metrics appear here, so repeated
 * runs with the same config are byte-identical; wall-clock statistics go to
 * the JSON report instead.
 */
void write_mc_summary_csv(const std::string& path, const McSummary& summary,
                          const std::string& provenance = std::string());
/// Raw per-trial records (includes wall times, hence not byte-reproducible).
void write_mc_trials_csv(const std::string& path, const McSummary& summary,
                         const std::string& provenance = std::string());
void write_mc_report_json(const std::string& path, const McSummary& summary,
                          const std::string& provenance = std::string());
std::string mc_summary_csv_string(const McSummary& summary,
                                  const std::string& provenance = std::string());

void write_bench_csv(const std::string& path,
                     const std::vector<BenchRow>& rows,
                     const std::string& provenance = std::string());

}  // namespace bsid

#endif  // BILINSYSID_IO_HPP
