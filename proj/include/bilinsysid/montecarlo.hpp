#ifndef BILINSYSID_MONTECARLO_HPP
#define BILINSYSID_MONTECARLO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bilinsysid/em.hpp"
#include "bilinsysid/ml.hpp"
#include "bilinsysid/types.hpp"

namespace bsid {

enum class Method { kMl, kEm };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

enum class InitPolicy { kHalfTruth, kRandomPerturbation, kExplicit };

/// Every parameter block multiplied by factor; with a positive factor the
/// result stays feasible (half-truth initializations use factor 0.5).
SystemParams scale_params(const SystemParams& params, double factor);

/// Each block multiplied by an independent 1 + uniform(-scale, scale) draw;
/// covariance factors are floored at 0.05 to preserve feasibility.
SystemParams perturb_params(const SystemParams& params, double scale,
                            std::uint64_t seed);

/// Monte-Carlo sweep configuration. Fully determines the experiment together
/// with the method; identical configs produce identical summaries, also
/// under parallel trial execution.
struct McConfig {
  SystemParams system;  // ground-truth structure (covariances recalibrated)
  int trials = 100;
  std::vector<double> snr_db_levels;
  std::vector<int> dataset_lengths;
  int validation_length = 100;
  InitPolicy init_policy = InitPolicy::kHalfTruth;
  double perturbation_scale = 0.5;          // random-perturbation policy
  std::optional<SystemParams> explicit_init;
  std::uint64_t seed = 1;
  int workers = 1;  // capped by BILIN_SYSID_THREADS when that is set
  FitOptions ml_options;
  EmOptions em_options;
};

struct TrialRecord {
  double snr_db = 0.0;
  int n_d = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;  // error class name when !ok
  double output_error_sum = 0.0;
  double output_error_mean = 0.0;
  double c_error = 0.0;
  double m_error = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
};

/// Per-(snr, nD) aggregate of one metric.
struct McCell {
  double snr_db = 0.0;
  int n_d = 0;
  std::string metric;
  double mean = 0.0;
  double std_dev = 0.0;
  double median = 0.0;
  int n_fail = 0;
  bool degraded = false;  // more than 20% of trials failed
};

struct McSummary {
  Method method = Method::kEm;
  std::vector<TrialRecord> records;  // all trials, fixed order
  std::vector<McCell> cells;         // deterministic aggregates
  double total_wall_seconds = 0.0;

  /// Recomputes the aggregate cells from the raw records.
  static std::vector<McCell> aggregate(const std::vector<TrialRecord>& records);
};

/**
 * For every (snr, nD) cell and trial: generate a random binary input,
 * calibrate the noise to the cell SNR, simulate a dataset, fit with the
 * chosen method from the configured init and score against a fresh
 * validation input of the configured length. Per-trial failures are
 * recorded, not fatal. Trials may run on several workers; the result does
 * not depend on the worker count.
 */
McSummary run_monte_carlo(const McConfig& config, Method method);

struct BenchRow {
  int n_d = 0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
};

/**
 * Times full fits with a fixed iteration cap on freshly simulated data from
 * the scalar benchmark system, one row per dataset length.
 */
std::vector<BenchRow> runtime_benchmark(Method method,
                                        const std::vector<int>& lengths,
                                        int repetitions, int iteration_cap,
                                        std::uint64_t seed);

/// Worker count after applying the BILIN_SYSID_THREADS cap.
int effective_workers(int requested);

}  // namespace bsid

#endif  // BILINSYSID_MONTECARLO_HPP
