#include "bilinsysid/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <thread>

#include "bilinsysid/builtin.hpp"
#include "bilinsysid/errors.hpp"
#include "bilinsysid/metrics.hpp"
#include "bilinsysid/rng.hpp"
#include "bilinsysid/simulate.hpp"

namespace bsid {

std::string method_name(Method m) { return m == Method::kMl ? "ml" : "em"; }

Method method_from_name(const std::string& name) {
  if (name == "ml") {
    return Method::kMl;
  }
  if (name == "em") {
    return Method::kEm;
  }
  throw ParamError("unknown method '" + name + "' (expected ml or em)");
}

int effective_workers(int requested) {
  int workers = std::max(1, requested);
  if (const char* cap = std::getenv("BILIN_SYSID_THREADS")) {
    const int limit = std::atoi(cap);
    if (limit >= 1) {
      workers = std::min(workers, limit);
    }
  }
  return workers;
}

SystemParams scale_params(const SystemParams& p, double f) {
  SystemParams out = p;
  out.A *= f;
  out.B *= f;
  for (Matrix& c : out.C) {
    c *= f;
  }
  out.D *= f;
  out.mu_x0 *= f;
  out.S_x0 *= f;
  out.S_w *= f;
  out.S_v *= f;
  return out;
}

SystemParams perturb_params(const SystemParams& p, double scale,
                            std::uint64_t seed) {
  RandomStream rng(seed);
  auto factor = [&]() { return 1.0 + rng.uniform(-scale, scale); };
  auto cov_factor = [&]() {
    return std::max(0.05, 1.0 + rng.uniform(-scale, scale));
  };
  SystemParams out = p;
  out.A *= factor();
  out.B *= factor();
  for (Matrix& c : out.C) {
    c *= factor();
  }
  out.D *= factor();
  out.mu_x0 *= factor();
  out.S_x0 *= cov_factor();
  out.S_w *= cov_factor();
  out.S_v *= cov_factor();
  return out;
}

namespace {

const char* error_class(const Error& e) {
  if (dynamic_cast<const ConditioningError*>(&e)) return "conditioning";
  if (dynamic_cast<const ExcitationError*>(&e)) return "excitation";
  if (dynamic_cast<const CovarianceError*>(&e)) return "covariance";
  if (dynamic_cast<const OptimizationError*>(&e)) return "optimization";
  if (dynamic_cast<const CalibrationError*>(&e)) return "calibration";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const ParamError*>(&e)) return "param";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  return "error";
}

struct TrialJob {
  double snr_db;
  int n_d;
  int trial;
  std::uint64_t seed;
};

TrialRecord run_trial(const McConfig& config, Method method,
                      const TrialJob& job) {
  TrialRecord rec;
  rec.snr_db = job.snr_db;
  rec.n_d = job.n_d;
  rec.trial = job.trial;
  rec.seed = job.seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const int nu = config.system.dims.nu;
    const Matrix inputs = gen_random_binary(job.n_d, nu, -1.0, 1.0,
                                            derive_seed(job.seed, 1));
    SystemParams truth = config.system;
    const auto noise =
        calibrate_snr(truth, inputs, job.snr_db, derive_seed(job.seed, 2));
    truth.S_w = noise.first;
    truth.S_v = noise.second;

    const Trajectory traj = simulate(truth, inputs, derive_seed(job.seed, 3));
    const Dataset dataset = traj.dataset();

    SystemParams init;
    switch (config.init_policy) {
      case InitPolicy::kHalfTruth:
        init = scale_params(truth, 0.5);
        break;
      case InitPolicy::kRandomPerturbation:
        init = perturb_params(truth, config.perturbation_scale,
                              derive_seed(job.seed, 4));
        break;
      case InitPolicy::kExplicit:
        if (!config.explicit_init) {
          throw ParamError("monte carlo: explicit init policy without init");
        }
        init = *config.explicit_init;
        break;
    }

    EstimationReport report;
    if (method == Method::kMl) {
      report = fit_ml(dataset, init, config.ml_options);
    } else {
      report = fit_em(dataset, init, config.em_options);
    }

    // Fresh generator stream for the validation inputs, disjoint from every
    // training stream by seed construction.
    const Matrix val_inputs =
        gen_random_binary(config.validation_length, nu, -1.0, 1.0,
                          derive_seed(job.seed, 5));
    const OutputErrorResult oe =
        normalized_output_error(truth, report.params, val_inputs);
    const ParamErrorResult pe = param_relative_error(truth, report.params);

    rec.ok = true;
    rec.output_error_sum = oe.sum;
    rec.output_error_mean = oe.mean;
    rec.c_error = pe.c_error;
    rec.m_error = pe.m_error;
    rec.iterations = report.iterations;
  } catch (const Error& e) {
    rec.ok = false;
    rec.failure = error_class(e);
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rec;
}

void run_jobs(int workers, int n_jobs, const std::function<void(int)>& body) {
  if (workers <= 1 || n_jobs <= 1) {
    for (int i = 0; i < n_jobs; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_jobs) {
        break;
      }
      body(i);
    }
  };
  std::vector<std::thread> threads;
  const int n_threads = std::min(workers, n_jobs);
  threads.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) {
    threads.emplace_back(worker);
  }
  for (std::thread& t : threads) {
    t.join();
  }
}

double median_of(std::vector<double> v) {
  if (v.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void push_metric_cells(std::vector<McCell>& cells, double snr, int n_d,
                       const std::vector<TrialRecord>& cell_records) {
  struct MetricDef {
    const char* name;
    double TrialRecord::*field;
  };
  static const MetricDef defs[] = {
      {"output_error_mean", &TrialRecord::output_error_mean},
      {"output_error_sum", &TrialRecord::output_error_sum},
      {"c_error", &TrialRecord::c_error},
      {"m_error", &TrialRecord::m_error},
  };
  int n_fail = 0;
  for (const TrialRecord& r : cell_records) {
    if (!r.ok) {
      ++n_fail;
    }
  }
  const bool degraded =
      n_fail * 5 > static_cast<int>(cell_records.size());  // > 20%
  for (const MetricDef& def : defs) {
    McCell cell;
    cell.snr_db = snr;
    cell.n_d = n_d;
    cell.metric = def.name;
    cell.n_fail = n_fail;
    cell.degraded = degraded;
    std::vector<double> values;
    values.reserve(cell_records.size());
    for (const TrialRecord& r : cell_records) {
      if (r.ok) {
        values.push_back(r.*(def.field));
      }
    }
    if (!values.empty()) {
      double mean = 0.0;
      for (double v : values) {
        mean += v;
      }
      mean /= static_cast<double>(values.size());
      double var = 0.0;
      for (double v : values) {
        var += (v - mean) * (v - mean);
      }
      var = values.size() > 1 ? var / static_cast<double>(values.size() - 1)
                              : 0.0;
      cell.mean = mean;
      cell.std_dev = std::sqrt(var);
      cell.median = median_of(values);
    } else {
      cell.mean = cell.std_dev = cell.median =
          std::numeric_limits<double>::quiet_NaN();
    }
    cells.push_back(std::move(cell));
  }
}

}  // namespace

std::vector<McCell> McSummary::aggregate(
    const std::vector<TrialRecord>& records) {
  // Cells keyed by (snr, n_d) in first-appearance order.
  std::vector<std::pair<double, int>> keys;
  for (const TrialRecord& r : records) {
    const std::pair<double, int> key{r.snr_db, r.n_d};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      keys.push_back(key);
    }
  }
  std::vector<McCell> cells;
  for (const auto& key : keys) {
    std::vector<TrialRecord> cell_records;
    for (const TrialRecord& r : records) {
      if (r.snr_db == key.first && r.n_d == key.second) {
        cell_records.push_back(r);
      }
    }
    push_metric_cells(cells, key.first, key.second, cell_records);
  }
  return cells;
}

McSummary run_monte_carlo(const McConfig& config, Method method) {
  if (config.trials < 1) {
    throw ParamError("monte carlo: trials must be >= 1");
  }
  if (config.snr_db_levels.empty() || config.dataset_lengths.empty()) {
    throw ParamError("monte carlo: need at least one SNR level and length");
  }
  for (int n : config.dataset_lengths) {
    if (n < 2) {
      throw ParamError("monte carlo: dataset lengths must be >= 2");
    }
  }
  if (config.validation_length < 2) {
    throw ParamError("monte carlo: validation length must be >= 2");
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<TrialJob> jobs;
  for (std::size_t si = 0; si < config.snr_db_levels.size(); ++si) {
    for (std::size_t ni = 0; ni < config.dataset_lengths.size(); ++ni) {
      for (int j = 0; j < config.trials; ++j) {
        TrialJob job;
        job.snr_db = config.snr_db_levels[si];
        job.n_d = config.dataset_lengths[ni];
        job.trial = j;
        job.seed = derive_seed(
            derive_seed(derive_seed(config.seed, si), ni + 1000),
            static_cast<std::uint64_t>(j) + 2000);
        jobs.push_back(job);
      }
    }
  }

  McSummary summary;
  summary.method = method;
  summary.records.resize(jobs.size());
  const int workers = effective_workers(config.workers);
  run_jobs(workers, static_cast<int>(jobs.size()), [&](int i) {
    summary.records[i] = run_trial(config, method, jobs[i]);
  });
  summary.cells = McSummary::aggregate(summary.records);
  summary.total_wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return summary;
}

std::vector<BenchRow> runtime_benchmark(Method method,
                                        const std::vector<int>& lengths,
                                        int repetitions, int iteration_cap,
                                        std::uint64_t seed) {
  if (repetitions < 1 || iteration_cap < 1) {
    throw ParamError("runtime_benchmark: invalid repetitions or cap");
  }
  for (std::size_t i = 1; i < lengths.size(); ++i) {
    if (lengths[i] <= lengths[i - 1]) {
      throw ParamError("runtime_benchmark: lengths must be ascending");
    }
  }

  const SystemParams base = scalar_benchmark_params();
  FitOptions ml_opts;
  ml_opts.max_iters = iteration_cap;
  ml_opts.epsilon = 1e-300;  // run the full cap for comparability
  EmOptions em_opts;
  em_opts.max_iters = iteration_cap;
  em_opts.epsilon = 0.0;
  em_opts.record_trace = false;

  std::vector<BenchRow> rows;
  for (int n_d : lengths) {
    std::vector<double> times;
    times.reserve(repetitions);
    for (int rep = 0; rep < repetitions; ++rep) {
      const std::uint64_t s =
          derive_seed(derive_seed(seed, static_cast<std::uint64_t>(n_d)),
                      static_cast<std::uint64_t>(rep));
      const Matrix inputs =
          gen_random_binary(n_d, 1, -1.0, 1.0, derive_seed(s, 1));
      SystemParams truth = base;
      const auto noise = calibrate_snr(truth, inputs, 18.0, derive_seed(s, 2));
      truth.S_w = noise.first;
      truth.S_v = noise.second;
      const Trajectory traj = simulate(truth, inputs, derive_seed(s, 3));
      const Dataset dataset = traj.dataset();
      const SystemParams init = scale_params(truth, 0.5);

      const auto t0 = std::chrono::steady_clock::now();
      if (method == Method::kMl) {
        fit_ml(dataset, init, ml_opts);
      } else {
        fit_em(dataset, init, em_opts);
      }
      times.push_back(std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count());
    }
    double mean = 0.0;
    for (double t : times) {
      mean += t;
    }
    mean /= static_cast<double>(times.size());
    double var = 0.0;
    for (double t : times) {
      var += (t - mean) * (t - mean);
    }
    var = times.size() > 1 ? var / static_cast<double>(times.size() - 1) : 0.0;
    rows.push_back({n_d, mean, std::sqrt(var)});
  }
  return rows;
}

}  // namespace bsid
