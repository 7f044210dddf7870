#include "bilinsysid.h"

#include <cstring>
#include <string>

#include <json.hpp>

#include "bilinsysid/builtin.hpp"
#include "bilinsysid/em.hpp"
#include "bilinsysid/errors.hpp"
#include "bilinsysid/io.hpp"
#include "bilinsysid/metrics.hpp"
#include "bilinsysid/ml.hpp"
#include "bilinsysid/model.hpp"
#include "bilinsysid/montecarlo.hpp"
#include "bilinsysid/simulate.hpp"

using nlohmann::json;

struct bsid_params {
  bsid::SystemParams value;
};
struct bsid_signal {
  bsid::Matrix inputs;  // nu x n
};
struct bsid_trajectory {
  bsid::Trajectory value;
};
struct bsid_dataset {
  bsid::Dataset value;
};
struct bsid_report {
  bsid::EstimationReport value;
};
struct bsid_mc_result {
  bsid::McSummary value;
};
struct bsid_bench_result {
  std::vector<bsid::BenchRow> rows;
};

namespace {

thread_local std::string g_last_error = "ok";

bsid_status fail(bsid_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

bsid_status from_exception(const std::exception& e) {
  using namespace bsid;
  if (dynamic_cast<const ShapeError*>(&e))
    return fail(BSID_ERR_SHAPE, e.what());
  if (dynamic_cast<const CovarianceError*>(&e))
    return fail(BSID_ERR_COVARIANCE, e.what());
  if (dynamic_cast<const ConditioningError*>(&e))
    return fail(BSID_ERR_CONDITIONING, e.what());
  if (dynamic_cast<const ExcitationError*>(&e))
    return fail(BSID_ERR_EXCITATION, e.what());
  if (dynamic_cast<const CalibrationError*>(&e))
    return fail(BSID_ERR_CALIBRATION, e.what());
  if (dynamic_cast<const ValidationError*>(&e))
    return fail(BSID_ERR_VALIDATION, e.what());
  if (dynamic_cast<const OptimizationError*>(&e))
    return fail(BSID_ERR_OPTIMIZATION, e.what());
  if (dynamic_cast<const ParamError*>(&e))
    return fail(BSID_ERR_PARAM, e.what());
  if (dynamic_cast<const IoError*>(&e)) return fail(BSID_ERR_IO, e.what());
  return fail(BSID_ERR_INTERNAL, e.what());
}

// Shared try/catch shell of every API function.
template <typename Fn>
bsid_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return from_exception(e);
  } catch (...) {
    return fail(BSID_ERR_INTERNAL, "unknown error");
  }
}

bsid_status copy_string(const std::string& text, char* buf, size_t buflen) {
  if (buf == nullptr || buflen == 0) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "output buffer is null or empty");
  }
  const size_t n = std::min(buflen - 1, text.size());
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';
  return BSID_OK;
}

std::string provenance_or_empty(const char* provenance_json) {
  return provenance_json != nullptr ? std::string(provenance_json)
                                    : std::string();
}

bsid::FitOptions to_ml_options(const bsid_fit_options* o) {
  bsid::FitOptions opts;
  if (o != nullptr) {
    if (o->max_iters > 0) opts.max_iters = o->max_iters;
    if (o->epsilon > 0) opts.epsilon = o->epsilon;
    if (o->step_size > 0) opts.step_size = o->step_size;
    opts.line_search = o->line_search != 0;
    opts.record_trace = o->record_trace != 0;
  }
  return opts;
}

bsid::EmOptions to_em_options(const bsid_fit_options* o) {
  bsid::EmOptions opts;
  if (o != nullptr) {
    if (o->max_iters > 0) opts.max_iters = o->max_iters;
    if (o->epsilon > 0) opts.epsilon = o->epsilon;
    opts.monotonicity_audit = o->monotonicity_audit != 0;
    opts.record_trace = o->record_trace != 0;
  }
  return opts;
}

bsid::SystemParams system_from_json(const json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "example1") return bsid::example1_params();
    if (name == "example2") return bsid::example2_params();
    if (name == "scalar") return bsid::scalar_benchmark_params();
    throw bsid::ParamError("unknown built-in system '" + name + "'");
  }
  return bsid::params_from_json_string(j.dump());
}

}  // namespace

extern "C" {

const char* bsid_last_error(void) { return g_last_error.c_str(); }

const char* bsid_status_name(bsid_status status) {
  switch (status) {
    case BSID_OK: return "ok";
    case BSID_ERR_SHAPE: return "shape";
    case BSID_ERR_COVARIANCE: return "covariance";
    case BSID_ERR_CONDITIONING: return "conditioning";
    case BSID_ERR_EXCITATION: return "excitation";
    case BSID_ERR_CALIBRATION: return "calibration";
    case BSID_ERR_VALIDATION: return "validation";
    case BSID_ERR_OPTIMIZATION: return "optimization";
    case BSID_ERR_PARAM: return "param";
    case BSID_ERR_IO: return "io";
    case BSID_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case BSID_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

bsid_status bsid_params_builtin(const char* name, bsid_params** out) {
  if (name == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const std::string n(name);
    bsid::SystemParams p;
    if (n == "example1") {
      p = bsid::example1_params();
    } else if (n == "example2") {
      p = bsid::example2_params();
    } else if (n == "scalar") {
      p = bsid::scalar_benchmark_params();
    } else {
      return fail(BSID_ERR_PARAM, "unknown built-in system '" + n + "'");
    }
    *out = new bsid_params{std::move(p)};
    return BSID_OK;
  });
}

bsid_status bsid_params_load(const char* path, bsid_params** out) {
  if (path == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new bsid_params{bsid::read_params_json(path)};
    return BSID_OK;
  });
}

bsid_status bsid_params_save(const bsid_params* params, const char* path,
                             const char* provenance_json) {
  if (params == nullptr || path == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    bsid::write_params_json(path, params->value,
                            provenance_or_empty(provenance_json));
    return BSID_OK;
  });
}

bsid_status bsid_params_clone(const bsid_params* params, bsid_params** out) {
  if (params == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out = new bsid_params{params->value};
  return BSID_OK;
}

bsid_status bsid_params_scale(const bsid_params* params, double factor,
                              bsid_params** out) {
  if (params == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new bsid_params{bsid::scale_params(params->value, factor)};
    return BSID_OK;
  });
}

bsid_status bsid_params_perturb(const bsid_params* params, double scale,
                                uint64_t seed, bsid_params** out) {
  if (params == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new bsid_params{bsid::perturb_params(params->value, scale, seed)};
    return BSID_OK;
  });
}

bsid_status bsid_params_dims(const bsid_params* params, int* nx, int* nu,
                             int* ny) {
  if (params == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  if (nx != nullptr) *nx = params->value.dims.nx;
  if (nu != nullptr) *nu = params->value.dims.nu;
  if (ny != nullptr) *ny = params->value.dims.ny;
  return BSID_OK;
}

bsid_status bsid_params_validate(const bsid_params* params, char* buf,
                                 size_t buflen, int* n_violations) {
  if (params == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const std::vector<std::string> report =
        bsid::validate_params(params->value);
    if (n_violations != nullptr) {
      *n_violations = static_cast<int>(report.size());
    }
    std::string text;
    for (const std::string& r : report) {
      if (!text.empty()) text += "\n";
      text += r;
    }
    return copy_string(text, buf, buflen);
  });
}

bsid_status bsid_params_discretize_rc(double r0, double rs, double rp,
                                      double l, double c, double alpha,
                                      double sample_time, bsid_params** out) {
  if (out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    bsid::RcComponents comp{r0, rs, rp, l, c, alpha, sample_time};
    *out = new bsid_params{bsid::discretize_rc(comp)};
    return BSID_OK;
  });
}

void bsid_params_free(bsid_params* params) { delete params; }

bsid_status bsid_signal_binary(int n_steps, int nu, double low, double high,
                               uint64_t seed, bsid_signal** out) {
  if (out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new bsid_signal{bsid::gen_random_binary(n_steps, nu, low, high,
                                                   seed)};
    return BSID_OK;
  });
}

bsid_status bsid_signal_sine(int n_steps, int nu, const double* amplitudes,
                             const double* angular_freqs, double sample_time,
                             bsid_signal** out) {
  if (out == nullptr || amplitudes == nullptr || angular_freqs == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    std::vector<double> amp(amplitudes, amplitudes + nu);
    std::vector<double> freq(angular_freqs, angular_freqs + nu);
    *out = new bsid_signal{
        bsid::gen_sinusoid(n_steps, nu, amp, freq, sample_time)};
    return BSID_OK;
  });
}

bsid_status bsid_signal_multisine(int n_steps, int nu, int n_tones,
                                  const double* amplitudes,
                                  const double* angular_freqs,
                                  double sample_time, bsid_signal** out) {
  if (out == nullptr || amplitudes == nullptr || angular_freqs == nullptr ||
      n_tones < 1) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null or empty argument");
  }
  return guarded([&] {
    std::vector<double> amp(amplitudes, amplitudes + n_tones);
    std::vector<double> freq(angular_freqs, angular_freqs + n_tones);
    *out = new bsid_signal{
        bsid::gen_multisine(n_steps, nu, amp, freq, sample_time)};
    return BSID_OK;
  });
}

void bsid_signal_free(bsid_signal* signal) { delete signal; }

bsid_status bsid_calibrate_snr(const bsid_params* params,
                               const bsid_signal* inputs, double snr_db,
                               uint64_t seed, bsid_params** out) {
  if (params == nullptr || inputs == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const auto noise =
        bsid::calibrate_snr(params->value, inputs->inputs, snr_db, seed);
    bsid::SystemParams p = params->value;
    p.S_w = noise.first;
    p.S_v = noise.second;
    *out = new bsid_params{std::move(p)};
    return BSID_OK;
  });
}

bsid_status bsid_simulate(const bsid_params* params, const bsid_signal* inputs,
                          uint64_t seed, bsid_trajectory** out) {
  if (params == nullptr || inputs == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new bsid_trajectory{
        bsid::simulate(params->value, inputs->inputs, seed)};
    return BSID_OK;
  });
}

bsid_status bsid_trajectory_save_csv(const bsid_trajectory* trajectory,
                                     const char* path, int with_states,
                                     const char* provenance_json) {
  if (trajectory == nullptr || path == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    bsid::write_dataset_csv(path, trajectory->value, with_states != 0,
                            provenance_or_empty(provenance_json));
    return BSID_OK;
  });
}

void bsid_trajectory_free(bsid_trajectory* trajectory) { delete trajectory; }

bsid_status bsid_dataset_load_csv(const char* path, bsid_dataset** out) {
  if (path == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new bsid_dataset{bsid::read_dataset_csv(path)};
    return BSID_OK;
  });
}

bsid_status bsid_dataset_dims(const bsid_dataset* dataset, int* n_steps,
                              int* nu, int* ny) {
  if (dataset == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  if (n_steps != nullptr) *n_steps = dataset->value.length();
  if (nu != nullptr) *nu = dataset->value.dims.nu;
  if (ny != nullptr) *ny = dataset->value.dims.ny;
  return BSID_OK;
}

bsid_status bsid_dataset_check_excitation(const bsid_dataset* dataset,
                                          int* input_ok, int* output_ok) {
  if (dataset == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    if (input_ok != nullptr) {
      *input_ok = bsid::check_input_excitation(dataset->value) ? 1 : 0;
    }
    if (output_ok != nullptr) {
      *output_ok = bsid::check_output_excitation(dataset->value) ? 1 : 0;
    }
    return BSID_OK;
  });
}

void bsid_dataset_free(bsid_dataset* dataset) { delete dataset; }

void bsid_fit_options_init(bsid_fit_options* options) {
  if (options == nullptr) return;
  options->max_iters = 0;
  options->epsilon = 0.0;
  options->step_size = 0.0;
  options->line_search = 1;
  options->monotonicity_audit = 0;
  options->record_trace = 1;
}

bsid_status bsid_fit_ml(const bsid_dataset* dataset, const bsid_params* init,
                        const bsid_fit_options* options, bsid_report** out) {
  if (dataset == nullptr || init == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new bsid_report{
        bsid::fit_ml(dataset->value, init->value, to_ml_options(options))};
    return BSID_OK;
  });
}

bsid_status bsid_fit_em(const bsid_dataset* dataset, const bsid_params* init,
                        const bsid_fit_options* options, bsid_report** out) {
  if (dataset == nullptr || init == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new bsid_report{
        bsid::fit_em(dataset->value, init->value, to_em_options(options))};
    return BSID_OK;
  });
}

bsid_status bsid_report_params(const bsid_report* report, bsid_params** out) {
  if (report == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out = new bsid_params{report->value.params};
  return BSID_OK;
}

bsid_status bsid_report_stats(const bsid_report* report, int* iterations,
                              double* final_cost, double* final_step_norm,
                              double* wall_seconds) {
  if (report == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  if (iterations != nullptr) *iterations = report->value.iterations;
  if (final_cost != nullptr) *final_cost = report->value.final_cost;
  if (final_step_norm != nullptr) {
    *final_step_norm = report->value.final_step_norm;
  }
  if (wall_seconds != nullptr) *wall_seconds = report->value.wall_seconds;
  return BSID_OK;
}

bsid_status bsid_report_termination(const bsid_report* report, char* buf,
                                    size_t buflen) {
  if (report == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return copy_string(report->value.termination, buf, buflen);
}

bsid_status bsid_report_warnings(const bsid_report* report, char* buf,
                                 size_t buflen) {
  if (report == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  std::string text;
  for (const std::string& w : report->value.warnings) {
    if (!text.empty()) text += "\n";
    text += w;
  }
  return copy_string(text, buf, buflen);
}

bsid_status bsid_report_save_trace_csv(const bsid_report* report,
                                       const char* path,
                                       const char* provenance_json) {
  if (report == nullptr || path == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    bsid::write_trace_csv(path, report->value,
                          provenance_or_empty(provenance_json));
    return BSID_OK;
  });
}

void bsid_report_free(bsid_report* report) { delete report; }

bsid_status bsid_validate(const bsid_params* truth, const bsid_params* est,
                          const bsid_signal* val_inputs,
                          bsid_validation_metrics* out) {
  if (truth == nullptr || est == nullptr || val_inputs == nullptr ||
      out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const bsid::OutputErrorResult oe = bsid::normalized_output_error(
        truth->value, est->value, val_inputs->inputs);
    const bsid::ParamErrorResult pe =
        bsid::param_relative_error(truth->value, est->value);
    out->output_error_sum = oe.sum;
    out->output_error_mean = oe.mean;
    out->terms_used = oe.terms_used;
    out->terms_skipped = oe.terms_skipped;
    out->c_error = pe.c_error;
    out->m_error = pe.m_error;
    return BSID_OK;
  });
}

bsid_status bsid_validate_save(const bsid_params* truth,
                               const bsid_params* est,
                               const bsid_signal* val_inputs,
                               const char* metrics_json_path,
                               const char* traj_csv_path,
                               const char* provenance_json) {
  if (truth == nullptr || est == nullptr || val_inputs == nullptr ||
      metrics_json_path == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const bsid::OutputErrorResult oe = bsid::normalized_output_error(
        truth->value, est->value, val_inputs->inputs);
    const bsid::ParamErrorResult pe =
        bsid::param_relative_error(truth->value, est->value);
    bsid::write_validation_outputs(
        metrics_json_path,
        traj_csv_path != nullptr ? traj_csv_path : std::string(),
        truth->value, est->value, val_inputs->inputs, oe, pe,
        provenance_or_empty(provenance_json));
    return BSID_OK;
  });
}

bsid_status bsid_monte_carlo_run(const char* config_json,
                                 bsid_mc_result** out) {
  if (config_json == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    json j;
    try {
      j = json::parse(config_json);
    } catch (const json::exception& e) {
      throw bsid::IoError(std::string("monte carlo config: ") + e.what());
    }
    bsid::McConfig config;
    config.system = j.contains("system") ? system_from_json(j["system"])
                                         : bsid::example1_params();
    config.trials = j.value("trials", 100);
    if (!j.contains("snr_db") || !j.contains("lengths")) {
      throw bsid::ParamError("monte carlo config: snr_db and lengths required");
    }
    config.snr_db_levels = j["snr_db"].get<std::vector<double>>();
    config.dataset_lengths = j["lengths"].get<std::vector<int>>();
    config.validation_length = j.value("validation_length", 100);
    const std::string init = j.value("init", "half-truth");
    if (init == "half-truth") {
      config.init_policy = bsid::InitPolicy::kHalfTruth;
    } else if (init == "random-perturbation") {
      config.init_policy = bsid::InitPolicy::kRandomPerturbation;
    } else {
      throw bsid::ParamError("monte carlo config: unknown init '" + init +
                             "'");
    }
    config.perturbation_scale = j.value("init_scale", 0.5);
    config.seed = j.value("seed", 1ULL);
    config.workers = j.value("workers", 1);
    if (j.contains("max_iters")) {
      config.ml_options.max_iters = j["max_iters"].get<int>();
      config.em_options.max_iters = j["max_iters"].get<int>();
    }
    if (j.contains("epsilon")) {
      config.ml_options.epsilon = j["epsilon"].get<double>();
      config.em_options.epsilon = j["epsilon"].get<double>();
    }
    config.em_options.monotonicity_audit = j.value("audit", false);
    const bsid::Method method =
        bsid::method_from_name(j.value("method", std::string("em")));
    *out = new bsid_mc_result{bsid::run_monte_carlo(config, method)};
    return BSID_OK;
  });
}

bsid_status bsid_mc_result_save(const bsid_mc_result* result,
                                const char* summary_csv_path,
                                const char* trials_csv_path,
                                const char* report_json_path,
                                const char* provenance_json) {
  if (result == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const std::string prov = provenance_or_empty(provenance_json);
    if (summary_csv_path != nullptr) {
      bsid::write_mc_summary_csv(summary_csv_path, result->value, prov);
    }
    if (trials_csv_path != nullptr) {
      bsid::write_mc_trials_csv(trials_csv_path, result->value, prov);
    }
    if (report_json_path != nullptr) {
      bsid::write_mc_report_json(report_json_path, result->value, prov);
    }
    return BSID_OK;
  });
}

void bsid_mc_result_free(bsid_mc_result* result) { delete result; }

bsid_status bsid_bench_run(const char* config_json, bsid_bench_result** out) {
  if (config_json == nullptr || out == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    json j;
    try {
      j = json::parse(config_json);
    } catch (const json::exception& e) {
      throw bsid::IoError(std::string("bench config: ") + e.what());
    }
    if (!j.contains("lengths")) {
      throw bsid::ParamError("bench config: lengths required");
    }
    const bsid::Method method =
        bsid::method_from_name(j.value("method", std::string("ml")));
    const std::vector<int> lengths = j["lengths"].get<std::vector<int>>();
    const int repetitions = j.value("repetitions", 3);
    const int cap = j.value("iteration_cap", 30);
    const std::uint64_t seed = j.value("seed", 1ULL);
    *out = new bsid_bench_result{
        bsid::runtime_benchmark(method, lengths, repetitions, cap, seed)};
    return BSID_OK;
  });
}

bsid_status bsid_bench_result_save(const bsid_bench_result* result,
                                   const char* csv_path,
                                   const char* provenance_json) {
  if (result == nullptr || csv_path == nullptr) {
    return fail(BSID_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    bsid::write_bench_csv(csv_path, result->rows,
                          provenance_or_empty(provenance_json));
    return BSID_OK;
  });
}

void bsid_bench_result_free(bsid_bench_result* result) { delete result; }

}  // extern "C"
