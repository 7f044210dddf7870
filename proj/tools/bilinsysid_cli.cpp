// bilin-sysid — command-line front end of the bilinsysid shared library.
// Talks to the library exclusively through the C API in bilinsysid.h.
//
// Exit codes: 0 success, 1 usage/config error, 2 numerical/estimation
// error, 3 file I/O error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bilinsysid.h"

using nlohmann::json;

namespace {

int exit_code_for(bsid_status status) {
  if (status == BSID_OK) {
    return 0;
  }
  if (status == BSID_ERR_IO) {
    return 3;
  }
  if (status == BSID_ERR_INVALID_ARGUMENT) {
    return 1;
  }
  return 2;
}

[[noreturn]] void die(bsid_status status, const std::string& context) {
  std::fprintf(stderr, "error (%s): %s — %s\n", bsid_status_name(status),
               context.c_str(), bsid_last_error());
  std::exit(exit_code_for(status));
}

void check(bsid_status status, const std::string& context) {
  if (status != BSID_OK) {
    die(status, context);
  }
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  ~Handle() {
    if (ptr != nullptr) {
      Free(ptr);
    }
  }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using ParamsHandle = Handle<bsid_params, bsid_params_free>;
using SignalHandle = Handle<bsid_signal, bsid_signal_free>;
using TrajectoryHandle = Handle<bsid_trajectory, bsid_trajectory_free>;
using DatasetHandle = Handle<bsid_dataset, bsid_dataset_free>;
using ReportHandle = Handle<bsid_report, bsid_report_free>;

// Loads a named built-in or a parameter JSON file.
void load_system(const std::string& spec, ParamsHandle& out) {
  if (spec == "example1" || spec == "example2" || spec == "scalar") {
    check(bsid_params_builtin(spec.c_str(), out.out()), "built-in system");
  } else {
    check(bsid_params_load(spec.c_str(), out.out()), "loading " + spec);
  }
}

struct SignalSpec {
  std::string kind = "binary";  // binary | sine | multisine
  double low = -1.0;
  double high = 1.0;
  std::vector<double> amplitudes{12.0};
  std::vector<double> omegas{2.0 * 3.14159265358979323846 * 1e8};
  double sample_time = 1e-9;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--input", kind, "Input kind: binary, sine or multisine")
        ->check(CLI::IsMember({"binary", "sine", "multisine"}));
    cmd->add_option("--low", low, "Binary input low level");
    cmd->add_option("--high", high, "Binary input high level");
    cmd->add_option("--amplitude", amplitudes,
                    "Sine amplitudes (per channel, or per tone for multisine)");
    cmd->add_option("--omega", omegas, "Angular frequencies [rad/s]");
    cmd->add_option("--sample-time", sample_time, "Sample time [s]");
  }

  void build(int n, int nu, std::uint64_t seed, SignalHandle& out) const {
    if (kind == "binary") {
      check(bsid_signal_binary(n, nu, low, high, seed, out.out()),
            "binary input signal");
      return;
    }
    std::vector<double> amp = amplitudes;
    std::vector<double> om = omegas;
    if (kind == "sine") {
      amp.resize(nu, amp.empty() ? 12.0 : amp.back());
      om.resize(nu, om.empty() ? 1.0 : om.back());
      check(bsid_signal_sine(n, nu, amp.data(), om.data(), sample_time,
                             out.out()),
            "sine input signal");
      return;
    }
    const int tones = static_cast<int>(std::min(amp.size(), om.size()));
    check(bsid_signal_multisine(n, nu, tones, amp.data(), om.data(),
                                sample_time, out.out()),
          "multisine input signal");
  }

  json to_json() const {
    return {{"input", kind},          {"low", low},
            {"high", high},           {"amplitude", amplitudes},
            {"omega", omegas},        {"sample_time", sample_time}};
  }
};

// JSON config files: top-level keys are main options, one object per
// subcommand holds its flags. Flags given on the command line win.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool,
                        std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::FileError(std::string("config JSON parse error: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten({}, j, items);
    return items;
  }

 private:
  static void flatten(const std::vector<std::string>& parents, const json& j,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        std::vector<std::string> next = parents;
        next.push_back(key);
        flatten(next, value, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) {
          item.inputs.push_back(v.is_string() ? v.get<std::string>()
                                              : v.dump());
        }
      } else {
        item.inputs.push_back(value.is_string() ? v_str(value) : value.dump());
      }
      items.push_back(item);
    }
  }
  static std::string v_str(const json& v) { return v.get<std::string>(); }
};

std::string join_csv_list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) {
    if (!s.empty()) {
      s += ",";
    }
    s += std::to_string(x);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "bilin-sysid — simulation, ML/EM identification and evaluation of "
      "linear systems with bilinear observation models"};
  app.require_subcommand(1);
  const auto json_config = std::make_shared<JsonConfig>();
  app.set_config("--config", "",
                 "JSON config file with one object per subcommand "
                 "(flags override it)");
  app.config_formatter(json_config);

  // ---------------- simulate ----------------
  auto* sim = app.add_subcommand("simulate", "Generate a dataset CSV");
  std::string sim_system = "example1";
  int sim_n = 200;
  double sim_snr = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t sim_seed = 1;
  std::string sim_out = "dataset.csv";
  bool sim_with_states = false;
  SignalSpec sim_signal;
  sim->add_option("--system", sim_system,
                  "Built-in name (example1, example2, scalar) or params JSON");
  sim->add_option("--n", sim_n, "Number of time steps")->check(CLI::Range(2, 1 << 24));
  sim->add_option("--snr", sim_snr, "Calibrate noise to this SNR [dB]");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "Output CSV path");
  sim->add_flag("--with-states", sim_with_states,
                "Append state columns x_1..x_nx");
  sim_signal.add_options(sim);

  // ---------------- fit ----------------
  auto* fit = app.add_subcommand("fit", "Identify parameters from a dataset");
  std::string fit_method = "em";
  std::string fit_data;
  std::string fit_init = "half-truth";
  std::string fit_truth;
  std::string fit_init_file;
  double fit_init_scale = 0.5;
  std::uint64_t fit_seed = 1;
  std::string fit_out_prefix = "fit";
  bsid_fit_options fit_opts;
  bsid_fit_options_init(&fit_opts);
  double fit_epsilon = 0.0;
  int fit_max_iters = 0;
  double fit_step = 0.0;
  bool fit_no_line_search = false;
  bool fit_audit = false;
  fit->add_option("--method", fit_method, "ml or em")
      ->check(CLI::IsMember({"ml", "em"}));
  fit->add_option("--data", fit_data, "Dataset CSV")->required();
  fit->add_option("--init", fit_init,
                  "Init policy: half-truth, random or file")
      ->check(CLI::IsMember({"half-truth", "random", "file"}));
  fit->add_option("--truth", fit_truth,
                  "Truth params JSON (half-truth/random policies)");
  fit->add_option("--init-file", fit_init_file, "Explicit init params JSON");
  fit->add_option("--init-scale", fit_init_scale,
                  "Random-perturbation spread");
  fit->add_option("--seed", fit_seed, "Seed for the random init policy");
  fit->add_option("--epsilon", fit_epsilon,
                  "Parameter-change stopping tolerance");
  fit->add_option("--max-iters", fit_max_iters, "Iteration cap");
  fit->add_option("--step-size", fit_step, "ML initial step size");
  fit->add_flag("--no-line-search", fit_no_line_search,
                "Disable ML backtracking line search");
  fit->add_flag("--audit", fit_audit,
                "EM: record the log-likelihood each iteration");
  fit->add_option("--out-prefix", fit_out_prefix,
                  "Prefix for .params.json, .trace.csv and .summary.txt");

  // ---------------- validate ----------------
  auto* val = app.add_subcommand("validate",
                                 "Score an estimate against the truth");
  std::string val_truth;
  std::string val_est;
  int val_t = 100;
  std::uint64_t val_seed = 1;
  std::string val_out = "metrics.json";
  std::string val_traj;
  SignalSpec val_signal;
  val->add_option("--truth", val_truth, "Truth params JSON")->required();
  val->add_option("--est", val_est, "Estimated params JSON")->required();
  val->add_option("--T", val_t, "Validation length")->check(CLI::Range(2, 1 << 24));
  val->add_option("--seed", val_seed, "Validation input seed");
  val->add_option("--out", val_out, "Metrics JSON path");
  val->add_option("--traj-out", val_traj,
                  "Optional CSV with the two output rollouts");
  val_signal.add_options(val);

  // ---------------- montecarlo ----------------
  auto* mc = app.add_subcommand("montecarlo", "Monte-Carlo sweep");
  std::string mc_method = "em";
  std::string mc_system = "example1";
  int mc_trials = 100;
  std::vector<double> mc_snr{20.0};
  std::vector<int> mc_lengths{200};
  int mc_t = 100;
  std::string mc_init = "half-truth";
  double mc_init_scale = 0.5;
  std::uint64_t mc_seed = 1;
  int mc_parallel = 1;
  int mc_max_iters = 0;
  double mc_epsilon = 0.0;
  std::string mc_out_prefix = "mc";
  mc->add_option("--method", mc_method, "ml or em")
      ->check(CLI::IsMember({"ml", "em"}));
  mc->add_option("--system", mc_system, "Built-in name or params JSON");
  mc->add_option("--trials", mc_trials, "Trials per cell");
  mc->add_option("--snr", mc_snr, "SNR levels [dB]")->delimiter(',');
  mc->add_option("--n", mc_lengths, "Dataset lengths")->delimiter(',');
  mc->add_option("--T", mc_t, "Validation length");
  mc->add_option("--init", mc_init, "half-truth or random-perturbation")
      ->check(CLI::IsMember({"half-truth", "random-perturbation"}));
  mc->add_option("--init-scale", mc_init_scale, "Perturbation spread");
  mc->add_option("--seed", mc_seed, "Base seed");
  mc->add_option("--parallel", mc_parallel,
                 "Worker threads (capped by BILIN_SYSID_THREADS)");
  mc->add_option("--max-iters", mc_max_iters, "Fit iteration cap");
  mc->add_option("--epsilon", mc_epsilon, "Fit stopping tolerance");
  mc->add_option("--out-prefix", mc_out_prefix,
                 "Prefix for .summary.csv, .trials.csv and .report.json");

  // ---------------- bench ----------------
  auto* bench = app.add_subcommand("bench", "Runtime benchmark");
  std::string bench_method = "ml";
  std::vector<int> bench_lengths{20, 40, 60, 80};
  int bench_reps = 3;
  int bench_cap = 30;
  std::uint64_t bench_seed = 1;
  std::string bench_out = "bench.csv";
  bench->add_option("--method", bench_method, "ml or em")
      ->check(CLI::IsMember({"ml", "em"}));
  bench->add_option("--lengths", bench_lengths, "Ascending dataset lengths")
      ->delimiter(',');
  bench->add_option("--reps", bench_reps, "Repetitions per length");
  bench->add_option("--iters", bench_cap, "Fixed iteration cap");
  bench->add_option("--seed", bench_seed, "Base seed");
  bench->add_option("--out", bench_out, "Output CSV");

  // ---------------- discretize-rc ----------------
  auto* rc = app.add_subcommand(
      "discretize-rc", "Zero-order-hold discretization of the RC circuit");
  double rc_r0 = 1.0, rc_rs = 0.5, rc_rp = 100.0, rc_l = 2e-8, rc_c = 1e-9,
         rc_alpha = 1.0, rc_h = 1e-9;
  std::string rc_out = "rc_system.json";
  rc->add_option("--r0", rc_r0, "Source series resistance [ohm]");
  rc->add_option("--rs", rc_rs, "Capacitor series resistance [ohm]");
  rc->add_option("--rp", rc_rp, "Leakage resistance [ohm]");
  rc->add_option("--l", rc_l, "Parasitic inductance [H]");
  rc->add_option("--c", rc_c, "Capacitance [F]");
  rc->add_option("--alpha", rc_alpha, "Heat transfer coefficient");
  rc->add_option("--sample-time", rc_h, "Sample time [s]");
  rc->add_option("--out", rc_out, "Output params JSON");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    ParamsHandle system;
    load_system(sim_system, system);
    int nu = 0;
    check(bsid_params_dims(system.get(), nullptr, &nu, nullptr), "dims");
    SignalHandle inputs;
    sim_signal.build(sim_n, nu, sim_seed, inputs);

    ParamsHandle calibrated;
    const bsid_params* generating = system.get();
    if (!std::isnan(sim_snr)) {
      check(bsid_calibrate_snr(system.get(), inputs.get(), sim_snr, sim_seed,
                               calibrated.out()),
            "SNR calibration");
      generating = calibrated.get();
    }

    json prov = {{"command", "simulate"}, {"system", sim_system},
                 {"n", sim_n},            {"seed", sim_seed},
                 {"with_states", sim_with_states}};
    if (!std::isnan(sim_snr)) {
      prov["snr_db"] = sim_snr;
    }
    prov.update(sim_signal.to_json());
    const std::string prov_text = prov.dump();

    TrajectoryHandle traj;
    check(bsid_simulate(generating, inputs.get(), sim_seed, traj.out()),
          "simulation");
    check(bsid_trajectory_save_csv(traj.get(), sim_out.c_str(),
                                   sim_with_states ? 1 : 0, prov_text.c_str()),
          "writing " + sim_out);
    const std::string sidecar = sim_out + ".params.json";
    check(bsid_params_save(generating, sidecar.c_str(), prov_text.c_str()),
          "writing " + sidecar);
    std::printf("wrote %s and %s\n", sim_out.c_str(), sidecar.c_str());
    return 0;
  }

  if (fit->parsed()) {
    DatasetHandle data;
    check(bsid_dataset_load_csv(fit_data.c_str(), data.out()),
          "loading " + fit_data);

    ParamsHandle init;
    if (fit_init == "file") {
      if (fit_init_file.empty()) {
        std::fprintf(stderr, "error: --init file requires --init-file\n");
        return 1;
      }
      check(bsid_params_load(fit_init_file.c_str(), init.out()),
            "loading " + fit_init_file);
    } else {
      if (fit_truth.empty()) {
        std::fprintf(stderr,
                     "error: --init %s requires --truth <params.json>\n",
                     fit_init.c_str());
        return 1;
      }
      ParamsHandle truth;
      check(bsid_params_load(fit_truth.c_str(), truth.out()),
            "loading " + fit_truth);
      if (fit_init == "half-truth") {
        check(bsid_params_scale(truth.get(), 0.5, init.out()), "init");
      } else {
        check(bsid_params_perturb(truth.get(), fit_init_scale, fit_seed,
                                  init.out()),
              "init");
      }
    }

    fit_opts.max_iters = fit_max_iters;
    fit_opts.epsilon = fit_epsilon;
    fit_opts.step_size = fit_step;
    fit_opts.line_search = fit_no_line_search ? 0 : 1;
    fit_opts.monotonicity_audit = fit_audit ? 1 : 0;

    json prov = {{"command", "fit"},
                 {"method", fit_method},
                 {"data", fit_data},
                 {"init", fit_init},
                 {"seed", fit_seed},
                 {"epsilon", fit_epsilon},
                 {"max_iters", fit_max_iters}};
    const std::string prov_text = prov.dump();

    ReportHandle report;
    if (fit_method == "ml") {
      check(bsid_fit_ml(data.get(), init.get(), &fit_opts, report.out()),
            "ML fit");
    } else {
      check(bsid_fit_em(data.get(), init.get(), &fit_opts, report.out()),
            "EM fit");
    }

    ParamsHandle fitted;
    check(bsid_report_params(report.get(), fitted.out()), "report params");
    const std::string params_path = fit_out_prefix + ".params.json";
    const std::string trace_path = fit_out_prefix + ".trace.csv";
    const std::string summary_path = fit_out_prefix + ".summary.txt";
    check(bsid_params_save(fitted.get(), params_path.c_str(),
                           prov_text.c_str()),
          "writing " + params_path);
    check(bsid_report_save_trace_csv(report.get(), trace_path.c_str(),
                                     prov_text.c_str()),
          "writing " + trace_path);

    int iterations = 0;
    double final_cost = 0.0, final_step = 0.0, wall = 0.0;
    char term[64];
    char warnings[1024];
    check(bsid_report_stats(report.get(), &iterations, &final_cost,
                            &final_step, &wall),
          "report stats");
    check(bsid_report_termination(report.get(), term, sizeof(term)),
          "report termination");
    check(bsid_report_warnings(report.get(), warnings, sizeof(warnings)),
          "report warnings");

    std::ofstream summary(summary_path);
    if (!summary) {
      std::fprintf(stderr, "error: cannot write %s\n", summary_path.c_str());
      return 3;
    }
    summary << "method:            " << fit_method << "\n"
            << "dataset:           " << fit_data << "\n"
            << "termination:       " << term << "\n"
            << "iterations:        " << iterations << "\n"
            << "final cost (J):    " << final_cost << "\n"
            << "final |dtheta|:    " << final_step << "\n"
            << "wall seconds:      " << wall << "\n";
    if (warnings[0] != '\0') {
      summary << "warnings:\n" << warnings << "\n";
    }
    std::printf("wrote %s, %s and %s (%s after %d iterations)\n",
                params_path.c_str(), trace_path.c_str(), summary_path.c_str(),
                term, iterations);
    return 0;
  }

  if (val->parsed()) {
    ParamsHandle truth;
    ParamsHandle est;
    check(bsid_params_load(val_truth.c_str(), truth.out()),
          "loading " + val_truth);
    check(bsid_params_load(val_est.c_str(), est.out()), "loading " + val_est);
    int nu = 0;
    check(bsid_params_dims(truth.get(), nullptr, &nu, nullptr), "dims");
    SignalHandle inputs;
    val_signal.build(val_t, nu, val_seed, inputs);

    json prov = {{"command", "validate"}, {"truth", val_truth},
                 {"est", val_est},        {"T", val_t},
                 {"seed", val_seed}};
    prov.update(val_signal.to_json());

    check(bsid_validate_save(truth.get(), est.get(), inputs.get(),
                             val_out.c_str(),
                             val_traj.empty() ? nullptr : val_traj.c_str(),
                             prov.dump().c_str()),
          "validation");
    std::printf("wrote %s%s%s\n", val_out.c_str(),
                val_traj.empty() ? "" : " and ", val_traj.c_str());
    return 0;
  }

  if (mc->parsed()) {
    json config = {{"method", mc_method},
                   {"trials", mc_trials},
                   {"snr_db", mc_snr},
                   {"lengths", mc_lengths},
                   {"validation_length", mc_t},
                   {"init", mc_init},
                   {"init_scale", mc_init_scale},
                   {"seed", mc_seed}};
    if (mc_system == "example1" || mc_system == "example2" ||
        mc_system == "scalar") {
      config["system"] = mc_system;
    } else {
      std::ifstream in(mc_system);
      if (!in) {
        std::fprintf(stderr, "error: cannot read %s\n", mc_system.c_str());
        return 3;
      }
      try {
        config["system"] = json::parse(in);
      } catch (const json::exception& e) {
        std::fprintf(stderr, "error: %s: %s\n", mc_system.c_str(), e.what());
        return 3;
      }
    }
    if (mc_max_iters > 0) {
      config["max_iters"] = mc_max_iters;
    }
    if (mc_epsilon > 0) {
      config["epsilon"] = mc_epsilon;
    }
    // The worker count is an execution detail: it must not appear in the
    // provenance (summaries are byte-identical at any --parallel value).
    const std::string config_text = config.dump();
    config["workers"] = mc_parallel;
    const std::string run_config = config.dump();

    bsid_mc_result* result = nullptr;
    check(bsid_monte_carlo_run(run_config.c_str(), &result), "monte carlo");
    const std::string summary = mc_out_prefix + ".summary.csv";
    const std::string trials = mc_out_prefix + ".trials.csv";
    const std::string report = mc_out_prefix + ".report.json";
    const bsid_status save_status =
        bsid_mc_result_save(result, summary.c_str(), trials.c_str(),
                            report.c_str(), config_text.c_str());
    bsid_mc_result_free(result);
    check(save_status, "writing monte carlo outputs");
    std::printf("wrote %s, %s and %s\n", summary.c_str(), trials.c_str(),
                report.c_str());
    return 0;
  }

  if (bench->parsed()) {
    json config = {{"method", bench_method},
                   {"lengths", bench_lengths},
                   {"repetitions", bench_reps},
                   {"iteration_cap", bench_cap},
                   {"seed", bench_seed}};
    const std::string config_text = config.dump();
    bsid_bench_result* result = nullptr;
    check(bsid_bench_run(config_text.c_str(), &result), "benchmark");
    const bsid_status save_status =
        bsid_bench_result_save(result, bench_out.c_str(), config_text.c_str());
    bsid_bench_result_free(result);
    check(save_status, "writing " + bench_out);
    std::printf("wrote %s\n", bench_out.c_str());
    return 0;
  }

  if (rc->parsed()) {
    ParamsHandle params;
    check(bsid_params_discretize_rc(rc_r0, rc_rs, rc_rp, rc_l, rc_c, rc_alpha,
                                    rc_h, params.out()),
          "discretization");
    json prov = {{"command", "discretize-rc"},
                 {"r0", rc_r0},
                 {"rs", rc_rs},
                 {"rp", rc_rp},
                 {"l", rc_l},
                 {"c", rc_c},
                 {"alpha", rc_alpha},
                 {"sample_time", rc_h}};
    check(bsid_params_save(params.get(), rc_out.c_str(), prov.dump().c_str()),
          "writing " + rc_out);
    std::printf("wrote %s\n", rc_out.c_str());
    return 0;
  }

  return 0;
}
