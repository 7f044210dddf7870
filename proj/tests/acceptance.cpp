// Acceptance suite: exercises every contract criterion end to end and
// prints one PASS/FAIL line per criterion. Exits nonzero when any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "bilinsysid/builtin.hpp"
#include "bilinsysid/em.hpp"
#include "bilinsysid/errors.hpp"
#include "bilinsysid/io.hpp"
#include "bilinsysid/metrics.hpp"
#include "bilinsysid/ml.hpp"
#include "bilinsysid/model.hpp"
#include "bilinsysid/montecarlo.hpp"
#include "bilinsysid/simulate.hpp"
#include "support.hpp"

using namespace bsid;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

Dims random_dims(RandomStream& rng, int max_dim) {
  return {1 + static_cast<int>(rng.uniform() * max_dim),
          1 + static_cast<int>(rng.uniform() * max_dim),
          1 + static_cast<int>(rng.uniform() * max_dim)};
}

SystemParams half_truth(const SystemParams& p) {
  SystemParams init = p;
  init.A *= 0.5;
  init.B *= 0.5;
  for (Matrix& c : init.C) {
    c *= 0.5;
  }
  init.D *= 0.5;
  init.mu_x0 *= 0.5;
  init.S_x0 *= 0.5;
  init.S_w *= 0.5;
  init.S_v *= 0.5;
  return init;
}

SystemParams calibrated_example1(const Matrix& inputs, double snr_db,
                                 std::uint64_t seed) {
  SystemParams p = example1_params();
  const auto noise = calibrate_snr(p, inputs, snr_db, seed);
  p.S_w = noise.first;
  p.S_v = noise.second;
  return p;
}

// 1. ML cost / oracle equivalence on 100 random feasible instances.
Criterion criterion_cost_oracle() {
  Criterion c{"1 ml_cost/oracle equivalence (100 instances, tol 1e-8)"};
  const double t0 = now_seconds();
  RandomStream rng(20240601);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const SystemParams p = test::random_params(random_dims(rng, 3), rng);
    const int n = 2 + static_cast<int>(rng.uniform() * 9);
    const Dataset d = test::random_dataset(p, n, rng);
    const double j = ml_cost(p, d);
    const double j_ref = ml_cost_oracle(p, d);
    worst = std::max(worst, std::abs(j - j_ref) / (1.0 + std::abs(j)));
  }
  const double elapsed = now_seconds() - t0;
  c.pass = worst <= 1e-8 && elapsed < 10.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max rel dev %.3e, %.2f s", worst, elapsed);
  c.detail = buf;
  return c;
}

// 2. Gradient vs central finite differences.
Criterion criterion_gradient() {
  Criterion c{"2 ml_gradient vs finite differences (20 instances, tol 1e-5)"};
  const double t0 = now_seconds();
  RandomStream rng(20240602);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Dims dims = random_dims(rng, 2);
    const SystemParams p = test::random_params(dims, rng);
    const int n = 3 + static_cast<int>(rng.uniform() * 6);
    const Dataset d = test::random_dataset(p, n, rng);
    const GradientTuple an = ml_gradient(p, d);
    const GradientTuple fd = test::fd_gradient(
        [&](const SystemParams& q) { return ml_cost_oracle(q, d); }, p);
    auto upd = [&](const Matrix& a, const Matrix& f) {
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a(i) - f(i)) /
                                    (1.0 + std::abs(f(i))));
      }
    };
    upd(an.dA, fd.dA);
    upd(an.dB, fd.dB);
    for (std::size_t i = 0; i < an.dC.size(); ++i) {
      upd(an.dC[i], fd.dC[i]);
    }
    upd(an.dD, fd.dD);
    upd(an.dmu_x0, fd.dmu_x0);
    upd(an.dS_x0, fd.dS_x0);
    upd(an.dS_w, fd.dS_w);
    upd(an.dS_v, fd.dS_v);
  }
  const double elapsed = now_seconds() - t0;
  c.pass = worst <= 1e-5 && elapsed < 60.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max rel dev %.3e, %.2f s", worst, elapsed);
  c.detail = buf;
  return c;
}

// 3. Filter/smoother vs dense joint-Gaussian conditioning.
Criterion criterion_smoother_oracle() {
  Criterion c{"3 filter/smoother vs dense conditioning (nD<=6, tol 1e-8)"};
  const double t0 = now_seconds();
  RandomStream rng(20240603);
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const Dims dims{1 + static_cast<int>(rng.uniform() * 3),
                    1 + static_cast<int>(rng.uniform() * 2),
                    1 + static_cast<int>(rng.uniform() * 3)};
    const SystemParams p = test::random_params(dims, rng);
    const int n = 2 + static_cast<int>(rng.uniform() * 5);
    const Dataset d = test::random_dataset(p, n, rng);
    const FilterResult f = kalman_filter(p, d);
    const SmootherResult s = rts_smooth(p, f);
    const test::JointGaussianOracle oracle(p, d, n + 1);
    for (int t = 0; t < n; ++t) {
      const auto post = oracle.condition_on_prefix(t + 1);
      worst = std::max(
          worst, (f.x_filt[t] - post.first.segment(t * dims.nx, dims.nx))
                     .cwiseAbs()
                     .maxCoeff());
      worst = std::max(worst, (f.P_filt[t] - post.second.block(
                                                 t * dims.nx, t * dims.nx,
                                                 dims.nx, dims.nx))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    const auto post = oracle.condition_on_prefix(n);
    for (int t = 0; t <= n; ++t) {
      worst = std::max(
          worst, (s.x_smooth[t] - post.first.segment(t * dims.nx, dims.nx))
                     .cwiseAbs()
                     .maxCoeff());
      worst = std::max(worst, (s.P_smooth[t] - post.second.block(
                                                   t * dims.nx, t * dims.nx,
                                                   dims.nx, dims.nx))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  }
  const double elapsed = now_seconds() - t0;
  c.pass = worst <= 1e-8 && elapsed < 10.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max abs dev %.3e, %.2f s", worst, elapsed);
  c.detail = buf;
  return c;
}

// 4. M-step stationarity and optimality.
Criterion criterion_mstep() {
  Criterion c{"4 m_step stationarity (<1e-6 rel) and optimality (100 probes)"};
  RandomStream rng(20240604);
  double worst_grad = 0.0;
  bool optimal = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Dims dims{1 + static_cast<int>(rng.uniform() * 2), 1,
                    1 + static_cast<int>(rng.uniform() * 2)};
    const SystemParams p = test::random_params(dims, rng);
    const Dataset d = test::random_dataset(p, 25, rng);
    const SmootherResult s = rts_smooth(p, kalman_filter(p, d));
    const SystemParams next = m_step(s, d);
    const GradientTuple g = em_objective_gradient(next, s, d);
    worst_grad =
        std::max(worst_grad, g.norm() / (1.0 + param_norm(next)));
    const double j_star = em_objective(next, s, d);
    for (int probe = 0; probe < 100; ++probe) {
      SystemParams q = next;
      q.A += test::random_matrix(dims.nx, dims.nx, rng, 0.3);
      q.B += test::random_matrix(dims.nx, dims.nu, rng, 0.3);
      for (Matrix& cm : q.C) {
        cm += test::random_matrix(dims.ny, dims.nx, rng, 0.3);
      }
      q.D += test::random_matrix(dims.ny, dims.nu, rng, 0.3);
      q.mu_x0 += test::random_matrix(dims.nx, 1, rng, 0.3);
      q.S_x0 = symmetrized(q.S_x0 * rng.uniform(0.4, 2.5));
      q.S_w = symmetrized(q.S_w * rng.uniform(0.4, 2.5));
      q.S_v = symmetrized(q.S_v * rng.uniform(0.4, 2.5));
      if (em_objective(q, s, d) < j_star - 1e-9 * (1.0 + std::abs(j_star))) {
        optimal = false;
      }
    }
  }
  c.pass = worst_grad < 1e-6 && optimal;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max rel grad %.3e, optimality %s",
                worst_grad, optimal ? "held" : "violated");
  c.detail = buf;
  return c;
}

// 5. Recursive feasibility over 50 seeded EM runs.
Criterion criterion_feasibility() {
  Criterion c{"5 recursive feasibility (50 EM runs, nD=200, 10 dB)"};
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix inputs =
        gen_random_binary(200, 1, -1.0, 1.0, derive_seed(seed, 1));
    const SystemParams truth =
        calibrated_example1(inputs, 10.0, derive_seed(seed, 2));
    const Dataset d = simulate(truth, inputs, derive_seed(seed, 3)).dataset();
    EmOptions opts;
    opts.max_iters = 300;
    const EstimationReport rep = fit_em(d, half_truth(truth), opts);
    for (const IterationRecord& r : rep.trace) {
      min_eig = std::min(min_eig, r.min_cov_eigenvalue);
    }
  }
  c.pass = min_eig > 0.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "min covariance eigenvalue %.3e", min_eig);
  c.detail = buf;
  return c;
}

// 6. EM monotonicity under the log-likelihood audit.
Criterion criterion_monotonicity() {
  Criterion c{"6 EM monotone audit (20 runs x >=50 iters, slack 1e-9)"};
  double worst_drop = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix inputs =
        gen_random_binary(80, 1, -1.0, 1.0, derive_seed(seed, 11));
    const SystemParams truth =
        calibrated_example1(inputs, 15.0, derive_seed(seed, 12));
    const Dataset d =
        simulate(truth, inputs, derive_seed(seed, 13)).dataset();
    EmOptions opts;
    opts.max_iters = 55;
    opts.epsilon = 0.0;
    opts.monotonicity_audit = true;
    const EstimationReport rep = fit_em(d, half_truth(truth), opts);
    for (std::size_t i = 1; i < rep.trace.size(); ++i) {
      worst_drop = std::max(worst_drop, rep.trace[i - 1].log_likelihood -
                                            rep.trace[i].log_likelihood);
    }
  }
  c.pass = worst_drop <= 1e-9;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "largest decrease %.3e", worst_drop);
  c.detail = buf;
  return c;
}

// 7. Paper-number bands.
Criterion criterion_paper_bands() {
  Criterion c{"7 paper bands (EM nD=1000 error, SNR/nD trends, ML<=EM)"};
  std::string detail;

  // (a) EM, Example 1, nD=1000, 20 dB, half-truth init, 100 seeds.
  int good = 0;
  {
    McConfig cfg;
    cfg.system = example1_params();
    cfg.trials = 100;
    cfg.snr_db_levels = {20.0};
    cfg.dataset_lengths = {1000};
    cfg.validation_length = 100;
    cfg.seed = 7001;
    cfg.workers = 4;
    const McSummary sum = run_monte_carlo(cfg, Method::kEm);
    for (const TrialRecord& r : sum.records) {
      if (r.ok && r.output_error_mean <= 0.15) {
        ++good;
      }
    }
  }
  const bool band_a = good >= 70;
  detail += "nD=1000 errors<=0.15: " + std::to_string(good) + "/100";

  // (b) Monotone trends across SNR levels and dataset lengths.
  McConfig cfg;
  cfg.system = example1_params();
  cfg.trials = 40;
  cfg.snr_db_levels = {5.0, 10.0, 15.0, 20.0};
  cfg.dataset_lengths = {100, 200};
  cfg.validation_length = 100;
  cfg.seed = 7002;
  cfg.workers = 4;
  const McSummary em_sum = run_monte_carlo(cfg, Method::kEm);
  auto median_cell = [&](const McSummary& s, double snr, int n_d) {
    for (const McCell& cell : s.cells) {
      if (cell.snr_db == snr && cell.n_d == n_d &&
          cell.metric == "output_error_mean") {
        return cell.median;
      }
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  bool snr_trend = true;
  for (std::size_t i = 1; i < cfg.snr_db_levels.size(); ++i) {
    if (!(median_cell(em_sum, cfg.snr_db_levels[i], 200) <
          median_cell(em_sum, cfg.snr_db_levels[i - 1], 200))) {
      snr_trend = false;
    }
  }
  const bool length_trend =
      median_cell(em_sum, 20.0, 200) <= median_cell(em_sum, 20.0, 100);
  detail += snr_trend ? ", SNR trend ok" : ", SNR trend violated";
  detail += length_trend ? ", length trend ok" : ", length trend violated";

  // (c) ML vs EM at matched nD=200 and SNR. The 5 dB cell is used: the gap
  // between the methods is widest at low SNR.
  McConfig ml_cfg;
  ml_cfg.system = example1_params();
  ml_cfg.trials = 9;
  ml_cfg.snr_db_levels = {5.0};
  ml_cfg.dataset_lengths = {200};
  ml_cfg.validation_length = 100;
  ml_cfg.seed = 7003;
  ml_cfg.workers = 4;
  ml_cfg.ml_options.max_iters = 2000;
  ml_cfg.ml_options.epsilon = 1e-6;
  const McSummary ml_sum = run_monte_carlo(ml_cfg, Method::kMl);
  const McSummary em_match = run_monte_carlo(ml_cfg, Method::kEm);
  const double ml_median = median_cell(ml_sum, 5.0, 200);
  const double em_median = median_cell(em_match, 5.0, 200);
  const bool ml_beats = ml_median <= em_median;
  char buf[96];
  std::snprintf(buf, sizeof(buf), ", ML median %.4f vs EM %.4f", ml_median,
                em_median);
  detail += buf;

  c.pass = band_a && snr_trend && length_trend && ml_beats;
  c.detail = detail;
  return c;
}

// 8. Runtime signatures.
Criterion criterion_runtime() {
  Criterion c{"8 runtime signatures (ML t(80)/t(40) >= 4; EM nD=1000 < 5 min)"};
  const std::vector<BenchRow> rows =
      runtime_benchmark(Method::kMl, {40, 80}, 7, 25, 42);
  const double ratio = rows[1].mean_seconds / rows[0].mean_seconds;

  const Matrix inputs = gen_random_binary(1000, 1, -1.0, 1.0, 4242);
  const SystemParams truth = calibrated_example1(inputs, 20.0, 4243);
  const Dataset d = simulate(truth, inputs, 4244).dataset();
  const double t0 = now_seconds();
  EmOptions opts;
  const EstimationReport rep = fit_em(d, half_truth(truth), opts);
  const double em_seconds = now_seconds() - t0;

  c.pass = ratio >= 4.0 && em_seconds < 300.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "ML ratio %.2f (t40 %.4fs, t80 %.4fs); EM fit %.1fs in %d "
                "iters",
                ratio, rows[0].mean_seconds, rows[1].mean_seconds, em_seconds,
                rep.iterations);
  c.detail = buf;
  return c;
}

// 9. Deterministic summaries, also under parallel execution.
Criterion criterion_determinism() {
  Criterion c{"9 byte-identical Monte-Carlo summaries (incl. 4 workers)"};
  McConfig cfg;
  cfg.system = example1_params();
  cfg.trials = 4;
  cfg.snr_db_levels = {15.0};
  cfg.dataset_lengths = {80};
  cfg.validation_length = 50;
  cfg.seed = 99;
  cfg.em_options.max_iters = 120;
  cfg.workers = 1;
  const std::string a = mc_summary_csv_string(run_monte_carlo(cfg, Method::kEm));
  const std::string b = mc_summary_csv_string(run_monte_carlo(cfg, Method::kEm));
  cfg.workers = 4;
  const std::string par =
      mc_summary_csv_string(run_monte_carlo(cfg, Method::kEm));
  c.pass = (a == b) && (a == par);
  c.detail = c.pass ? "identical" : "summaries differ";
  return c;
}

}  // namespace

int main() {
  std::vector<Criterion> results;
  results.push_back(criterion_cost_oracle());
  results.push_back(criterion_gradient());
  results.push_back(criterion_smoother_oracle());
  results.push_back(criterion_mstep());
  results.push_back(criterion_feasibility());
  results.push_back(criterion_monotonicity());
  results.push_back(criterion_paper_bands());
  results.push_back(criterion_runtime());
  results.push_back(criterion_determinism());

  int failures = 0;
  for (const Criterion& c : results) {
    std::printf("[%s] criterion %s — %s\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.detail.c_str());
    if (!c.pass) {
      ++failures;
    }
  }
  std::printf("%d/%zu acceptance criteria passed\n",
              static_cast<int>(results.size()) - failures, results.size());
  return failures == 0 ? 0 : 1;
}
