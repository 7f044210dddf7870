#include "bilinsysid/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"

namespace bsid {

Dataset Trajectory::dataset() const {
  Dataset d;
  d.dims.nx = static_cast<int>(states.rows());
  d.dims.nu = static_cast<int>(inputs.rows());
  d.dims.ny = static_cast<int>(outputs.rows());
  d.inputs = inputs;
  d.outputs = outputs;
  return d;
}

namespace {

// Shared rollout; `noisy` selects whether the stream is consumed.
Trajectory roll(const SystemParams& params, const Matrix& inputs,
                std::uint64_t seed, bool noisy) {
  const Dims& d = params.dims;
  if (inputs.rows() != d.nu) {
    throw ShapeError("simulate: input channel count does not match dims");
  }
  const Eigen::Index n = inputs.cols();
  if (n < 1) {
    throw ShapeError("simulate: empty input sequence");
  }

  Trajectory traj;
  traj.states.resize(d.nx, n);
  traj.outputs.resize(d.ny, n);
  traj.inputs = inputs;
  traj.seed = seed;

  RandomStream rng(seed);
  Eigen::LLT<Matrix> llt_w;
  Eigen::LLT<Matrix> llt_v;
  if (noisy) {
    llt_w.compute(params.S_w);
    if (llt_w.info() != Eigen::Success) {
      throw CovarianceError("simulate: S_w is not positive definite");
    }
    llt_v.compute(params.S_v);
    if (llt_v.info() != Eigen::Success) {
      throw CovarianceError("simulate: S_v is not positive definite");
    }
  }

  Vector x = params.mu_x0;
  if (noisy) {
    x = sample_mvn(params.mu_x0, params.S_x0, rng);
  }
  Vector zw(d.nx);
  Vector zv(d.ny);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Vector u = inputs.col(t);
    traj.states.col(t) = x;
    Vector y = xi_at(params, u) * x + params.D * u;
    if (noisy) {
      // Stream order is x0, w0, v0, w1, v1, ...; the final w draw is
      // consumed even though x_n is never emitted.
      rng.normals(zw);
      rng.normals(zv);
      y += llt_v.matrixL() * zv;
      x = params.A * x + params.B * u + llt_w.matrixL() * zw;
    } else if (t + 1 < n) {
      x = params.A * x + params.B * u;
    }
    traj.outputs.col(t) = y;
  }
  return traj;
}

}  // namespace

Trajectory simulate(const SystemParams& params, const Matrix& inputs,
                    std::uint64_t seed) {
  return roll(params, inputs, seed, true);
}

Trajectory simulate_noise_free(const SystemParams& params,
                               const Matrix& inputs) {
  return roll(params, inputs, 0, false);
}

Matrix gen_random_binary(int n_steps, int nu, double low, double high,
                         std::uint64_t seed) {
  if (n_steps < 2) {
    throw ShapeError("gen_random_binary: need at least 2 steps");
  }
  RandomStream rng(seed);
  Matrix u(nu, n_steps);
  for (int t = 0; t < n_steps; ++t) {
    for (int i = 0; i < nu; ++i) {
      u(i, t) = rng.bit() ? high : low;
    }
  }
  return u;
}

Matrix gen_sinusoid(int n_steps, int nu, const std::vector<double>& amplitudes,
                    const std::vector<double>& angular_freqs,
                    double sample_time) {
  if (n_steps < 2) {
    throw ShapeError("gen_sinusoid: need at least 2 steps");
  }
  if (static_cast<int>(amplitudes.size()) != nu ||
      static_cast<int>(angular_freqs.size()) != nu) {
    throw ShapeError("gen_sinusoid: need one amplitude and frequency per channel");
  }
  Matrix u(nu, n_steps);
  for (int t = 0; t < n_steps; ++t) {
    for (int i = 0; i < nu; ++i) {
      u(i, t) = amplitudes[i] * std::sin(angular_freqs[i] * t * sample_time);
    }
  }
  return u;
}

Matrix gen_multisine(int n_steps, int nu, const std::vector<double>& amplitudes,
                     const std::vector<double>& angular_freqs,
                     double sample_time) {
  if (n_steps < 2) {
    throw ShapeError("gen_multisine: need at least 2 steps");
  }
  if (amplitudes.size() != angular_freqs.size() || amplitudes.empty()) {
    throw ShapeError("gen_multisine: need matching tone lists");
  }
  Matrix u = Matrix::Zero(nu, n_steps);
  for (int t = 0; t < n_steps; ++t) {
    double v = 0.0;
    for (std::size_t k = 0; k < amplitudes.size(); ++k) {
      v += amplitudes[k] * std::sin(angular_freqs[k] * t * sample_time);
    }
    u.col(t).setConstant(v);
  }
  return u;
}

namespace {

double per_component_variance(const Matrix& y) {
  // Mean of the per-row variances.
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double m = y.row(i).mean();
    acc += (y.row(i).array() - m).square().mean();
  }
  return acc / static_cast<double>(y.rows());
}

}  // namespace

std::pair<Matrix, Matrix> calibrate_snr(const SystemParams& params,
                                        const Matrix& inputs,
                                        double target_snr_db,
                                        std::uint64_t seed) {
  if (!std::isfinite(target_snr_db)) {
    throw CalibrationError("calibrate_snr: target SNR must be finite");
  }
  require_feasible(params, "calibrate_snr");
  const double snr_db = std::min(target_snr_db, 300.0);

  const Trajectory clean = simulate_noise_free(params, inputs);
  const double signal_var = per_component_variance(clean.outputs);
  if (!(signal_var > 0.0)) {
    throw CalibrationError(
        "calibrate_snr: noise-free output variance is zero (degenerate system)");
  }

  // Total additive budget, split equally between measurement noise and the
  // output-variance contribution of process noise.
  const double budget = signal_var / std::pow(10.0, snr_db / 10.0);
  const double sv2 = 0.5 * budget;
  const double target_proc = 0.5 * budget;

  // One seeded unit-variance process-noise rollout estimates the linear
  // response Var(y - ybar) = c * sigma_w^2.
  SystemParams probe = params;
  probe.S_w = Matrix::Identity(params.dims.nx, params.dims.nx);
  probe.S_v = Matrix::Identity(params.dims.ny, params.dims.ny) * 1e-300;
  probe.S_x0 = Matrix::Identity(params.dims.nx, params.dims.nx) * 1e-300;
  const Trajectory noisy = simulate(probe, inputs, seed);
  const double c = per_component_variance(noisy.outputs - clean.outputs);

  double sw2 = c > 0.0 ? target_proc / c : target_proc;
  // Floor keeps the covariance PD even at the 300 dB cap.
  sw2 = std::max(sw2, 1e-300);
  const double sv2_floored = std::max(sv2, 1e-300);

  return {Matrix::Identity(params.dims.nx, params.dims.nx) * sw2,
          Matrix::Identity(params.dims.ny, params.dims.ny) * sv2_floored};
}

}  // namespace bsid
