#ifndef BILINSYSID_SIMULATE_HPP
#define BILINSYSID_SIMULATE_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "bilinsysid/rng.hpp"
#include "bilinsysid/types.hpp"

namespace bsid {

/// States, inputs and outputs of one simulated run. Columns are time steps;
/// all three have the same number of columns.
struct Trajectory {
  Matrix states;   // nx x nD
  Matrix outputs;  // ny x nD
  Matrix inputs;   // nu x nD
  std::uint64_t seed = 0;

  Dataset dataset() const;
};

/**
 * Simulates the model under seeded Gaussian noise:
 *   x_0 ~ N(mu_x0, S_x0), x_{t+1} = A x_t + B u_t + w_t,
 *   y_t = Xi(u_t) x_t + D u_t + v_t.
 * The noise stream is consumed in the order x_0, w_0, v_0, w_1, v_1, ...
 * Identical (params, inputs, seed) give a bitwise-identical trajectory.
 */
Trajectory simulate(const SystemParams& params, const Matrix& inputs,
                    std::uint64_t seed);

/// Deterministic mean response: all noise suppressed and x_0 = mu_x0.
Trajectory simulate_noise_free(const SystemParams& params,
                               const Matrix& inputs);

/// i.i.d. random binary inputs, each entry low or high with probability 1/2.
Matrix gen_random_binary(int n_steps, int nu, double low, double high,
                         std::uint64_t seed);
inline Matrix gen_random_binary(int n_steps, int nu, std::uint64_t seed) {
  return gen_random_binary(n_steps, nu, -1.0, 1.0, seed);
}

/// One sinusoid per channel: u_{t,i} = amplitudes[i] sin(freqs[i] t h).
Matrix gen_sinusoid(int n_steps, int nu, const std::vector<double>& amplitudes,
                    const std::vector<double>& angular_freqs,
                    double sample_time);

/// Sum of tones, the same set on every channel (validation signals such as
/// 6 sin(w t) + 6 sin(0.3 w t)).
Matrix gen_multisine(int n_steps, int nu, const std::vector<double>& amplitudes,
                     const std::vector<double>& angular_freqs,
                     double sample_time);

/**
 * Calibrates isotropic noise covariances to a target SNR level.
 *
 * The noise-free response ybar of params under inputs defines the signal
 * power (per-component variance, averaged over components). The total
 * additive output-noise budget is Var(ybar) / 10^(snr_db/10), split equally
 * between measurement noise and the output-variance contribution of process
 * noise; the latter is estimated from one seeded noisy rollout. Requested
 * SNR is capped at 300 dB so the returned matrices stay positive definite.
 *
 * Returns (S_w, S_v). Throws CalibrationError when the noise-free output
 * variance is zero.
 */
std::pair<Matrix, Matrix> calibrate_snr(const SystemParams& params,
                                        const Matrix& inputs,
                                        double target_snr_db,
                                        std::uint64_t seed);

}  // namespace bsid

#endif  // BILINSYSID_SIMULATE_HPP
