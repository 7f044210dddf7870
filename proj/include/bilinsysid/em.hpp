#ifndef BILINSYSID_EM_HPP
#define BILINSYSID_EM_HPP

#include <vector>

#include "bilinsysid/ml.hpp"
#include "bilinsysid/types.hpp"

namespace bsid {

/**
 * Kalman filter output. Predicted quantities cover one step past the data:
 * x_pred[t] = xhat_{t|t-1} for t = 0..nD, where x_pred[0] is the prior
 * (mu_x0, S_x0) and x_pred[nD] the one-step-ahead extrapolation. Filtered
 * quantities and gains have length nD. All covariances are symmetrized
 * after every update.
 */
struct FilterResult {
  std::vector<Vector> x_filt;  // xhat_{t|t},   t = 0..nD-1
  std::vector<Matrix> P_filt;  // P_{t|t}
  std::vector<Vector> x_pred;  // xhat_{t|t-1}, t = 0..nD
  std::vector<Matrix> P_pred;  // P_{t|t-1}
  std::vector<Matrix> gains;   // K_t, t = 0..nD-1
};

/**
 * RTS smoother output over t = 0..nD. The boundary state x_nD carries no
 * measurement, so its smoothed moments equal the filter's one-step
 * prediction; smoothed values for t <= nD-1 are unaffected by carrying it.
 * Gains L_t and cross moments E[x_{t+1} x_t^T | y] have length nD.
 * xx_moments[t] - x_smooth[t] x_smooth[t]^T = P_smooth[t] by construction.
 */
struct SmootherResult {
  std::vector<Vector> x_smooth;      // xhat_{t|nD}, t = 0..nD
  std::vector<Matrix> P_smooth;      // P_{t|nD}
  std::vector<Matrix> gains;         // L_t, t = 0..nD-1
  std::vector<Matrix> xx_moments;    // E[x_t x_t^T | y]
  std::vector<Matrix> cross_moments; // E[x_{t+1} x_t^T | y], t = 0..nD-1
};

/**
 * Forward pass: K_t = P_{t|t-1} Xi_t^T (Xi_t P_{t|t-1} Xi_t^T + S_v)^-1,
 * innovation y_t - Xi_t xhat_{t|t-1} - D u_t (the feedthrough is included so
 * the filter matches the observation model when D != 0), covariance update
 * (I - K Xi) P followed by symmetrization. Throws ConditioningError with the
 * time index if an innovation covariance cannot be factorized.
 */
FilterResult kalman_filter(const SystemParams& params, const Dataset& dataset);

/// Backward pass L_t = P_{t|t} A^T P_{t+1|t}^-1 plus the conditional moments
/// used by the M-step.
SmootherResult rts_smooth(const SystemParams& params,
                          const FilterResult& filt);

/**
 * Closed-form M-step. Solves the two Gram systems by factorization and
 * returns the unique stationary point of the EM cost: [A B] and
 * [C_0..C_nu D] from the smoothed cross moments, S_w and S_v as the
 * residual moment averages, mu_x0 = xhat_{0|nD}, S_x0 = P_{0|nD}.
 * Throws ExcitationError when a Gram matrix is numerically singular.
 * Failures of the excitation rank checks are reported through *warnings
 * when given (the update itself may still be well posed).
 */
SystemParams m_step(const SmootherResult& smoother, const Dataset& dataset,
                    std::vector<std::string>* warnings = nullptr);

/**
 * EM cost J_k(theta) = (nD/2) logdet S_v + 1/2 logdet S_x0
 * + (nD/2) logdet S_w + 1/2 tr(S_x0^-1 F_k) + 1/2 tr(S_v^-1 G_k)
 * + 1/2 tr(S_w^-1 H_k), with the expectation kernels F_k, G_k, H_k expanded
 * through the smoothed moments. Equal to -Q(theta | theta_k) up to the
 * constant absorbed in the Gaussian normalizers.
 */
double em_objective(const SystemParams& params, const SmootherResult& smoother,
                    const Dataset& dataset);

/// Gradient of em_objective in all parameter blocks; vanishes at the m_step
/// output. Covariance blocks follow the same symmetrized convention as
/// ml_gradient.
GradientTuple em_objective_gradient(const SystemParams& params,
                                    const SmootherResult& smoother,
                                    const Dataset& dataset);

struct EmOptions {
  int max_iters = 5000;
  double epsilon = 1e-5;  // stop when ||theta_{k+1} - theta_k|| < epsilon
  bool monotonicity_audit = false;  // evaluate log p(y|theta_k) per iteration
  bool record_trace = true;
};

/**
 * EM loop: kalman_filter -> rts_smooth -> m_step until the parameter change
 * drops below epsilon or max_iters is reached. Every iterate is validated;
 * covariances stay positive definite along the run (recursive feasibility).
 * With monotonicity_audit the trace carries log p(y | theta_k, u) computed
 * from ml_cost, a non-decreasing sequence.
 */
EstimationReport fit_em(const Dataset& dataset, const SystemParams& init,
                        const EmOptions& options);

/// Runs fit_em from each init and returns the report with the best final
/// audit log-likelihood (evaluated once per restart).
EstimationReport fit_em_multi(const Dataset& dataset,
                              const std::vector<SystemParams>& inits,
                              const EmOptions& options);

/// Audit value: log p(y | theta, u) = -(ml_cost + nD*ny*log(2*pi)) / 2.
double log_likelihood(const SystemParams& params, const Dataset& dataset);

}  // namespace bsid

#endif  // BILINSYSID_EM_HPP
