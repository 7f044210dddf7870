#ifndef BILINSYSID_ML_HPP
#define BILINSYSID_ML_HPP

#include "bilinsysid/types.hpp"

namespace bsid {

/// One derivative block per parameter field.
struct GradientTuple {
  Matrix dA;
  Matrix dB;
  std::vector<Matrix> dC;  // nu+1 blocks
  Matrix dD;
  Vector dmu_x0;
  Matrix dS_x0;  // symmetrized
  Matrix dS_w;   // symmetrized
  Matrix dS_v;   // symmetrized

  static GradientTuple zero(const Dims& dims);
  double norm() const;
};

/**
 * Maximum-likelihood cost
 *
 *   J = logdet(Xi^T Sy^-1 Xi + Sx^-1) + logdet Sx + logdet Sy
 *       + r^T (Xi Sx Xi^T + Sy)^-1 r,      r = D u - y + Xi mu_x,
 *
 * equal to -2 log p(y | theta, u) - nD*ny*log(2*pi). Evaluated exactly in
 * this four-term form; every inverse is a factorized solve and logdets come
 * from triangular factors. Throws ConditioningError naming the term whose
 * factorization failed.
 */
double ml_cost(const SystemParams& params, const Dataset& dataset);

/**
 * Reference value for ml_cost: -2 log N(y; Xi mu_x + D u, Xi Sx Xi^T + Sy)
 * - nD*ny*log(2*pi) evaluated directly on the dense output Gaussian.
 * Kept as an independent check of ml_cost; not used by the estimator.
 */
double ml_cost_oracle(const SystemParams& params, const Dataset& dataset);

/// Full analytic gradient of ml_cost with respect to every parameter field.
/// Covariance blocks are symmetrized, so for a symmetric perturbation dS the
/// directional derivative is trace(dJ/dS^T dS).
GradientTuple ml_gradient(const SystemParams& params, const Dataset& dataset);

/// Covariance parameterizations usable by the ML optimizer. Only the
/// log-Cholesky form is provided: S = L L^T with log-transformed diagonal,
/// which keeps every iterate strictly positive definite.
enum class CovarianceParameterization { kLogCholesky };

struct FitOptions {
  int max_iters = 5000;
  double step_size = 1e-2;  // initial line-search step
  bool line_search = true;  // Armijo backtracking (c = 1e-4, halving, max 40)
  double epsilon = 1e-6;    // stop when ||theta_{k+1} - theta_k|| < epsilon
  CovarianceParameterization covariance_parameterization =
      CovarianceParameterization::kLogCholesky;
  bool record_trace = true;
};

/**
 * First-order ML fit: gradient descent on J in the log-Cholesky
 * reparameterized space with Armijo backtracking. Stops on the
 * parameter-change criterion or the iteration cap. The recorded cost trace
 * is non-increasing whenever the line search is enabled.
 *
 * A failed input-excitation check only adds a warning to the report.
 * Line-search exhaustion at the first iteration throws OptimizationError.
 */
EstimationReport fit_ml(const Dataset& dataset, const SystemParams& init,
                        const FitOptions& options);

}  // namespace bsid

#endif  // BILINSYSID_ML_HPP
