#ifndef BILINSYSID_SRC_ML_INTERNAL_HPP
#define BILINSYSID_SRC_ML_INTERNAL_HPP

#include "bilinsysid/ml.hpp"
#include "bilinsysid/moments.hpp"

namespace bsid::detail {

/**
 * Shared pieces of one ML cost/gradient evaluation: the stacked state
 * moments, per-step observation matrices, the dense marginal output
 * covariance F = Xi Sx Xi^T + I (x) S_v (factorized) and the residual
 * r = D u - y + Xi mu_x.
 */
struct MarginalEvaluation {
  StateMoments moments;
  std::vector<Matrix> Xi;
  Matrix F;           // nD*ny square
  Eigen::LLT<Matrix> F_llt;
  Vector r;           // nD*ny
  Vector alpha;       // F^-1 r
  double log_det_F = 0.0;
  double cost = 0.0;  // log det F + r^T F^-1 r == ml_cost value
};

/// Builds the marginal evaluation. Throws ConditioningError when F cannot be
/// factorized.
MarginalEvaluation evaluate_marginal(const SystemParams& params,
                                     const Dataset& dataset);

/// Cheap evaluation of the ML cost through the marginal form; equal to
/// ml_cost up to roundoff. Used inside the optimizer's line search.
double marginal_cost(const SystemParams& params, const Dataset& dataset);

/// Marginal cost plus the full analytic gradient.
double cost_and_gradient(const SystemParams& params, const Dataset& dataset,
                         GradientTuple& grad);

double log_det_from_llt(const Eigen::LLT<Matrix>& llt);

}  // namespace bsid::detail

#endif  // BILINSYSID_SRC_ML_INTERNAL_HPP
