#include <Eigen/Cholesky>
#include <cmath>

#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"
#include "ml_internal.hpp"

namespace bsid {

double ml_cost(const SystemParams& params, const Dataset& dataset) {
  require_feasible(params, "ml_cost");
  const Dims& d = params.dims;
  const int n = dataset.length();
  const int nx = d.nx;
  const int ny = d.ny;

  const StateMoments mom = build_state_moments(params, dataset.inputs, n);

  Eigen::LLT<Matrix> sx_llt(mom.cov);
  if (sx_llt.info() != Eigen::Success) {
    throw ConditioningError(
        "ml_cost: state covariance Sigma_x is numerically indefinite");
  }
  const double log_det_sx = detail::log_det_from_llt(sx_llt);

  Eigen::LLT<Matrix> sv_llt(params.S_v);
  if (sv_llt.info() != Eigen::Success) {
    throw ConditioningError(
        "ml_cost: measurement covariance Sigma_v is numerically indefinite");
  }
  const double log_det_sy =
      static_cast<double>(n) * detail::log_det_from_llt(sv_llt);

  std::vector<Matrix> xi(n);
  for (int t = 0; t < n; ++t) {
    xi[t] = xi_at(params, dataset.inputs.col(t));
  }

  // Information term Xi^T Sy^-1 Xi + Sx^-1; the first summand is block
  // diagonal, the second a factorized solve against the identity.
  Matrix info = sx_llt.solve(
      Matrix::Identity(mom.cov.rows(), mom.cov.cols()));
  for (int t = 0; t < n; ++t) {
    info.block(t * nx, t * nx, nx, nx) +=
        xi[t].transpose() * sv_llt.solve(xi[t]);
  }
  Eigen::LLT<Matrix> info_llt(symmetrized(info));
  if (info_llt.info() != Eigen::Success) {
    throw ConditioningError(
        "ml_cost: information matrix Xi^T Sy^-1 Xi + Sx^-1 is numerically "
        "indefinite");
  }
  const double log_det_info = detail::log_det_from_llt(info_llt);

  // Residual quadratic form through F = Xi Sx Xi^T + Sy.
  Matrix F(static_cast<Eigen::Index>(n) * ny,
           static_cast<Eigen::Index>(n) * ny);
  for (int t = 0; t < n; ++t) {
    for (int s = 0; s <= t; ++s) {
      const Matrix blk = xi[t] * mom.cov_block(t, s) * xi[s].transpose();
      F.block(t * ny, s * ny, ny, ny) = blk;
      if (s != t) {
        F.block(s * ny, t * ny, ny, ny) = blk.transpose();
      }
    }
    F.block(t * ny, t * ny, ny, ny) += params.S_v;
  }
  Eigen::LLT<Matrix> f_llt(F);
  if (f_llt.info() != Eigen::Success) {
    throw ConditioningError(
        "ml_cost: output covariance Xi Sigma_x Xi^T + Sigma_y is numerically "
        "indefinite");
  }
  Vector r(static_cast<Eigen::Index>(n) * ny);
  for (int t = 0; t < n; ++t) {
    r.segment(t * ny, ny) = params.D * dataset.inputs.col(t) -
                            dataset.outputs.col(t) +
                            xi[t] * mom.mu_block(t);
  }
  const double quad = r.dot(f_llt.solve(r));

  return log_det_info + log_det_sx + log_det_sy + quad;
}

double ml_cost_oracle(const SystemParams& params, const Dataset& dataset) {
  require_feasible(params, "ml_cost_oracle");
  const int n = dataset.length();
  const int ny = params.dims.ny;

  const StateMoments mom = build_state_moments(params, dataset.inputs, n);
  const OutputOperators ops = build_output_operators(params, dataset.inputs);

  // Dense output Gaussian N(Xi mu_x + D u, Xi Sx Xi^T + Sy), evaluated
  // directly: -2 log N(y; .) - nD*ny*log(2 pi).
  const Matrix xi_dense = ops.dense_xi();
  const Matrix cov =
      xi_dense * mom.cov * xi_dense.transpose() + ops.dense_sy();
  const Vector mean = ops.output_mean(mom.mu, dataset.inputs);

  Vector y(static_cast<Eigen::Index>(n) * ny);
  for (int t = 0; t < n; ++t) {
    y.segment(t * ny, ny) = dataset.outputs.col(t);
  }

  Eigen::LDLT<Matrix> ldlt(cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw ConditioningError(
        "ml_cost_oracle: output covariance is numerically indefinite");
  }
  const double log_det = ldlt.vectorD().array().log().sum();
  const Vector diff = y - mean;
  return log_det + diff.dot(ldlt.solve(diff));
}

}  // namespace bsid
