#ifndef BILINSYSID_MOMENTS_HPP
#define BILINSYSID_MOMENTS_HPP

#include <vector>

#include "bilinsysid/types.hpp"

namespace bsid {

/**
 * Joint Gaussian moments of the stacked state trajectory [x_0; ...; x_{n-1}]
 * given the inputs: mean mu and full covariance cov, stored dense with
 * nx x nx blocks indexed by time.
 */
struct StateMoments {
  int n_states = 0;
  int nx = 0;
  Vector mu;   // n_states*nx
  Matrix cov;  // (n_states*nx) x (n_states*nx), symmetric

  Eigen::Ref<const Vector> mu_block(int t) const {
    return mu.segment(static_cast<Eigen::Index>(t) * nx, nx);
  }
  Eigen::Ref<const Matrix> cov_block(int t, int s) const {
    return cov.block(static_cast<Eigen::Index>(t) * nx,
                     static_cast<Eigen::Index>(s) * nx, nx, nx);
  }
};

/**
 * Builds the stacked state mean and covariance:
 *   mu_t = A^t mu_x0 + sum_{k<t} A^{t-1-k} B u_k
 *   cov_{t,s} = A^t S_x0 (A^s)^T + sum_{k<min(s,t)} A^{t-1-k} S_w (A^{s-1-k})^T
 *
 * n_states defaults to the number of input columns; it may be at most one
 * larger (the one-step-ahead state), which the EM oracle uses.
 */
StateMoments build_state_moments(const SystemParams& params,
                                 const Matrix& inputs, int n_states = 0);

/**
 * Block-diagonal observation operators of the stacked model:
 * Xi = blockdiag(Xi_0 ... Xi_{n-1}), D_block = I (x) D, S_y = I (x) S_v.
 * Only the per-step blocks are stored; dense realizations are built on
 * request (oracle/test use).
 */
struct OutputOperators {
  std::vector<Matrix> Xi;  // n blocks, each ny x nx
  Matrix D;                // ny x nu
  Matrix S_v;              // ny x ny

  int steps() const { return static_cast<int>(Xi.size()); }

  /// Dense blockdiag(Xi_0..Xi_{n-1}), optionally padded with zero columns up
  /// to n_states state blocks (n_states >= steps()).
  Matrix dense_xi(int n_states = 0) const;
  /// Dense I (x) S_v.
  Matrix dense_sy() const;
  /// Stacked output mean Xi x + (I (x) D) u for a stacked state vector.
  Vector output_mean(const Vector& stacked_x, const Matrix& inputs) const;
};

OutputOperators build_output_operators(const SystemParams& params,
                                       const Matrix& inputs);

}  // namespace bsid

#endif  // BILINSYSID_MOMENTS_HPP
