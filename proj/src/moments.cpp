#include "bilinsysid/moments.hpp"

#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"

namespace bsid {

StateMoments build_state_moments(const SystemParams& params,
                                 const Matrix& inputs, int n_states) {
  const Dims& d = params.dims;
  if (inputs.rows() != d.nu) {
    throw ShapeError("build_state_moments: input channel count mismatch");
  }
  const int n_in = static_cast<int>(inputs.cols());
  if (n_states <= 0) {
    n_states = n_in;
  }
  if (n_states > n_in + 1) {
    throw ShapeError("build_state_moments: not enough inputs for n_states");
  }

  StateMoments m;
  m.n_states = n_states;
  m.nx = d.nx;
  m.mu.resize(static_cast<Eigen::Index>(n_states) * d.nx);
  m.cov.resize(static_cast<Eigen::Index>(n_states) * d.nx,
               static_cast<Eigen::Index>(n_states) * d.nx);

  // Mean recursion mu_{t+1} = A mu_t + B u_t reproduces the power series
  // A^t mu_x0 + sum_k A^{t-1-k} B u_k.
  Vector mu_t = params.mu_x0;
  for (int t = 0; t < n_states; ++t) {
    m.mu.segment(static_cast<Eigen::Index>(t) * d.nx, d.nx) = mu_t;
    if (t + 1 < n_states) {
      mu_t = params.A * mu_t + params.B * inputs.col(t);
    }
  }

  // Diagonal blocks by S_{t+1,t+1} = A S_{t,t} A^T + S_w; off-diagonals from
  // S_{t,s} = A^{t-s} S_{s,s} for t > s.
  auto block = [&](int t, int s) {
    return m.cov.block(static_cast<Eigen::Index>(t) * d.nx,
                       static_cast<Eigen::Index>(s) * d.nx, d.nx, d.nx);
  };
  Matrix diag = params.S_x0;
  Matrix off(d.nx, d.nx);
  Matrix tmp(d.nx, d.nx);
  for (int s = 0; s < n_states; ++s) {
    block(s, s) = diag;
    off = diag;
    for (int t = s + 1; t < n_states; ++t) {
      tmp.noalias() = params.A * off;
      off.swap(tmp);
      block(t, s) = off;
      block(s, t) = off.transpose();
    }
    if (s + 1 < n_states) {
      tmp.noalias() = params.A * diag;
      diag.noalias() = tmp * params.A.transpose();
      diag += params.S_w;
      diag = symmetrized(diag);
    }
  }
  return m;
}

OutputOperators build_output_operators(const SystemParams& params,
                                       const Matrix& inputs) {
  OutputOperators ops;
  const int n = static_cast<int>(inputs.cols());
  ops.Xi.reserve(n);
  for (int t = 0; t < n; ++t) {
    ops.Xi.push_back(xi_at(params, inputs.col(t)));
  }
  ops.D = params.D;
  ops.S_v = params.S_v;
  return ops;
}

Matrix OutputOperators::dense_xi(int n_states) const {
  const int n = steps();
  if (n_states <= 0) {
    n_states = n;
  }
  const Eigen::Index ny = D.rows();
  const Eigen::Index nx = n > 0 ? Xi[0].cols() : 0;
  Matrix dense = Matrix::Zero(static_cast<Eigen::Index>(n) * ny,
                              static_cast<Eigen::Index>(n_states) * nx);
  for (int t = 0; t < n; ++t) {
    dense.block(t * ny, t * nx, ny, nx) = Xi[t];
  }
  return dense;
}

Matrix OutputOperators::dense_sy() const {
  const int n = steps();
  const Eigen::Index ny = S_v.rows();
  Matrix dense = Matrix::Zero(static_cast<Eigen::Index>(n) * ny,
                              static_cast<Eigen::Index>(n) * ny);
  for (int t = 0; t < n; ++t) {
    dense.block(t * ny, t * ny, ny, ny) = S_v;
  }
  return dense;
}

Vector OutputOperators::output_mean(const Vector& stacked_x,
                                    const Matrix& inputs) const {
  const int n = steps();
  const Eigen::Index ny = D.rows();
  const Eigen::Index nx = n > 0 ? Xi[0].cols() : 0;
  Vector mean(static_cast<Eigen::Index>(n) * ny);
  for (int t = 0; t < n; ++t) {
    mean.segment(t * ny, ny) =
        Xi[t] * stacked_x.segment(t * nx, nx) + D * inputs.col(t);
  }
  return mean;
}

}  // namespace bsid
