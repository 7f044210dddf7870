#ifndef BILINSYSID_TESTS_SUPPORT_HPP
#define BILINSYSID_TESTS_SUPPORT_HPP

// Test-only oracles and random instance generators. Everything here is kept
// independent of the library code paths it checks: brute-force rank, dense
// Gaussian conditioning, central finite differences.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "bilinsysid/ml.hpp"
#include "bilinsysid/moments.hpp"
#include "bilinsysid/rng.hpp"
#include "bilinsysid/simulate.hpp"
#include "bilinsysid/types.hpp"

namespace bsid::test {

inline Matrix random_matrix(int rows, int cols, RandomStream& rng,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      m(i, j) = scale * rng.normal();
    }
  }
  return m;
}

/// Random SPD matrix with eigenvalues uniform in [lo, hi].
inline Matrix random_spd(int n, RandomStream& rng, double lo = 0.3,
                         double hi = 1.5) {
  const Matrix g = random_matrix(n, n, rng);
  const Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ();
  Vector eig(n);
  for (int i = 0; i < n; ++i) {
    eig[i] = rng.uniform(lo, hi);
  }
  return symmetrized(q * eig.asDiagonal() * q.transpose());
}

/// Random feasible parameter set with a stable A (spectral radius ~0.7).
inline SystemParams random_params(const Dims& dims, RandomStream& rng) {
  SystemParams p = SystemParams::zero(dims);
  p.A = random_matrix(dims.nx, dims.nx, rng);
  const double radius = p.A.eigenvalues().cwiseAbs().maxCoeff();
  if (radius > 1e-12) {
    p.A *= 0.7 * rng.uniform(0.5, 1.0) / radius;
  }
  p.B = random_matrix(dims.nx, dims.nu, rng, 0.7);
  for (int i = 0; i <= dims.nu; ++i) {
    p.C[i] = random_matrix(dims.ny, dims.nx, rng, 0.7);
  }
  p.D = random_matrix(dims.ny, dims.nu, rng, 0.5);
  p.mu_x0 = random_matrix(dims.nx, 1, rng);
  p.S_x0 = random_spd(dims.nx, rng);
  p.S_w = random_spd(dims.nx, rng);
  p.S_v = random_spd(dims.ny, rng);
  return p;
}

/// Simulated dataset under the given parameters with binary inputs.
inline Dataset random_dataset(const SystemParams& params, int n,
                              RandomStream& rng) {
  const Matrix inputs =
      gen_random_binary(n, params.dims.nu, -1.0, 1.0, rng.next_u64());
  return simulate(params, inputs, rng.next_u64()).dataset();
}

/// Exact row rank over the rationals is approximated by Gaussian elimination
/// with full pivoting at a fixed absolute threshold; independent of the
/// SVD-based library rank test.
inline int brute_force_rank(Matrix m, double tol = 1e-9) {
  int rank = 0;
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  int row = 0;
  for (int col = 0; col < cols && row < rows; ++col) {
    int pivot = -1;
    double best = tol;
    for (int r = row; r < rows; ++r) {
      if (std::abs(m(r, col)) > best) {
        best = std::abs(m(r, col));
        pivot = r;
      }
    }
    if (pivot < 0) {
      continue;
    }
    m.row(pivot).swap(m.row(row));
    for (int r = row + 1; r < rows; ++r) {
      m.row(r) -= m(r, col) / m(row, col) * m.row(row);
    }
    ++row;
    ++rank;
  }
  return rank;
}

/**
 * Central finite differences of a scalar function of the parameters, in the
 * same convention as ml_gradient: covariance entries are perturbed in
 * symmetric pairs, and the reported off-diagonal entry is half the pair
 * directional derivative.
 */
inline GradientTuple fd_gradient(
    const std::function<double(const SystemParams&)>& f,
    const SystemParams& params, double h_scale = 1e-6) {
  GradientTuple g = GradientTuple::zero(params.dims);

  auto diff_entry = [&](SystemParams& copy, double* entry, double base) {
    const double h = h_scale * (1.0 + std::abs(base));
    *entry = base + h;
    const double fp = f(copy);
    *entry = base - h;
    const double fm = f(copy);
    *entry = base;
    return (fp - fm) / (2.0 * h);
  };

  auto diff_matrix = [&](SystemParams& copy, Matrix& m, Matrix& out) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out(i, j) = diff_entry(copy, &m(i, j), m(i, j));
      }
    }
  };

  auto diff_sym = [&](SystemParams& copy, Matrix& m, Matrix& out) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double base = m(i, j);
        const double h = h_scale * (1.0 + std::abs(base));
        m(i, j) = base + h;
        m(j, i) = base + h;
        const double fp = f(copy);
        m(i, j) = base - h;
        m(j, i) = base - h;
        const double fm = f(copy);
        m(i, j) = base;
        m(j, i) = base;
        const double dir = (fp - fm) / (2.0 * h);
        if (i == j) {
          out(i, i) = dir;
        } else {
          out(i, j) = 0.5 * dir;
          out(j, i) = 0.5 * dir;
        }
      }
    }
  };

  SystemParams copy = params;
  diff_matrix(copy, copy.A, g.dA);
  diff_matrix(copy, copy.B, g.dB);
  for (std::size_t i = 0; i < copy.C.size(); ++i) {
    diff_matrix(copy, copy.C[i], g.dC[i]);
  }
  diff_matrix(copy, copy.D, g.dD);
  for (int i = 0; i < params.dims.nx; ++i) {
    g.dmu_x0[i] = diff_entry(copy, &copy.mu_x0[i], copy.mu_x0[i]);
  }
  diff_sym(copy, copy.S_x0, g.dS_x0);
  diff_sym(copy, copy.S_w, g.dS_w);
  diff_sym(copy, copy.S_v, g.dS_v);
  return g;
}

/**
 * Dense joint-Gaussian oracle over the stacked states x_0..x_{n_states-1}
 * and the outputs y_0..y_{nD-1}. Conditioning on a prefix of the outputs is
 * plain Schur-complement algebra on the explicit joint covariance, fully
 * independent of the filter/smoother recursions.
 */
struct JointGaussianOracle {
  int n_states;
  int nx;
  int ny;
  StateMoments moments;
  Matrix xi_dense;  // (nD*ny) x (n_states*nx)
  Matrix sy_dense;
  Vector y_mean;
  Vector y_stacked;

  JointGaussianOracle(const SystemParams& params, const Dataset& dataset,
                      int n_states_arg)
      : n_states(n_states_arg),
        nx(params.dims.nx),
        ny(params.dims.ny) {
    moments = build_state_moments(params, dataset.inputs, n_states);
    const OutputOperators ops =
        build_output_operators(params, dataset.inputs);
    xi_dense = ops.dense_xi(n_states);
    sy_dense = ops.dense_sy();
    y_mean = xi_dense * moments.mu;
    for (int t = 0; t < dataset.length(); ++t) {
      y_mean.segment(t * ny, ny) += params.D * dataset.inputs.col(t);
    }
    y_stacked.resize(static_cast<Eigen::Index>(dataset.length()) * ny);
    for (int t = 0; t < dataset.length(); ++t) {
      y_stacked.segment(t * ny, ny) = dataset.outputs.col(t);
    }
  }

  /// Posterior mean and covariance of all states given y_0..y_{k-1}.
  std::pair<Vector, Matrix> condition_on_prefix(int k) const {
    const Eigen::Index rows = static_cast<Eigen::Index>(k) * ny;
    const Matrix xi_sub = xi_dense.topRows(rows);
    const Matrix cyy = xi_sub * moments.cov * xi_sub.transpose() +
                       sy_dense.topLeftCorner(rows, rows);
    const Matrix cxy = moments.cov * xi_sub.transpose();
    const Eigen::LDLT<Matrix> ldlt(cyy);
    const Vector innov = y_stacked.head(rows) - y_mean.head(rows);
    const Vector mean = moments.mu + cxy * ldlt.solve(innov);
    const Matrix cov =
        moments.cov - cxy * ldlt.solve(cxy.transpose());
    return {mean, symmetrized(cov)};
  }
};

}  // namespace bsid::test

#endif  // BILINSYSID_TESTS_SUPPORT_HPP
