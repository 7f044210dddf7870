#ifndef BILINSYSID_TYPES_HPP
#define BILINSYSID_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace bsid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// State, input and output dimensions of a model instance.
struct Dims {
  int nx = 0;
  int nu = 0;
  int ny = 0;

  bool operator==(const Dims& o) const {
    return nx == o.nx && nu == o.nu && ny == o.ny;
  }
};

/**
 * Full parameter tuple of a linear-dynamics / bilinear-observation model:
 *
 *   x_{t+1} = A x_t + B u_t + w_t,          w_t ~ N(0, S_w)
 *   y_t     = (C_0 + sum_i C_i u_{t,i}) x_t + D u_t + v_t,  v_t ~ N(0, S_v)
 *   x_0 ~ N(mu_x0, S_x0)
 *
 * Immutable value object; all operations on it are pure.
 */
struct SystemParams {
  Dims dims;
  Matrix A;               // nx x nx
  Matrix B;               // nx x nu
  std::vector<Matrix> C;  // nu+1 matrices, each ny x nx
  Matrix D;               // ny x nu
  Vector mu_x0;           // nx
  Matrix S_x0;            // nx x nx, SPD
  Matrix S_w;             // nx x nx, SPD
  Matrix S_v;             // ny x ny, SPD

  /// Stacked dynamics matrix M = [A  B], nx x (nx+nu).
  Matrix M() const;
  /// Stacked observation coefficients [C_0  C_1 ... C_nu], ny x (nu+1)*nx.
  Matrix C_stacked() const;
  /// Stacked observation matrix N = [C_0 ... C_nu  D], ny x (nx+nu*nx+nu).
  Matrix N() const;

  /// Zero-initialized parameter set with consistent shapes.
  static SystemParams zero(const Dims& dims);
};

/// Paired input/output measurement sequences. Columns are time steps.
struct Dataset {
  Dims dims;
  Matrix inputs;   // nu x nD
  Matrix outputs;  // ny x nD

  int length() const { return static_cast<int>(inputs.cols()); }
};

/// One entry of an optimizer/EM trace.
struct IterationRecord {
  int iter = 0;
  double cost = 0.0;            // ML cost J (ML) or NaN (EM unless audited)
  double step_norm = 0.0;       // ||theta_{k+1} - theta_k||_F
  double grad_norm = 0.0;       // ML only; 0 for EM
  double log_likelihood = 0.0;  // audit value, NaN when not evaluated
  double min_cov_eigenvalue = 0.0;  // min eigenvalue over S_x0, S_w, S_v
};

/// Result of a fit, common to the ML and EM estimators.
struct EstimationReport {
  SystemParams params;
  std::vector<IterationRecord> trace;
  std::string termination;  // "epsilon", "max_iters", "line_search_exhausted"
  int iterations = 0;
  double final_cost = 0.0;       // ML cost at the returned parameters (ML path)
  double final_step_norm = 0.0;  // last ||delta theta||
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

/// (S + S^T)/2, in place-free form.
inline Matrix symmetrized(const Matrix& s) { return 0.5 * (s + s.transpose()); }

/// Frobenius norm of the difference between two parameter tuples, taken over
/// the concatenation of all blocks.
double param_distance(const SystemParams& a, const SystemParams& b);

/// Frobenius norm of the full parameter tuple.
double param_norm(const SystemParams& p);

/// Smallest eigenvalue among the three covariance blocks.
double min_covariance_eigenvalue(const SystemParams& p);

}  // namespace bsid

#endif  // BILINSYSID_TYPES_HPP
