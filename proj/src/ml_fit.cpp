#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"
#include "ml_internal.hpp"

namespace bsid {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr int kMaxHalvings = 40;

int tri_size(int n) { return n * (n + 1) / 2; }

/**
 * Flat optimizer coordinates: all linear blocks verbatim, each covariance as
 * its lower Cholesky factor with log-transformed diagonal. Any coordinate
 * vector maps back to a feasible parameter tuple.
 */
struct Packing {
  Dims dims;

  int size() const {
    const int nx = dims.nx;
    const int nu = dims.nu;
    const int ny = dims.ny;
    return nx * nx + nx * nu + (nu + 1) * ny * nx + ny * nu + nx +
           2 * tri_size(nx) + tri_size(ny);
  }

  static void put_matrix(Vector& v, int& at, const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        v[at++] = m(i, j);
      }
    }
  }

  static Matrix take_matrix(const Vector& v, int& at, int rows, int cols) {
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) {
        m(i, j) = v[at++];
      }
    }
    return m;
  }

  static void put_chol(Vector& v, int& at, const Matrix& s,
                       const char* name) {
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) {
      throw CovarianceError(std::string("fit_ml: ") + name +
                            " is not positive definite");
    }
    const Matrix l = llt.matrixL();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        v[at++] = l(i, j);
      }
      v[at++] = std::log(l(i, i));
    }
  }

  static Matrix take_chol(const Vector& v, int& at, int n) {
    Matrix l = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) {
        l(i, j) = v[at++];
      }
      l(i, i) = std::exp(v[at++]);
    }
    return l * l.transpose();
  }

  Vector pack(const SystemParams& p) const {
    Vector v(size());
    int at = 0;
    put_matrix(v, at, p.A);
    put_matrix(v, at, p.B);
    for (const Matrix& c : p.C) {
      put_matrix(v, at, c);
    }
    put_matrix(v, at, p.D);
    for (int i = 0; i < dims.nx; ++i) {
      v[at++] = p.mu_x0[i];
    }
    put_chol(v, at, p.S_x0, "S_x0");
    put_chol(v, at, p.S_w, "S_w");
    put_chol(v, at, p.S_v, "S_v");
    return v;
  }

  SystemParams unpack(const Vector& v) const {
    SystemParams p = SystemParams::zero(dims);
    int at = 0;
    p.A = take_matrix(v, at, dims.nx, dims.nx);
    p.B = take_matrix(v, at, dims.nx, dims.nu);
    for (int i = 0; i <= dims.nu; ++i) {
      p.C[i] = take_matrix(v, at, dims.ny, dims.nx);
    }
    p.D = take_matrix(v, at, dims.ny, dims.nu);
    for (int i = 0; i < dims.nx; ++i) {
      p.mu_x0[i] = v[at++];
    }
    p.S_x0 = take_chol(v, at, dims.nx);
    p.S_w = take_chol(v, at, dims.nx);
    p.S_v = take_chol(v, at, dims.ny);
    return p;
  }

  // Chain rule through S = L L^T: dJ/dL = 2 (dJ/dS) L on the lower triangle,
  // diagonal entries additionally scaled by L_ii for the log transform.
  static void put_chol_gradient(Vector& v, int& at, const Matrix& s,
                                const Matrix& ds) {
    Eigen::LLT<Matrix> llt(s);
    const Matrix l = llt.matrixL();
    const Matrix gl = 2.0 * ds * l;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        v[at++] = gl(i, j);
      }
      v[at++] = gl(i, i) * l(i, i);
    }
  }

  Vector pack_gradient(const SystemParams& p, const GradientTuple& g) const {
    Vector v(size());
    int at = 0;
    put_matrix(v, at, g.dA);
    put_matrix(v, at, g.dB);
    for (const Matrix& c : g.dC) {
      put_matrix(v, at, c);
    }
    put_matrix(v, at, g.dD);
    for (int i = 0; i < dims.nx; ++i) {
      v[at++] = g.dmu_x0[i];
    }
    put_chol_gradient(v, at, p.S_x0, g.dS_x0);
    put_chol_gradient(v, at, p.S_w, g.dS_w);
    put_chol_gradient(v, at, p.S_v, g.dS_v);
    return v;
  }
};

double guarded_cost(const SystemParams& params, const Dataset& dataset) {
  // Inside a line-search trial a numerically indefinite F just means the
  // step was too large; report +inf and let the search halve.
  try {
    const double c = detail::marginal_cost(params, dataset);
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

EstimationReport fit_ml(const Dataset& dataset, const SystemParams& init,
                        const FitOptions& options) {
  require_feasible(init, "fit_ml");
  if (options.max_iters < 1 || options.epsilon <= 0.0 ||
      options.step_size <= 0.0) {
    throw ParamError("fit_ml: invalid options");
  }
  const auto t_start = std::chrono::steady_clock::now();

  EstimationReport report;
  if (!check_input_excitation(dataset)) {
    report.warnings.push_back(
        "input sequence fails the persistent-excitation rank check; "
        "identifiability may degrade");
  }

  const Packing packing{init.dims};
  Vector theta = packing.pack(init);
  SystemParams params = init;
  GradientTuple grad;
  double cost;
  try {
    cost = detail::cost_and_gradient(params, dataset, grad);
  } catch (const ConditioningError& e) {
    throw ConditioningError(std::string(e.what()) + " (at iteration 0)");
  }

  if (options.record_trace) {
    report.trace.push_back({0, cost, 0.0, 0.0,
                            std::numeric_limits<double>::quiet_NaN(),
                            min_covariance_eigenvalue(params)});
  }

  // The first trial step is normalized by the gradient so its length in
  // coordinate space is about options.step_size regardless of scaling;
  // afterwards the accepted step is carried over and allowed to grow.
  double trial_step = -1.0;
  report.termination = "max_iters";
  int k = 0;
  for (; k < options.max_iters; ++k) {
    const Vector g = packing.pack_gradient(params, grad);
    const double g_sq = g.squaredNorm();
    if (trial_step < 0.0) {
      trial_step = options.step_size / (1.0 + std::sqrt(g_sq));
    }

    Vector theta_new;
    SystemParams params_new;
    double cost_new = 0.0;
    double used_step = trial_step;
    bool accepted = false;
    if (options.line_search) {
      auto armijo_ok = [&](double step, double value) {
        return value <= cost - kArmijoC * step * g_sq;
      };
      for (int h = 0; h <= kMaxHalvings; ++h) {
        theta_new = theta - used_step * g;
        params_new = packing.unpack(theta_new);
        cost_new = guarded_cost(params_new, dataset);
        if (armijo_ok(used_step, cost_new)) {
          accepted = true;
          break;
        }
        used_step *= 0.5;
      }
      if (!accepted) {
        if (k == 0) {
          throw OptimizationError(
              "fit_ml: line search exhausted at iteration 0; no descent "
              "direction at the initial point");
        }
        report.termination = "line_search_exhausted";
        break;
      }
      // Expand while the larger step still satisfies the condition and
      // keeps improving; avoids stalling on a too-small carried-over step.
      for (int h = 0; h < kMaxHalvings; ++h) {
        const double bigger = used_step * 2.0;
        const Vector theta_try = theta - bigger * g;
        SystemParams params_try = packing.unpack(theta_try);
        const double cost_try = guarded_cost(params_try, dataset);
        if (!(armijo_ok(bigger, cost_try) && cost_try < cost_new)) {
          break;
        }
        used_step = bigger;
        theta_new = theta_try;
        params_new = std::move(params_try);
        cost_new = cost_try;
      }
      trial_step = used_step;
    } else {
      theta_new = theta - used_step * g;
      params_new = packing.unpack(theta_new);
      cost_new = guarded_cost(params_new, dataset);
    }

    const double delta = param_distance(params, params_new);
    theta.swap(theta_new);
    params = std::move(params_new);
    cost = cost_new;

    try {
      cost = detail::cost_and_gradient(params, dataset, grad);
    } catch (const ConditioningError& e) {
      std::ostringstream os;
      os << e.what() << " (at iteration " << k + 1 << ")";
      throw ConditioningError(os.str());
    }

    if (options.record_trace) {
      report.trace.push_back({k + 1, cost, delta, std::sqrt(g_sq),
                              std::numeric_limits<double>::quiet_NaN(),
                              min_covariance_eigenvalue(params)});
    }
    report.final_step_norm = delta;
    if (delta < options.epsilon) {
      report.termination = "epsilon";
      ++k;
      break;
    }
  }

  report.params = params;
  report.iterations = k;
  report.final_cost = cost;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

}  // namespace bsid
