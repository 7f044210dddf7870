#include <Eigen/Cholesky>

#include "bilinsysid/em.hpp"
#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"
#include "em_internal.hpp"

namespace bsid {
namespace detail {

EmMoments accumulate_em_moments(const SmootherResult& smoother,
                                const Dataset& dataset) {
  const int n = static_cast<int>(dataset.inputs.cols());
  const int nx = static_cast<int>(smoother.x_smooth[0].size());
  const int nu = static_cast<int>(dataset.inputs.rows());
  const int ny = static_cast<int>(dataset.outputs.rows());
  const int m = nx + nu * nx + nu;

  EmMoments mom;
  mom.n = n;
  mom.phi = Matrix::Zero(nx + nu, nx + nu);
  mom.cross = Matrix::Zero(nx, nx + nu);
  mom.s11 = Matrix::Zero(nx, nx);
  mom.psi = Matrix::Zero(m, m);
  mom.pi = Matrix::Zero(ny, m);
  mom.yy = Matrix::Zero(ny, ny);
  mom.xs0 = smoother.x_smooth[0];
  mom.P0 = smoother.P_smooth[0];

  Vector ext(1 + nu);   // [1; u_t]
  Vector phi_hat(m);    // [xs; u (x) xs; u]
  for (int t = 0; t < n; ++t) {
    const auto u = dataset.inputs.col(t);
    const auto y = dataset.outputs.col(t);
    const Vector& xs = smoother.x_smooth[t];
    const Matrix& xx = smoother.xx_moments[t];

    ext[0] = 1.0;
    ext.tail(nu) = u;
    phi_hat.head(nx) = xs;
    for (int i = 0; i < nu; ++i) {
      phi_hat.segment(nx + i * nx, nx) = u[i] * xs;
    }
    phi_hat.tail(nu) = u;

    // psi top-left is ([1;u][1;u]^T) (x) E[x x^T]; the u-only border rows
    // need no covariance correction.
    for (int a = 0; a <= nu; ++a) {
      for (int b = 0; b <= nu; ++b) {
        mom.psi.block(a * nx, b * nx, nx, nx) += (ext[a] * ext[b]) * xx;
      }
    }
    mom.psi.block(0, nx + nu * nx, nx + nu * nx, nu).noalias() +=
        phi_hat.head(nx + nu * nx) * u.transpose();
    mom.psi.block(nx + nu * nx, 0, nu, nx + nu * nx).noalias() +=
        u * phi_hat.head(nx + nu * nx).transpose();
    mom.psi.bottomRightCorner(nu, nu).noalias() += u * u.transpose();

    mom.pi.noalias() += y * phi_hat.transpose();
    mom.yy.noalias() += y * y.transpose();

    mom.phi.topLeftCorner(nx, nx) += xx;
    mom.phi.topRightCorner(nx, nu).noalias() += xs * u.transpose();
    mom.phi.bottomLeftCorner(nu, nx).noalias() += u * xs.transpose();
    mom.phi.bottomRightCorner(nu, nu).noalias() += u * u.transpose();

    mom.cross.leftCols(nx) += smoother.cross_moments[t];
    mom.cross.rightCols(nu).noalias() +=
        smoother.x_smooth[t + 1] * u.transpose();
    mom.s11 += smoother.xx_moments[t + 1];
  }
  return mom;
}

}  // namespace detail

namespace {

// Solves X G = R for X given symmetric G, i.e. X = R G^-1, by a factorized
// solve; G is a moment Gram matrix, singular exactly when the excitation
// assumptions fail.
Matrix solve_gram(const Matrix& gram, const Matrix& rhs, const char* name) {
  Eigen::LDLT<Matrix> ldlt(gram);
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  const double dmin = ldlt.vectorD().minCoeff();
  if (ldlt.info() != Eigen::Success || !(dmin > dmax * 1e-13)) {
    throw ExcitationError(std::string("m_step: Gram matrix ") + name +
                          " is numerically singular; the dataset violates "
                          "the excitation assumptions");
  }
  return ldlt.solve(rhs.transpose()).transpose();
}

}  // namespace

SystemParams m_step(const SmootherResult& smoother, const Dataset& dataset,
                    std::vector<std::string>* warnings) {
  if (warnings != nullptr) {
    if (!check_input_excitation(dataset)) {
      warnings->push_back(
          "input sequence fails the rank-(nu+1) excitation check");
    }
    if (!check_output_excitation(dataset)) {
      warnings->push_back(
          "input/output stack fails the rank-(nu+ny) excitation check");
    }
  }

  const detail::EmMoments mom =
      detail::accumulate_em_moments(smoother, dataset);
  const int nx = static_cast<int>(mom.s11.rows());
  const int nu = static_cast<int>(dataset.inputs.rows());
  const int ny = static_cast<int>(dataset.outputs.rows());
  const double n = static_cast<double>(mom.n);

  const Matrix m_hat = solve_gram(mom.phi, mom.cross, "Phi");
  const Matrix n_hat = solve_gram(mom.psi, mom.pi, "Psi");

  // Residual moment quadratics; exact at any M, N, so solve error cannot
  // break the Schur-complement form.
  const Matrix h_k = mom.s11 - m_hat * mom.cross.transpose() -
                     mom.cross * m_hat.transpose() +
                     m_hat * mom.phi * m_hat.transpose();
  const Matrix g_k = mom.yy - n_hat * mom.pi.transpose() -
                     mom.pi * n_hat.transpose() +
                     n_hat * mom.psi * n_hat.transpose();

  SystemParams out = SystemParams::zero({nx, nu, ny});
  out.A = m_hat.leftCols(nx);
  out.B = m_hat.rightCols(nu);
  for (int i = 0; i <= nu; ++i) {
    out.C[i] = n_hat.middleCols(static_cast<Eigen::Index>(i) * nx, nx);
  }
  out.D = n_hat.rightCols(nu);
  out.S_w = symmetrized(h_k / n);
  out.S_v = symmetrized(g_k / n);
  out.mu_x0 = mom.xs0;
  out.S_x0 = symmetrized(mom.P0);
  return out;
}

namespace {

struct CovTerm {
  double log_det;
  Matrix inv;
};

CovTerm cov_term(const Matrix& s, const char* name) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) {
    throw ConditioningError(std::string("em objective: ") + name +
                            " is numerically indefinite");
  }
  CovTerm t;
  t.log_det = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  t.inv = llt.solve(Matrix::Identity(s.rows(), s.cols()));
  return t;
}

}  // namespace

double em_objective(const SystemParams& params, const SmootherResult& smoother,
                    const Dataset& dataset) {
  require_feasible(params, "em_objective");
  const detail::EmMoments mom =
      detail::accumulate_em_moments(smoother, dataset);
  const double n = static_cast<double>(mom.n);

  const Matrix m_par = params.M();
  const Matrix n_par = params.N();
  const Matrix h_k = mom.s11 - m_par * mom.cross.transpose() -
                     mom.cross * m_par.transpose() +
                     m_par * mom.phi * m_par.transpose();
  const Matrix g_k = mom.yy - n_par * mom.pi.transpose() -
                     mom.pi * n_par.transpose() +
                     n_par * mom.psi * n_par.transpose();
  const Vector d0 = mom.xs0 - params.mu_x0;
  const Matrix f_k = mom.P0 + d0 * d0.transpose();

  const CovTerm sv = cov_term(params.S_v, "S_v");
  const CovTerm sw = cov_term(params.S_w, "S_w");
  const CovTerm sx0 = cov_term(params.S_x0, "S_x0");

  return 0.5 * n * sv.log_det + 0.5 * sx0.log_det + 0.5 * n * sw.log_det +
         0.5 * (sx0.inv * f_k).trace() + 0.5 * (sv.inv * g_k).trace() +
         0.5 * (sw.inv * h_k).trace();
}

GradientTuple em_objective_gradient(const SystemParams& params,
                                    const SmootherResult& smoother,
                                    const Dataset& dataset) {
  require_feasible(params, "em_objective_gradient");
  const detail::EmMoments mom =
      detail::accumulate_em_moments(smoother, dataset);
  const Dims& d = params.dims;
  const double n = static_cast<double>(mom.n);

  const Matrix m_par = params.M();
  const Matrix n_par = params.N();
  const Matrix h_k = mom.s11 - m_par * mom.cross.transpose() -
                     mom.cross * m_par.transpose() +
                     m_par * mom.phi * m_par.transpose();
  const Matrix g_k = mom.yy - n_par * mom.pi.transpose() -
                     mom.pi * n_par.transpose() +
                     n_par * mom.psi * n_par.transpose();
  const Vector d0 = mom.xs0 - params.mu_x0;
  const Matrix f_k = mom.P0 + d0 * d0.transpose();

  const CovTerm sv = cov_term(params.S_v, "S_v");
  const CovTerm sw = cov_term(params.S_w, "S_w");
  const CovTerm sx0 = cov_term(params.S_x0, "S_x0");

  const Matrix d_m = sw.inv * (m_par * mom.phi - mom.cross);
  const Matrix d_n = sv.inv * (n_par * mom.psi - mom.pi);

  GradientTuple g = GradientTuple::zero(d);
  g.dA = d_m.leftCols(d.nx);
  g.dB = d_m.rightCols(d.nu);
  for (int i = 0; i <= d.nu; ++i) {
    g.dC[i] = d_n.middleCols(static_cast<Eigen::Index>(i) * d.nx, d.nx);
  }
  g.dD = d_n.rightCols(d.nu);
  g.dmu_x0 = sx0.inv * (params.mu_x0 - mom.xs0);
  g.dS_w = symmetrized(0.5 * (n * sw.inv - sw.inv * h_k * sw.inv));
  g.dS_v = symmetrized(0.5 * (n * sv.inv - sv.inv * g_k * sv.inv));
  g.dS_x0 = symmetrized(0.5 * (sx0.inv - sx0.inv * f_k * sx0.inv));
  return g;
}

}  // namespace bsid
