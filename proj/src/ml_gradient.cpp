#include <Eigen/Cholesky>
#include <vector>

#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"
#include "ml_internal.hpp"

namespace bsid {
namespace detail {

double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
}

MarginalEvaluation evaluate_marginal(const SystemParams& params,
                                     const Dataset& dataset) {
  const Dims& d = params.dims;
  const int n = dataset.length();
  const int nx = d.nx;
  const int ny = d.ny;

  MarginalEvaluation ev;
  ev.moments = build_state_moments(params, dataset.inputs, n);
  ev.Xi.reserve(n);
  for (int t = 0; t < n; ++t) {
    ev.Xi.push_back(xi_at(params, dataset.inputs.col(t)));
  }

  ev.F.resize(static_cast<Eigen::Index>(n) * ny,
              static_cast<Eigen::Index>(n) * ny);
  Matrix xi_cov(ny, nx);  // workspace, avoids per-block temporaries
  Matrix blk(ny, ny);
  for (int t = 0; t < n; ++t) {
    for (int s = 0; s <= t; ++s) {
      xi_cov.noalias() = ev.Xi[t] * ev.moments.cov_block(t, s);
      blk.noalias() = xi_cov * ev.Xi[s].transpose();
      ev.F.block(t * ny, s * ny, ny, ny) = blk;
      if (s != t) {
        ev.F.block(s * ny, t * ny, ny, ny) = blk.transpose();
      }
    }
    ev.F.block(t * ny, t * ny, ny, ny) += params.S_v;
  }

  ev.F_llt.compute(ev.F);
  if (ev.F_llt.info() != Eigen::Success) {
    throw ConditioningError(
        "ml cost: output covariance Xi Sigma_x Xi^T + Sigma_y is numerically "
        "indefinite");
  }
  ev.log_det_F = log_det_from_llt(ev.F_llt);

  ev.r.resize(static_cast<Eigen::Index>(n) * ny);
  for (int t = 0; t < n; ++t) {
    ev.r.segment(t * ny, ny) = params.D * dataset.inputs.col(t) -
                               dataset.outputs.col(t) +
                               ev.Xi[t] * ev.moments.mu_block(t);
  }
  ev.alpha = ev.F_llt.solve(ev.r);
  ev.cost = ev.log_det_F + ev.r.dot(ev.alpha);
  return ev;
}

double marginal_cost(const SystemParams& params, const Dataset& dataset) {
  return evaluate_marginal(params, dataset).cost;
}

double cost_and_gradient(const SystemParams& params, const Dataset& dataset,
                         GradientTuple& grad) {
  const Dims& d = params.dims;
  const int n = dataset.length();
  const int nx = d.nx;
  const int ny = d.ny;
  const int nu = d.nu;
  const Matrix& u = dataset.inputs;

  MarginalEvaluation ev = evaluate_marginal(params, dataset);
  const StateMoments& mom = ev.moments;

  grad = GradientTuple::zero(d);

  const Matrix F_inv =
      ev.F_llt.solve(Matrix::Identity(ev.F.rows(), ev.F.cols()));

  // Outer derivatives of J = log det F + r^T F^-1 r:
  //   dJ/dmu_x   = 2 Xi^T alpha                       (per-step blocks q_t)
  //   dJ/dSx     = Xi^T F^-1 Xi - q q^T
  //   dJ/dXi_t   = 2 [ (F^-1 Xi Sx)_{tt} - alpha_t (Sx q)_t^T + alpha_t mu_t^T ]
  //   dJ/dD      = 2 sum_t alpha_t u_t^T
  //   dJ/dS_v    = sum_t ( (F^-1)_{tt} - alpha_t alpha_t^T )
  Vector q(static_cast<Eigen::Index>(n) * nx);
  for (int t = 0; t < n; ++t) {
    q.segment(t * nx, nx) = ev.Xi[t].transpose() * ev.alpha.segment(t * ny, ny);
  }

  // XS(t,s) = Xi_t Sx_{t,s}, reused for the Xi-gradient diagonal.
  Matrix XS(static_cast<Eigen::Index>(n) * ny,
            static_cast<Eigen::Index>(n) * nx);
  for (int t = 0; t < n; ++t) {
    for (int s = 0; s < n; ++s) {
      XS.block(t * ny, s * nx, ny, nx).noalias() =
          ev.Xi[t] * mom.cov_block(t, s);
    }
  }

  Matrix G_sx(static_cast<Eigen::Index>(n) * nx,
              static_cast<Eigen::Index>(n) * nx);
  Matrix xit_f(nx, ny);  // workspace
  Matrix gblk(nx, nx);
  for (int t = 0; t < n; ++t) {
    for (int s = 0; s <= t; ++s) {
      xit_f.noalias() =
          ev.Xi[t].transpose() * F_inv.block(t * ny, s * ny, ny, ny);
      gblk.noalias() = xit_f * ev.Xi[s];
      G_sx.block(t * nx, s * nx, nx, nx) = gblk;
      if (s != t) {
        G_sx.block(s * nx, t * nx, nx, nx) = gblk.transpose();
      }
    }
  }
  G_sx.noalias() -= q * q.transpose();

  const Vector sx_q = mom.cov * q;
  for (int t = 0; t < n; ++t) {
    // Diagonal block t of F^-1 (Xi Sx): row block of F^-1 times column block
    // of XS.
    Matrix diag_xi =
        F_inv.middleRows(t * ny, ny) * XS.middleCols(t * nx, nx);
    diag_xi.noalias() -=
        ev.alpha.segment(t * ny, ny) * sx_q.segment(t * nx, nx).transpose();
    diag_xi.noalias() +=
        ev.alpha.segment(t * ny, ny) * mom.mu_block(t).transpose();
    diag_xi *= 2.0;

    grad.dC[0] += diag_xi;
    for (int k = 0; k < nu; ++k) {
      grad.dC[k + 1] += u(k, t) * diag_xi;
    }
    grad.dD.noalias() +=
        2.0 * ev.alpha.segment(t * ny, ny) * u.col(t).transpose();
    grad.dS_v += F_inv.block(t * ny, t * ny, ny, ny) -
                 ev.alpha.segment(t * ny, ny) *
                     ev.alpha.segment(t * ny, ny).transpose();
  }

  // Mean-path adjoint of mu_{t+1} = A mu_t + B u_t with per-step weights
  // 2 q_t. Collects the A, B and mu_x0 pieces of the chain rule.
  Vector mu_adj = 2.0 * q.segment((n - 1) * nx, nx);
  for (int t = n - 2; t >= 0; --t) {
    grad.dA.noalias() += mu_adj * mom.mu_block(t).transpose();
    grad.dB.noalias() += mu_adj * u.col(t).transpose();
    mu_adj = 2.0 * q.segment(t * nx, nx) + params.A.transpose() * mu_adj;
  }
  grad.dmu_x0 = mu_adj;

  // Covariance-path adjoint of the block recursion
  //   S_{t+1,s} = A S_{t,s} (s <= t),  S_{t+1,t+1} = A S_{t,t} A^T + S_w,
  // seeded with the lower-triangle weights of dJ/dSx (off-diagonal blocks
  // doubled). Yields the A, S_w and S_x0 pieces.
  std::vector<Matrix> adj(static_cast<std::size_t>(n));
  adj[n - 1] = G_sx.block((n - 1) * nx, (n - 1) * nx, nx, nx);
  for (int s = 0; s < n - 1; ++s) {
    adj[s] = 2.0 * G_sx.block((n - 1) * nx, s * nx, nx, nx);
  }
  Matrix adj_a(nx, nx);  // workspaces
  Matrix diag_adj(nx, nx);
  const Matrix a_t = params.A.transpose();
  for (int t = n - 2; t >= 0; --t) {
    for (int s = 0; s <= t; ++s) {
      grad.dA.noalias() += adj[s] * mom.cov_block(t, s).transpose();
    }
    const auto S_tt = mom.cov_block(t, t);
    adj_a.noalias() = adj[t + 1] * params.A;
    grad.dA.noalias() += adj_a * S_tt.transpose();
    adj_a.noalias() = adj[t + 1].transpose() * params.A;
    grad.dA.noalias() += adj_a * S_tt;
    grad.dS_w += adj[t + 1];

    adj_a.noalias() = a_t * adj[t + 1];
    diag_adj.noalias() = adj_a * params.A;
    diag_adj += G_sx.block(t * nx, t * nx, nx, nx);
    diag_adj.noalias() += a_t * adj[t];
    for (int s = 0; s < t; ++s) {
      adj_a.noalias() = a_t * adj[s];
      adj[s] = adj_a;
      adj[s] += 2.0 * G_sx.block(t * nx, s * nx, nx, nx);
    }
    adj[t] = diag_adj;
  }
  grad.dS_x0 = adj[0];

  grad.dS_x0 = symmetrized(grad.dS_x0);
  grad.dS_w = symmetrized(grad.dS_w);
  grad.dS_v = symmetrized(grad.dS_v);
  return ev.cost;
}

}  // namespace detail

GradientTuple GradientTuple::zero(const Dims& dims) {
  GradientTuple g;
  g.dA = Matrix::Zero(dims.nx, dims.nx);
  g.dB = Matrix::Zero(dims.nx, dims.nu);
  g.dC.assign(dims.nu + 1, Matrix::Zero(dims.ny, dims.nx));
  g.dD = Matrix::Zero(dims.ny, dims.nu);
  g.dmu_x0 = Vector::Zero(dims.nx);
  g.dS_x0 = Matrix::Zero(dims.nx, dims.nx);
  g.dS_w = Matrix::Zero(dims.nx, dims.nx);
  g.dS_v = Matrix::Zero(dims.ny, dims.ny);
  return g;
}

double GradientTuple::norm() const {
  double s = dA.squaredNorm() + dB.squaredNorm() + dD.squaredNorm() +
             dmu_x0.squaredNorm() + dS_x0.squaredNorm() + dS_w.squaredNorm() +
             dS_v.squaredNorm();
  for (const Matrix& c : dC) {
    s += c.squaredNorm();
  }
  return std::sqrt(s);
}

GradientTuple ml_gradient(const SystemParams& params, const Dataset& dataset) {
  require_feasible(params, "ml_gradient");
  GradientTuple grad;
  detail::cost_and_gradient(params, dataset, grad);
  return grad;
}

}  // namespace bsid
