#include <Eigen/Cholesky>
#include <sstream>

#include "bilinsysid/em.hpp"
#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"

namespace bsid {

FilterResult kalman_filter(const SystemParams& params,
                           const Dataset& dataset) {
  require_feasible(params, "kalman_filter");
  const Dims& d = params.dims;
  const int n = dataset.length();

  FilterResult res;
  res.x_filt.resize(n);
  res.P_filt.resize(n);
  res.x_pred.resize(n + 1);
  res.P_pred.resize(n + 1);
  res.gains.resize(n);

  Vector xp = params.mu_x0;
  Matrix Pp = params.S_x0;
  res.x_pred[0] = xp;
  res.P_pred[0] = Pp;

  const Matrix identity = Matrix::Identity(d.nx, d.nx);
  for (int t = 0; t < n; ++t) {
    const Vector u = dataset.inputs.col(t);
    const Matrix xi = xi_at(params, u);

    const Matrix innov_cov =
        symmetrized(xi * Pp * xi.transpose() + params.S_v);
    Eigen::LLT<Matrix> llt(innov_cov);
    if (llt.info() != Eigen::Success) {
      std::ostringstream os;
      os << "kalman_filter: innovation covariance indefinite at t = " << t;
      throw ConditioningError(os.str());
    }
    // K_t = P Xi^T S_inn^-1, via the factorized solve of Xi P.
    const Matrix gain = llt.solve(xi * Pp).transpose();
    // The D u feedthrough is part of the observation model; the innovation
    // must subtract it whenever D != 0.
    const Vector innov = dataset.outputs.col(t) - xi * xp - params.D * u;

    res.x_filt[t] = xp + gain * innov;
    res.P_filt[t] = symmetrized((identity - gain * xi) * Pp);
    res.gains[t] = gain;

    xp = params.A * res.x_filt[t] + params.B * u;
    Pp = symmetrized(params.A * res.P_filt[t] * params.A.transpose() +
                     params.S_w);
    res.x_pred[t + 1] = xp;
    res.P_pred[t + 1] = Pp;
  }
  return res;
}

SmootherResult rts_smooth(const SystemParams& params,
                          const FilterResult& filt) {
  const int n = static_cast<int>(filt.x_filt.size());

  SmootherResult res;
  res.x_smooth.resize(n + 1);
  res.P_smooth.resize(n + 1);
  res.gains.resize(n);
  res.xx_moments.resize(n + 1);
  res.cross_moments.resize(n);

  // No measurement at the boundary state: smoothed == predicted there.
  res.x_smooth[n] = filt.x_pred[n];
  res.P_smooth[n] = filt.P_pred[n];

  for (int t = n - 1; t >= 0; --t) {
    Eigen::LLT<Matrix> llt(filt.P_pred[t + 1]);
    if (llt.info() != Eigen::Success) {
      std::ostringstream os;
      os << "rts_smooth: predicted covariance indefinite at t = " << t + 1;
      throw ConditioningError(os.str());
    }
    // L_t = P_{t|t} A^T P_{t+1|t}^-1.
    const Matrix gain =
        llt.solve(params.A * filt.P_filt[t]).transpose();
    res.gains[t] = gain;
    res.x_smooth[t] =
        filt.x_filt[t] + gain * (res.x_smooth[t + 1] - filt.x_pred[t + 1]);
    res.P_smooth[t] = symmetrized(
        filt.P_filt[t] +
        gain * (res.P_smooth[t + 1] - filt.P_pred[t + 1]) * gain.transpose());
  }

  for (int t = 0; t <= n; ++t) {
    res.xx_moments[t] =
        res.x_smooth[t] * res.x_smooth[t].transpose() + res.P_smooth[t];
  }
  for (int t = 0; t < n; ++t) {
    res.cross_moments[t] =
        res.x_smooth[t + 1] * res.x_smooth[t].transpose() +
        res.P_smooth[t + 1] * res.gains[t].transpose();
  }
  return res;
}

}  // namespace bsid
