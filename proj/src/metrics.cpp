#include "bilinsysid/metrics.hpp"

#include "bilinsysid/errors.hpp"
#include "bilinsysid/simulate.hpp"

namespace bsid {

namespace {
constexpr double kReferenceFloor = 1e-12;
}

OutputErrorResult normalized_output_error(const SystemParams& true_params,
                                          const SystemParams& est_params,
                                          const Matrix& val_inputs) {
  if (!(true_params.dims == est_params.dims)) {
    throw ShapeError("normalized_output_error: dimension mismatch");
  }
  const Trajectory ref = simulate_noise_free(true_params, val_inputs);
  const Trajectory est = simulate_noise_free(est_params, val_inputs);

  OutputErrorResult res;
  for (Eigen::Index t = 0; t < val_inputs.cols(); ++t) {
    const double ref_norm = ref.outputs.col(t).norm();
    if (ref_norm <= kReferenceFloor) {
      ++res.terms_skipped;
      continue;
    }
    res.sum += (ref.outputs.col(t) - est.outputs.col(t)).norm() / ref_norm;
    ++res.terms_used;
  }
  if (res.terms_used == 0) {
    throw ValidationError(
        "normalized_output_error: every reference output is below the "
        "1e-12 threshold");
  }
  res.mean = res.sum / res.terms_used;
  return res;
}

ParamErrorResult param_relative_error(const SystemParams& true_params,
                                      const SystemParams& est_params) {
  if (!(true_params.dims == est_params.dims)) {
    throw ShapeError("param_relative_error: dimension mismatch");
  }
  const Matrix c_true = true_params.C_stacked();
  const Matrix m_true = true_params.M();
  const double c_norm = c_true.norm();
  const double m_norm = m_true.norm();
  if (!(c_norm > 0.0) || !(m_norm > 0.0)) {
    throw ValidationError(
        "param_relative_error: reference matrix has zero norm");
  }
  ParamErrorResult res;
  res.c_error = (c_true - est_params.C_stacked()).norm() / c_norm;
  res.m_error = (m_true - est_params.M()).norm() / m_norm;
  return res;
}

}  // namespace bsid
