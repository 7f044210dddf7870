#ifndef BILINSYSID_METRICS_HPP
#define BILINSYSID_METRICS_HPP

#include "bilinsysid/types.hpp"

namespace bsid {

/// Normalized relative output error sum_t ||y_t - yhat_t|| / ||y_t||,
/// with the mean variant dividing by the number of summed terms.
struct OutputErrorResult {
  double sum = 0.0;
  double mean = 0.0;
  int terms_used = 0;
  int terms_skipped = 0;  // reference ||y_t|| <= 1e-12
};

/**
 * Simulates both systems noise-free from their own mean initial states over
 * val_inputs and accumulates the per-step output error ratios. Steps whose
 * reference norm is at or below 1e-12 are skipped and counted. Throws
 * ValidationError when every step is skipped.
 */
OutputErrorResult normalized_output_error(const SystemParams& true_params,
                                          const SystemParams& est_params,
                                          const Matrix& val_inputs);

struct ParamErrorResult {
  double c_error = 0.0;  // ||C - Chat||_F / ||C||_F, C = [C_0 ... C_nu]
  double m_error = 0.0;  // ||M - Mhat||_F / ||M||_F, M = [A B]
};

/// Frobenius-norm relative errors of the stacked observation and dynamics
/// matrices. Throws ValidationError when a reference matrix has zero norm.
ParamErrorResult param_relative_error(const SystemParams& true_params,
                                      const SystemParams& est_params);

}  // namespace bsid

#endif  // BILINSYSID_METRICS_HPP
