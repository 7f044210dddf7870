#ifndef BILINSYSID_MODEL_HPP
#define BILINSYSID_MODEL_HPP

#include <string>
#include <vector>

#include "bilinsysid/types.hpp"

namespace bsid {

/// Relative tolerance for symmetry of covariance blocks.
inline constexpr double kSymmetryTol = 1e-12;
/// Singular values below kRankTol * sigma_max count as zero in rank tests.
inline constexpr double kRankTol = 1e-10;

/**
 * Input-dependent observation matrix Xi(u) = C_0 + sum_i C_i u_i.
 * Affine in u. Throws ShapeError if u has the wrong length.
 */
Matrix xi_at(const SystemParams& params, const Vector& u);

/**
 * Checks membership of params in the feasible set: consistent shapes,
 * symmetric covariances (relative asymmetry <= 1e-12) and positive
 * definiteness (Cholesky succeeds and the smallest eigenvalue is > 0).
 *
 * Returns one message per violated invariant; empty means feasible.
 */
std::vector<std::string> validate_params(const SystemParams& params);

/// Throws ParamError listing the violations if params is infeasible.
void require_feasible(const SystemParams& params, const char* context);

/**
 * Weak persistent-excitation test on the inputs: the (nu+1) x nD matrix
 * [1 ... 1; u_0 ... u_{nD-1}] must have full row rank nu+1. Rank is counted
 * from singular values above 1e-10 * sigma_max.
 */
bool check_input_excitation(const Dataset& dataset);
bool check_input_excitation(const Matrix& inputs);

/// Rank test on the stacked (nu+ny) x nD matrix [u; y]: full row rank nu+ny.
bool check_output_excitation(const Dataset& dataset);

}  // namespace bsid

#endif  // BILINSYSID_MODEL_HPP
