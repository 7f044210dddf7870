#ifndef BILINSYSID_SRC_EM_INTERNAL_HPP
#define BILINSYSID_SRC_EM_INTERNAL_HPP

#include "bilinsysid/em.hpp"

namespace bsid::detail {

/**
 * Sufficient statistics of one E-step, accumulated over t = 0..nD-1 from the
 * smoothed moments:
 *   phi   = sum E[[x_t; u_t] [x_t; u_t]^T]              (dynamics Gram)
 *   cross = sum [E[x_{t+1} x_t^T]  xhat_{t+1} u_t^T]
 *   s11   = sum E[x_{t+1} x_{t+1}^T]
 *   psi   = sum E[[x; u (x) x; u] [.]^T]                (observation Gram)
 *   pi    = sum y_t [xhat; u (x) xhat; u]^T
 *   yy    = sum y_t y_t^T
 * plus the boundary moments xs0 = xhat_{0|nD}, P0 = P_{0|nD}.
 */
struct EmMoments {
  int n = 0;
  Matrix phi;
  Matrix cross;
  Matrix s11;
  Matrix psi;
  Matrix pi;
  Matrix yy;
  Vector xs0;
  Matrix P0;
};

EmMoments accumulate_em_moments(const SmootherResult& smoother,
                                const Dataset& dataset);

}  // namespace bsid::detail

#endif  // BILINSYSID_SRC_EM_INTERNAL_HPP
