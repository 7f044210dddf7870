#ifndef BILINSYSID_BUILTIN_HPP
#define BILINSYSID_BUILTIN_HPP

#include <cstdint>

#include "bilinsysid/types.hpp"

namespace bsid {

/**
 * Two-state benchmark system with one input channel and scalar output:
 * A = [0.6 -0.28; 0.25 0.45], B = [0.5; -0.5], C_0 = [0.5 -0.15],
 * C_1 = [0.15 0.1], D = 0, mu_x0 = [1; 1]. The noise covariances default to
 * 0.01 I (they are normally recalibrated to a target SNR).
 */
SystemParams example1_params();

/// Scalar system x_{t+1} = 0.6 x_t + 0.45 u_t, y_t = (0.3 + 0.1 u_t) x_t,
/// mu_x0 = 1 with a near-zero initial-state variance. Used by the runtime
/// benchmarks.
SystemParams scalar_benchmark_params();

/// Physical components of the non-ideal-capacitor RC circuit.
struct RcComponents {
  double r0 = 1.0;     // source-side series resistor [ohm]
  double rs = 0.5;     // capacitor equivalent series resistance [ohm]
  double rp = 100.0;   // leakage resistance [ohm]
  double l = 2e-8;     // parasitic inductance [H]
  double c = 1e-9;     // capacitance [F]
  double alpha = 1.0;  // heat transfer coefficient
  double sample_time = 1e-9;  // [s]
};

/**
 * Zero-order-hold discretization of the RC-circuit model
 *   d/dt [I_L; V_c] = [-rs/l, -1/l; 1/c, -1/(c rp)] x + [1/l; 0] u,
 *   y = alpha I_L u,
 * i.e. C_0 = 0, C_1 = [alpha 0], D = 0. A = exp(A_c h); B is the ZOH input
 * integral, computed through the augmented-block matrix exponential
 * exp([A_c B_c; 0 0] h) (Pade 13 scaling-and-squaring), which reduces to
 * A_c^-1 (A - I) B_c for invertible A_c and to h B_c as A_c -> 0.
 * Covariances: S_w = 1e-3 I, S_v = 1e-4, S_x0 = 1e-3 I; mu_x0 = 0.
 * Throws ParamError on non-positive component values.
 */
SystemParams discretize_rc(const RcComponents& components);

/// discretize_rc with the default component set. The defaults are chosen so
/// the discretized A is Schur-stable at the 1 ns sample time; they are not
/// taken from any published source.
SystemParams example2_params();

}  // namespace bsid

#endif  // BILINSYSID_BUILTIN_HPP
