#include "bilinsysid/builtin.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "bilinsysid/errors.hpp"

namespace bsid {

SystemParams example1_params() {
  SystemParams p = SystemParams::zero({2, 1, 1});
  p.A << 0.6, -0.28, 0.25, 0.45;
  p.B << 0.5, -0.5;
  p.C[0] << 0.5, -0.15;
  p.C[1] << 0.15, 0.1;
  p.D << 0.0;
  p.mu_x0 << 1.0, 1.0;
  p.S_x0 = Matrix::Identity(2, 2) * 0.01;
  p.S_w = Matrix::Identity(2, 2) * 0.01;
  p.S_v = Matrix::Identity(1, 1) * 0.01;
  return p;
}

SystemParams scalar_benchmark_params() {
  SystemParams p = SystemParams::zero({1, 1, 1});
  p.A << 0.6;
  p.B << 0.45;
  p.C[0] << 0.3;
  p.C[1] << 0.1;
  p.D << 0.0;
  p.mu_x0 << 1.0;
  p.S_x0 << 1e-4;  // near-deterministic initial state
  p.S_w << 1e-3;
  p.S_v << 1e-3;
  return p;
}

SystemParams discretize_rc(const RcComponents& comp) {
  if (!(comp.r0 > 0.0) || !(comp.rs > 0.0) || !(comp.rp > 0.0) ||
      !(comp.l > 0.0) || !(comp.c > 0.0) || !(comp.alpha > 0.0) ||
      !(comp.sample_time > 0.0)) {
    throw ParamError("discretize_rc: all component values must be positive");
  }

  Matrix a_c(2, 2);
  a_c << -comp.rs / comp.l, -1.0 / comp.l,
         1.0 / comp.c, -1.0 / (comp.c * comp.rp);
  Matrix b_c(2, 1);
  b_c << 1.0 / comp.l, 0.0;

  // ZOH over one sample via the augmented-block exponential
  //   exp([A_c B_c; 0 0] h) = [A B; 0 I],
  // which equals A = exp(A_c h), B = A_c^-1 (A - I) B_c for invertible A_c
  // and degrades gracefully to B = h B_c as A_c -> 0.
  Matrix aug = Matrix::Zero(3, 3);
  aug.topLeftCorner(2, 2) = a_c * comp.sample_time;
  aug.block(0, 2, 2, 1) = b_c * comp.sample_time;
  const Matrix aug_exp = aug.exp();

  SystemParams p = SystemParams::zero({2, 1, 1});
  p.A = aug_exp.topLeftCorner(2, 2);
  p.B = aug_exp.block(0, 2, 2, 1);
  p.C[0].setZero();
  p.C[1] << comp.alpha, 0.0;
  p.D << 0.0;
  p.mu_x0.setZero();
  p.S_w = Matrix::Identity(2, 2) * 1e-3;
  p.S_v = Matrix::Identity(1, 1) * 1e-4;
  p.S_x0 = Matrix::Identity(2, 2) * 1e-3;
  return p;
}

SystemParams example2_params() { return discretize_rc(RcComponents{}); }

}  // namespace bsid
