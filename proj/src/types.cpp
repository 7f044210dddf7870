#include "bilinsysid/types.hpp"

#include <cmath>

namespace bsid {

Matrix SystemParams::M() const {
  Matrix m(dims.nx, dims.nx + dims.nu);
  m << A, B;
  return m;
}

Matrix SystemParams::C_stacked() const {
  Matrix c(dims.ny, (dims.nu + 1) * dims.nx);
  for (int i = 0; i <= dims.nu; ++i) {
    c.middleCols(static_cast<Eigen::Index>(i) * dims.nx, dims.nx) = C[i];
  }
  return c;
}

Matrix SystemParams::N() const {
  Matrix n(dims.ny, (dims.nu + 1) * dims.nx + dims.nu);
  n << C_stacked(), D;
  return n;
}

SystemParams SystemParams::zero(const Dims& dims) {
  SystemParams p;
  p.dims = dims;
  p.A = Matrix::Zero(dims.nx, dims.nx);
  p.B = Matrix::Zero(dims.nx, dims.nu);
  p.C.assign(dims.nu + 1, Matrix::Zero(dims.ny, dims.nx));
  p.D = Matrix::Zero(dims.ny, dims.nu);
  p.mu_x0 = Vector::Zero(dims.nx);
  p.S_x0 = Matrix::Identity(dims.nx, dims.nx);
  p.S_w = Matrix::Identity(dims.nx, dims.nx);
  p.S_v = Matrix::Identity(dims.ny, dims.ny);
  return p;
}

namespace {

double sq_diff(const Matrix& a, const Matrix& b) {
  return (a - b).squaredNorm();
}

}  // namespace

double param_distance(const SystemParams& a, const SystemParams& b) {
  double s = sq_diff(a.A, b.A) + sq_diff(a.B, b.B) + sq_diff(a.D, b.D) +
             (a.mu_x0 - b.mu_x0).squaredNorm() + sq_diff(a.S_x0, b.S_x0) +
             sq_diff(a.S_w, b.S_w) + sq_diff(a.S_v, b.S_v);
  for (std::size_t i = 0; i < a.C.size(); ++i) {
    s += sq_diff(a.C[i], b.C[i]);
  }
  return std::sqrt(s);
}

double param_norm(const SystemParams& p) {
  double s = p.A.squaredNorm() + p.B.squaredNorm() + p.D.squaredNorm() +
             p.mu_x0.squaredNorm() + p.S_x0.squaredNorm() +
             p.S_w.squaredNorm() + p.S_v.squaredNorm();
  for (const Matrix& c : p.C) {
    s += c.squaredNorm();
  }
  return std::sqrt(s);
}

double min_covariance_eigenvalue(const SystemParams& p) {
  double m = std::numeric_limits<double>::infinity();
  for (const Matrix* s : {&p.S_x0, &p.S_w, &p.S_v}) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(*s),
                                             Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

}  // namespace bsid
