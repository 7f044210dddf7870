#include <doctest.h>

#include <cmath>
#include <complex>

#include "bilinsysid/builtin.hpp"
#include "bilinsysid/errors.hpp"
#include "support.hpp"

using namespace bsid;

namespace {

// Classical RK4 on xdot = A_c x + B_c u with the input held constant over
// one sample; an integration oracle for the discretized pair. Column k of
// the discrete A is the zero-input response to e_k, and B is the unit-input
// response from the origin.
std::pair<Matrix, Vector> rk4_zoh(const Matrix& a_c, const Matrix& b_c,
                                  double h, int substeps) {
  const double dt = h / substeps;
  auto integrate = [&](Vector x, double u) {
    auto f = [&](const Vector& z) { return (a_c * z + b_c * u).eval(); };
    for (int s = 0; s < substeps; ++s) {
      const Vector f1 = f(x);
      const Vector f2 = f(x + 0.5 * dt * f1);
      const Vector f3 = f(x + 0.5 * dt * f2);
      const Vector f4 = f(x + dt * f3);
      x += dt / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    }
    return x;
  };
  Matrix a_disc(2, 2);
  a_disc.col(0) = integrate(Matrix::Identity(2, 2).col(0), 0.0);
  a_disc.col(1) = integrate(Matrix::Identity(2, 2).col(1), 0.0);
  const Vector b_disc = integrate(Vector::Zero(2), 1.0);
  return {a_disc, b_disc};
}

}  // namespace

TEST_SUITE("discretize") {

TEST_CASE("vanishing continuous dynamics reduce to A = I, B = h B_c") {
  RcComponents comp;
  comp.l = 1e6;
  comp.c = 1e6;
  comp.rs = 1e-6;
  comp.rp = 1e12;
  comp.sample_time = 1.0;
  const SystemParams p = discretize_rc(comp);
  CHECK((p.A - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 2e-6);
  Vector b_limit(2);
  b_limit << comp.sample_time / comp.l, 0.0;
  CHECK((p.B - b_limit).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("eigenvalues map through the scalar exponential") {
  const RcComponents comp;  // defaults
  const SystemParams p = discretize_rc(comp);
  Matrix a_c(2, 2);
  a_c << -comp.rs / comp.l, -1.0 / comp.l, 1.0 / comp.c,
      -1.0 / (comp.c * comp.rp);
  const auto cont = a_c.eigenvalues();
  auto disc = p.A.eigenvalues();
  for (int i = 0; i < 2; ++i) {
    const std::complex<double> expected =
        std::exp(cont[i] * comp.sample_time);
    const double err0 = std::abs(disc[0] - expected);
    const double err1 = std::abs(disc[1] - expected);
    CHECK(std::min(err0, err1) <= 1e-10 * std::abs(expected));
  }
}

TEST_CASE("discretized pair matches a fine RK4 integration") {
  const RcComponents comp;
  const SystemParams p = discretize_rc(comp);
  Matrix a_c(2, 2);
  a_c << -comp.rs / comp.l, -1.0 / comp.l, 1.0 / comp.c,
      -1.0 / (comp.c * comp.rp);
  Matrix b_c(2, 1);
  b_c << 1.0 / comp.l, 0.0;
  const auto oracle = rk4_zoh(a_c, b_c, comp.sample_time, 20000);
  const double scale = p.A.cwiseAbs().maxCoeff();
  CHECK((p.A - oracle.first).cwiseAbs().maxCoeff() <= 1e-8 * scale);
  CHECK((p.B - oracle.second).cwiseAbs().maxCoeff() <=
        1e-8 * (1.0 + p.B.cwiseAbs().maxCoeff()));
}

TEST_CASE("non-positive components are rejected") {
  RcComponents comp;
  comp.c = -1e-9;
  CHECK_THROWS_AS(discretize_rc(comp), ParamError);
  comp.c = 1e-9;
  comp.alpha = 0.0;
  CHECK_THROWS_AS(discretize_rc(comp), ParamError);
}

TEST_CASE("example2 carries the published covariances and is stable") {
  const SystemParams p = example2_params();
  CHECK(p.S_w(0, 0) == 1e-3);
  CHECK(p.S_w(1, 1) == 1e-3);
  CHECK(p.S_w(0, 1) == 0.0);
  CHECK(p.S_v(0, 0) == 1e-4);
  CHECK(p.S_x0(0, 0) == 1e-3);
  CHECK(p.S_x0(1, 1) == 1e-3);
  CHECK(p.C[0].norm() == 0.0);
  CHECK(p.C[1](0, 1) == 0.0);
  CHECK(p.D(0, 0) == 0.0);
  CHECK(p.A.eigenvalues().cwiseAbs().maxCoeff() < 1.0);  // Schur stable
}

}  // TEST_SUITE
