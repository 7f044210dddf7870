#include <doctest.h>

#include <algorithm>

#include "bilinsysid/builtin.hpp"
#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"
#include "support.hpp"

using namespace bsid;

namespace {

bool report_mentions(const std::vector<std::string>& report,
                     const std::string& needle) {
  return std::any_of(report.begin(), report.end(), [&](const std::string& r) {
    return r.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("xi_at on the two-state benchmark coefficients") {
  const SystemParams p = example1_params();

  Vector u(1);
  u << 0.0;
  Matrix xi = xi_at(p, u);
  CHECK(xi(0, 0) == doctest::Approx(0.5));
  CHECK(xi(0, 1) == doctest::Approx(-0.15));

  u << 1.0;
  xi = xi_at(p, u);
  CHECK(xi(0, 0) == doctest::Approx(0.65));
  CHECK(xi(0, 1) == doctest::Approx(-0.05));
}

TEST_CASE("xi_at with zero coefficient matrices returns C0") {
  RandomStream rng(7);
  SystemParams p = test::random_params({2, 2, 1}, rng);
  p.C[1].setZero();
  p.C[2].setZero();
  Vector u(2);
  u << 3.7, -1.2;
  CHECK((xi_at(p, u) - p.C[0]).norm() == doctest::Approx(0.0));
}

TEST_CASE("xi_at rejects mis-sized inputs") {
  const SystemParams p = example1_params();
  Vector u(2);
  u.setZero();
  CHECK_THROWS_AS(xi_at(p, u), ShapeError);
}

TEST_CASE("xi_at is affine in the input") {
  RandomStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemParams p = test::random_params({3, 2, 2}, rng);
    const Vector u1 = test::random_matrix(2, 1, rng);
    const Vector u2 = test::random_matrix(2, 1, rng);
    const double a = rng.uniform(-2.0, 2.0);
    const Matrix lhs = xi_at(p, a * u1 + (1.0 - a) * u2);
    const Matrix rhs = a * xi_at(p, u1) + (1.0 - a) * xi_at(p, u2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("validate_params accepts the benchmark system") {
  SystemParams p = example1_params();
  p.S_w = Matrix::Identity(2, 2) * 0.01;
  CHECK(validate_params(p).empty());
}

TEST_CASE("validate_params flags a singular S_v") {
  SystemParams p = example1_params();
  p.S_v = Matrix::Zero(1, 1);
  CHECK(report_mentions(validate_params(p), "S_v not positive definite"));
}

TEST_CASE("validate_params flags a mis-shaped A") {
  SystemParams p = example1_params();
  p.A = Matrix::Zero(2, 3);
  CHECK(report_mentions(validate_params(p), "A has shape"));
}

TEST_CASE("input excitation rank test") {
  Dataset d;
  d.dims = {1, 1, 1};
  d.outputs = Matrix::Zero(1, 3);

  d.inputs = Matrix::Ones(1, 3);  // constant input: rank 1 < 2
  CHECK_FALSE(check_input_excitation(d));

  d.inputs.resize(1, 4);
  d.inputs << 0, 1, 0, 1;
  d.outputs = Matrix::Zero(1, 4);
  CHECK(check_input_excitation(d));
}

TEST_CASE("input excitation for nu=2 agrees with brute-force rank") {
  Matrix inputs(2, 3);
  inputs << 1, 0, 1,
            0, 1, 1;
  Matrix stacked(3, 3);
  stacked.row(0).setOnes();
  stacked.bottomRows(2) = inputs;
  CHECK(test::brute_force_rank(stacked) == 3);
  CHECK(check_input_excitation(inputs));
}

TEST_CASE("input excitation is invariant to reordering") {
  RandomStream rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix inputs = gen_random_binary(12, 2, -1.0, 1.0, rng.next_u64());
    const bool before = check_input_excitation(inputs);
    // Reverse the column order.
    Matrix shuffled = inputs.rowwise().reverse();
    CHECK(check_input_excitation(shuffled) == before);
  }
}

TEST_CASE("output excitation rank test") {
  Dataset d;
  d.dims = {1, 1, 1};

  d.inputs.resize(1, 2);
  d.inputs << 1, 1;
  d.outputs.resize(1, 2);
  d.outputs << 2, 2;  // y is a multiple of u
  CHECK_FALSE(check_output_excitation(d));

  d.inputs.resize(1, 3);
  d.inputs << 0, 1, 0;
  d.outputs.resize(1, 3);
  d.outputs << 1, 0, 1;
  CHECK(check_output_excitation(d));
}

TEST_CASE("output excitation detects dependent output rows") {
  Dataset d;
  d.dims = {1, 1, 2};
  d.inputs = gen_random_binary(8, 1, -1.0, 1.0, 3);
  d.outputs.resize(2, 8);
  RandomStream rng(5);
  for (int t = 0; t < 8; ++t) {
    d.outputs(0, t) = rng.normal();
    d.outputs(1, t) = 3.0 * d.outputs(0, t);  // dependent second row
  }
  Matrix stacked(3, 8);
  stacked.topRows(1) = d.inputs;
  stacked.bottomRows(2) = d.outputs;
  CHECK(test::brute_force_rank(stacked) == 2);
  CHECK_FALSE(check_output_excitation(d));
}

TEST_CASE("example1 parameters match the benchmark definition") {
  const SystemParams p = example1_params();
  Matrix a_ref(2, 2);
  a_ref << 0.6, -0.28, 0.25, 0.45;
  CHECK((p.A - a_ref).norm() == 0.0);
  CHECK(p.B(0, 0) == 0.5);
  CHECK(p.B(1, 0) == -0.5);
  CHECK(p.C[0](0, 0) == 0.5);
  CHECK(p.C[0](0, 1) == -0.15);
  CHECK(p.C[1](0, 0) == 0.15);
  CHECK(p.C[1](0, 1) == 0.1);
  CHECK(p.D(0, 0) == 0.0);
  CHECK(p.mu_x0(0) == 1.0);
  CHECK(p.mu_x0(1) == 1.0);
}

TEST_CASE("stacked accessors share the storage layout") {
  const SystemParams p = example1_params();
  const Matrix m = p.M();
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK((m.leftCols(2) - p.A).norm() == 0.0);
  CHECK((m.rightCols(1) - p.B).norm() == 0.0);
  const Matrix n = p.N();
  CHECK(n.cols() == 5);  // C0, C1 (2 cols each) + D
  CHECK((n.middleCols(0, 2) - p.C[0]).norm() == 0.0);
  CHECK((n.middleCols(2, 2) - p.C[1]).norm() == 0.0);
  CHECK((n.rightCols(1) - p.D).norm() == 0.0);
}

}  // TEST_SUITE
