#include <doctest.h>

#include <cmath>

#include "bilinsysid/builtin.hpp"
#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"
#include "bilinsysid/simulate.hpp"
#include "support.hpp"

using namespace bsid;

TEST_SUITE("simulate") {

TEST_CASE("sample_mvn is deterministic under a fixed seed") {
  const Vector mean = Vector::Zero(3);
  const Matrix cov = Matrix::Identity(3, 3);
  RandomStream a(42);
  RandomStream b(42);
  const Vector da = sample_mvn(mean, cov, a);
  const Vector db = sample_mvn(mean, cov, b);
  CHECK((da - db).norm() == 0.0);
}

TEST_CASE("sample_mvn collapses onto the mean for vanishing covariance") {
  Vector mean(2);
  mean << 3.0, -4.0;
  const Matrix cov = Matrix::Identity(2, 2) * 1e-20;
  RandomStream rng(1);
  const Vector draw = sample_mvn(mean, cov, rng);
  CHECK((draw - mean).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("sample_mvn empirical covariance matches the target") {
  Matrix cov(2, 2);
  cov << 2.0, 1.0, 1.0, 2.0;
  const Vector mean = Vector::Zero(2);
  RandomStream rng(123);
  const int n = 100000;
  Matrix acc = Matrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const Vector d = sample_mvn(mean, cov, rng);
    acc += d * d.transpose();
  }
  acc /= static_cast<double>(n);
  CHECK((acc - cov).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("sample_mvn rejects an indefinite covariance") {
  Matrix cov(2, 2);
  cov << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  RandomStream rng(1);
  CHECK_THROWS_AS(sample_mvn(Vector::Zero(2), cov, rng), CovarianceError);
}

TEST_CASE("noise-free scalar rollout reproduces the benchmark arithmetic") {
  // x_{t+1} = 0.6 x_t + 0.45 u_t, y_t = (0.3 + 0.1 u_t) x_t, x_0 = 1.
  SystemParams p = scalar_benchmark_params();
  Matrix inputs(1, 2);
  inputs << 1.0, 1.0;
  const Trajectory traj = simulate_noise_free(p, inputs);
  CHECK(traj.outputs(0, 0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(traj.states(0, 1) == doctest::Approx(1.05).epsilon(1e-14));
}

TEST_CASE("zero dynamics zero the state after the first step") {
  SystemParams p = SystemParams::zero({2, 1, 1});
  p.mu_x0 << 2.0, -3.0;
  p.C[0] << 1.0, 1.0;
  const Matrix inputs = Matrix::Ones(1, 5);
  const Trajectory traj = simulate_noise_free(p, inputs);
  CHECK((traj.states.col(0) - p.mu_x0).norm() == 0.0);
  for (int t = 1; t < 5; ++t) {
    CHECK(traj.states.col(t).norm() == 0.0);
  }
}

TEST_CASE("noise-free benchmark trajectory matches a hand-rolled recursion") {
  const SystemParams p = example1_params();
  const Matrix inputs = Matrix::Ones(1, 30);  // unit step
  const Trajectory traj = simulate_noise_free(p, inputs);

  Vector x = p.mu_x0;
  for (int t = 0; t < 30; ++t) {
    const double u = inputs(0, t);
    const double y = (p.C[0] + p.C[1] * u).row(0).dot(x) + p.D(0, 0) * u;
    CHECK(std::abs(traj.outputs(0, t) - y) <= 1e-12);
    CHECK((traj.states.col(t) - x).cwiseAbs().maxCoeff() <= 1e-12);
    x = p.A * x + p.B * Vector::Constant(1, u);
  }
}

TEST_CASE("simulation is bitwise deterministic") {
  const SystemParams p = example1_params();
  const Matrix inputs = gen_random_binary(50, 1, -1.0, 1.0, 9);
  const Trajectory a = simulate(p, inputs, 1234);
  const Trajectory b = simulate(p, inputs, 1234);
  CHECK(a.states == b.states);
  CHECK(a.outputs == b.outputs);
}

TEST_CASE("noise-free rollout equals the closed-form power series") {
  RandomStream rng(31);
  const SystemParams p = test::random_params({3, 2, 1}, rng);
  const Matrix inputs = test::random_matrix(2, 12, rng);
  const Trajectory traj = simulate_noise_free(p, inputs);
  for (int t = 0; t < 12; ++t) {
    Matrix a_pow = Matrix::Identity(3, 3);
    for (int k = 0; k < t; ++k) {
      a_pow = p.A * a_pow;
    }
    Vector x = a_pow * p.mu_x0;
    for (int k = 0; k < t; ++k) {
      Matrix a_rem = Matrix::Identity(3, 3);
      for (int r = 0; r < t - 1 - k; ++r) {
        a_rem = p.A * a_rem;
      }
      x += a_rem * p.B * inputs.col(k);
    }
    CHECK((traj.states.col(t) - x).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("binary input generator") {
  const Matrix a = gen_random_binary(100, 2, -1.0, 1.0, 77);
  const Matrix b = gen_random_binary(100, 2, -1.0, 1.0, 77);
  CHECK(a == b);
  for (int t = 0; t < 100; ++t) {
    for (int i = 0; i < 2; ++i) {
      CHECK((a(i, t) == -1.0 || a(i, t) == 1.0));
    }
  }
  const Matrix big = gen_random_binary(10000, 1, 0.0, 2.0, 5);
  CHECK(std::abs(big.mean() - 1.0) <= 0.05);
}

TEST_CASE("binary inputs excite the rank condition for nD >= 20") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix u = gen_random_binary(20, 1, -1.0, 1.0, seed);
    CHECK(check_input_excitation(u));
  }
}

TEST_CASE("sinusoid generator hits the quarter-period lattice") {
  const Matrix u = gen_sinusoid(8, 1, {12.0}, {M_PI / 2.0}, 1.0);
  const double expected[8] = {0, 12, 0, -12, 0, 12, 0, -12};
  for (int t = 0; t < 8; ++t) {
    CHECK(std::abs(u(0, t) - expected[t]) <= 1e-9);
  }
  const Matrix zero = gen_sinusoid(8, 1, {0.0}, {1.0}, 1.0);
  CHECK(zero.norm() == 0.0);
}

TEST_CASE("high-frequency sinusoid matches a direct evaluation") {
  const double omega = 2.0 * M_PI * 1e8;
  const double h = 1e-9;
  const Matrix u = gen_sinusoid(1000, 1, {12.0}, {omega}, h);
  for (int t = 0; t < 1000; ++t) {
    CHECK(std::abs(u(0, t) - 12.0 * std::sin(omega * t * h)) <= 1e-12);
  }
  const Matrix multi = gen_multisine(100, 1, {6.0, 6.0}, {omega, 0.3 * omega}, h);
  for (int t = 0; t < 100; ++t) {
    const double ref =
        6.0 * std::sin(omega * t * h) + 6.0 * std::sin(0.3 * omega * t * h);
    CHECK(std::abs(multi(0, t) - ref) <= 1e-12);
  }
}

TEST_CASE("SNR calibration splits the documented budget") {
  // Integrator holding x = 1, so the noise-free output is exactly the +-1
  // input: Var(ybar) = 1, and at 0 dB the total budget 1 splits into
  // S_v = 0.5 and a process share of 0.5.
  SystemParams p = SystemParams::zero({1, 1, 1});
  p.A << 1.0;
  p.mu_x0 << 1.0;
  p.S_x0 << 1e-6;
  p.S_w << 1e-6;
  p.S_v << 1e-6;
  p.C[1] << 1.0;
  Matrix inputs(1, 4);
  inputs << 1, -1, 1, -1;

  const auto noise = calibrate_snr(p, inputs, 0.0, 3);
  CHECK(noise.second(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  // Capped very high SNR keeps S_v positive but negligible.
  const auto tiny = calibrate_snr(p, inputs, 1e9, 3);
  CHECK(tiny.second(0, 0) > 0.0);
  CHECK(tiny.second(0, 0) <= 1e-30);
}

TEST_CASE("SNR calibration error on a degenerate system") {
  SystemParams p = SystemParams::zero({1, 1, 1});
  p.S_x0 << 1.0;
  p.S_w << 1.0;
  p.S_v << 1.0;
  const Matrix inputs = Matrix::Ones(1, 8);
  CHECK_THROWS_AS(calibrate_snr(p, inputs, 10.0, 1), CalibrationError);
}

TEST_CASE("realized SNR tracks the 20 dB target on the benchmark system") {
  const SystemParams base = example1_params();
  int in_band = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix inputs =
        gen_random_binary(400, 1, -1.0, 1.0, derive_seed(seed, 1));
    SystemParams p = base;
    const auto noise = calibrate_snr(p, inputs, 20.0, derive_seed(seed, 2));
    p.S_w = noise.first;
    p.S_v = noise.second;
    const Trajectory clean = simulate_noise_free(p, inputs);
    const Trajectory noisy = simulate(p, inputs, derive_seed(seed, 3));
    const Matrix diff = noisy.outputs - clean.outputs;
    const double mean_clean = clean.outputs.row(0).mean();
    const double var_clean =
        (clean.outputs.row(0).array() - mean_clean).square().mean();
    const double mean_diff = diff.row(0).mean();
    const double var_diff = (diff.row(0).array() - mean_diff).square().mean();
    const double snr = 10.0 * std::log10(var_clean / var_diff);
    if (snr >= 17.0 && snr <= 23.0) {
      ++in_band;
    }
  }
  CHECK(in_band == 50);
}

}  // TEST_SUITE
