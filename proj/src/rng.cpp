#include "bilinsysid/rng.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "bilinsysid/errors.hpp"

namespace bsid {

void RandomStream::normals(Vector& out) {
  const Eigen::Index n = out.size();
  for (Eigen::Index i = 0; i < n; i += 2) {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    out[i] = radius * std::cos(angle);
    if (i + 1 < n) {
      out[i + 1] = radius * std::sin(angle);
    }
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined word.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vector sample_mvn(const Vector& mean, const Matrix& cov, RandomStream& rng) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw ShapeError("sample_mvn: covariance shape does not match the mean");
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw CovarianceError(
        "sample_mvn: covariance is not positive definite (Cholesky failed)");
  }
  Vector z(mean.size());
  rng.normals(z);
  return mean + llt.matrixL() * z;
}

}  // namespace bsid
