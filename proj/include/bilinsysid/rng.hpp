#ifndef BILINSYSID_RNG_HPP
#define BILINSYSID_RNG_HPP

#include <cstdint>
#include <random>

#include "bilinsysid/types.hpp"

namespace bsid {

/**
 * Deterministic random stream used everywhere in the library.
 *
 * Engine: std::mt19937_64 (bit-exact across platforms). Uniform doubles are
 * built as (x >> 11) * 2^-53 in [0, 1). Normal variates use the Box-Muller
 * transform, two uniforms per pair; each normal() request of n values draws
 * ceil(n/2) pairs and discards the spare when n is odd, so consumption is a
 * pure function of the request sizes. std::*_distribution is avoided on
 * purpose: its output is implementation-defined.
 */
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bit() { return (engine_() >> 63) != 0; }

  /// Fills out with independent standard normals (Box-Muller).
  void normals(Vector& out);

  /// One standard normal; consumes a full pair.
  double normal() {
    Vector v(1);
    normals(v);
    return v[0];
  }

 private:
  std::mt19937_64 engine_;
};

/// 64-bit mix used to derive independent stream seeds from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/**
 * Draws mean + L z with S = L L^T (lower Cholesky) and z standard normal
 * from rng. Identical seed and sizes give identical draws.
 * Throws CovarianceError if cov is not positive definite.
 */
Vector sample_mvn(const Vector& mean, const Matrix& cov, RandomStream& rng);

}  // namespace bsid

#endif  // BILINSYSID_RNG_HPP
