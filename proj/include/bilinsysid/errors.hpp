#ifndef BILINSYSID_ERRORS_HPP
#define BILINSYSID_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bsid {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A matrix or vector argument has the wrong dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix is not symmetric positive definite.
class CovarianceError : public Error {
 public:
  using Error::Error;
};

/// A factorization failed on a numerically indefinite matrix. The message
/// names the offending term and, where meaningful, the time step or
/// iteration index.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// A Gram matrix in the M-step is singular; the data violates the
/// persistent-excitation rank conditions.
class ExcitationError : public Error {
 public:
  using Error::Error;
};

/// SNR calibration is impossible (degenerate noise-free output).
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Validation metrics are undefined (all reference outputs below threshold,
/// or a zero-norm reference matrix).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The optimizer could not make progress (e.g. line-search exhaustion at the
/// first iteration).
class OptimizationError : public Error {
 public:
  using Error::Error;
};

/// An input parameter value is out of range (e.g. non-positive circuit
/// component).
class ParamError : public Error {
 public:
  using Error::Error;
};

/// File I/O or parse failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bsid

#endif  // BILINSYSID_ERRORS_HPP
