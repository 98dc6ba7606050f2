#pragma once

#include <stdexcept>
#include <string>

namespace scb {

// Every library failure derives from Error so callers (the verify driver in
// particular) can turn it into a failing record instead of a crash.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract argument.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A bracket or adjoint does not re-expand in the registered basis.
class ClosureError : public Error {
 public:
  using Error::Error;
};

/// Group element outside the local factorization chart.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Integration blew up or lost unitarity; `time` is where it happened.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double time)
      : Error(what), time_(time) {}
  explicit NumericalError(const std::string& what) : Error(what), time_(0.0) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Group element (or step) is not a point of the sampling lattice.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// A nonzero section value would leave the sampled window.
class SupportError : public Error {
 public:
  using Error::Error;
};

/// Spatial grid too coarse for the requested wave packet.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Gauge-orbit data that contradicts itself.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Precondition of a check does not hold, so the check would be vacuous.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Gauge compensator search did not converge.
class SearchError : public Error {
 public:
  using Error::Error;
};

/// Identity residual grew under refinement.
class IdentityViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace scb
