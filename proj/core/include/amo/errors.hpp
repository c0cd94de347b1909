#pragma once

#include <stdexcept>
#include <string>

namespace amo {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A continued fraction ran out of coefficients (explicit spec too short).
class InsufficientDepthError : public Error {
 public:
  using Error::Error;
};

/// The Liouville coefficient rule hit the bit-size cap before the
/// requested depth. Carries the depth that is actually reachable.
class DepthCapError : public Error {
 public:
  DepthCapError(const std::string& what, int achievable)
      : Error(what), achievable_depth(achievable) {}
  int achievable_depth;
};

/// A phase reduction could not be certified at the materialized depth.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

/// A box/matrix exceeded a configured size cap.
class SizeCapError : public Error {
 public:
  using Error::Error;
};

/// The energy is an eigenvalue of the box (zero determinant denominator).
class SingularBoxError : public Error {
 public:
  using Error::Error;
};

/// Condition-number guard tripped in a direct solve.
class NearSingularError : public Error {
 public:
  using Error::Error;
};

/// Two interpolation nodes collide to working precision.
class DegenerateNodesError : public Error {
 public:
  DegenerateNodesError(const std::string& what, long long i, long long j)
      : Error(what), node_i(i), node_j(j) {}
  long long node_i;
  long long node_j;
};

/// An eigenvector fails the localization requirements of a decay fit.
class NotLocalizedError : public Error {
 public:
  using Error::Error;
};

}  // namespace amo
