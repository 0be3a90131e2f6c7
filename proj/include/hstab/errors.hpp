#pragma once

#include <stdexcept>
#include <string>

namespace hstab {

/// Invalid user-supplied parameters (bad n, d, r, schedule, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A root finder, optimizer or quadrature did not converge.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// The query lies outside the region where the functional is defined
/// (empty t-interval, h >= h*, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exhaustive enumeration refused because n exceeds the supported limit.
class OracleLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace hstab
