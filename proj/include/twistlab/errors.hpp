#pragma once

#include <stdexcept>
#include <string>

namespace twistlab {

// Exit-code classes used by the CLI: everything deriving from UsageError maps
// to 2, everything deriving from IntegrityError maps to 3.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// A table (primes, coefficients) does not reach far enough for the request.
class CoverageError : public UsageError {
 public:
  using UsageError::UsageError;
};

class ResourceError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Quadrature failed its own refinement test.
class AccuracyError : public UsageError {
 public:
  using UsageError::UsageError;
};

class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reconstructed coefficient outside the a-priori bound.
class OverflowError : public IntegrityError {
 public:
  using IntegrityError::IntegrityError;
};

class FormatError : public IntegrityError {
 public:
  using IntegrityError::IntegrityError;
};

class CorruptionError : public IntegrityError {
 public:
  using IntegrityError::IntegrityError;
};

}  // namespace twistlab
