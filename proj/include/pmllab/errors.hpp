#pragma once

#include <stdexcept>
#include <string>

namespace pmllab {

// Each failure mode gets its own type so callers (and the CLI exit-code
// mapping) can tell a bad argument from a numerical breakdown.

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContinuationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularOperatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmllab
