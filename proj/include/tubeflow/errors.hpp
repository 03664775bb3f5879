#pragma once

#include <stdexcept>
#include <string>

namespace tubeflow {

// Raised while turning source text into an expression tree. `offset` is the
// 0-based byte position of the offending token in the source string.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Raised when an expression hits a domain error at evaluation time
// (division by zero, square root of a negative number, invalid power).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when integration cannot continue and the caller did not ask for
// escape reporting (state left the representable range).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an approximation target cannot be met (slice budget spent,
// ball verification failed after all halvings, tube bound violated).
class ApproximationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a scenario file or builtin reference is malformed.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tubeflow
