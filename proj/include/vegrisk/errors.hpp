#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vegrisk {

/// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: schema, range, or configuration problems. CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during fitting or evaluation. CLI exit code 2.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// One or more malformed rows in an input file. Each issue carries its
/// "source:line: message" location.
class ParseError : public ValidationError {
 public:
  explicit ParseError(std::vector<std::string> issues);

  [[nodiscard]] const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

}  // namespace vegrisk
