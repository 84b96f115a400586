#pragma once

#include <stdexcept>
#include <string>

namespace impact {

// Mirrors the command-line exit codes: 1 usage, 2 validation, 3 runtime.
enum class ErrorKind { Usage = 1, Validation = 2, Runtime = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// Bad input data: malformed manifests, fingerprint mismatches, precondition
/// violations on caller-supplied values.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class RuntimeFailure : public Error {
 public:
  explicit RuntimeFailure(const std::string& what) : Error(ErrorKind::Runtime, what) {}
};

}  // namespace impact
