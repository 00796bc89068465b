#pragma once

#include <stdexcept>
#include <string>

namespace spiralnet {

/// Broad failure classes. The CLI maps each one onto its own exit code.
enum class ErrorKind {
  io,          // missing file, unreadable or malformed content
  validation,  // contract violations: bad mesh, shape/label mismatch
  numeric,     // NaN/Inf in data, gradients or losses
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Malformed file content. Carries the offending line when known.
class ParseError : public IoError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  explicit ParseError(const std::string& what) : IoError(what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

}  // namespace spiralnet
