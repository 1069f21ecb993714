#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace evimmd {

enum class ErrorCode {
  kInvalidArgument,
  kUnsupported,
  kNumericalFailure,
  kIo,
  kParse,
  kValidation,
};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

class Unsupported : public Error {
 public:
  explicit Unsupported(const std::string& what)
      : Error(ErrorCode::kUnsupported, what) {}
};

/// A non-finite value showed up during optimization or sampling. Carries the
/// last iterate at which everything was still finite (may be empty when the
/// failure happened before any iterate was accepted).
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, Eigen::VectorXd last_good = {})
      : Error(ErrorCode::kNumericalFailure, what),
        last_good_(std::move(last_good)) {}

  const Eigen::VectorXd& last_good() const noexcept { return last_good_; }

 private:
  Eigen::VectorXd last_good_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(ErrorCode::kIo, path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Malformed input document. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(ErrorCode::kParse, what), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Well-formed input whose field violates a constraint.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : Error(ErrorCode::kValidation, field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace evimmd
