#pragma once

#include <stdexcept>
#include <string>

namespace hsda {

enum class ErrorKind {
  dimension,
  rank_deficiency,
  no_complement,
  geometry,
  range,
  parameter,
  empty_input,
  configuration,
  parse,
  validation,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind lets
/// front ends map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when the data cannot support the requested subspace dimension.
class RankError : public Error {
 public:
  RankError(int requested, int achievable);

  int requested() const noexcept { return requested_; }
  int achievable() const noexcept { return achievable_; }

 private:
  int requested_;
  int achievable_;
};

/// Raised by the dataset reader; `line` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void throw_dimension(const std::string& what) {
  throw Error(ErrorKind::dimension, "dimension error: " + what);
}

}  // namespace hsda
