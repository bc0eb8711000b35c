#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlrules {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input documents (ARFF, label headers, pools, models).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  /// 1-based line number, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Well-formed input that cannot be used (all-missing column, empty dataset, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or incompatible artifacts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlrules
