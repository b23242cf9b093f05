#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lqa {

/// Bad input data: malformed files, contract violations on values.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A text file could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : DataError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Persisted artifact written by an incompatible format version.
class VersionError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace lqa
