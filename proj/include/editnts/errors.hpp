#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace editnts {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data. Carries the 1-based line number when one is known.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Non-finite loss or gradient during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint file is truncated, corrupt, or does not match the model.
class CheckpointError : public DataError {
 public:
  explicit CheckpointError(const std::string& what) : DataError(what) {}
};

}  // namespace editnts
