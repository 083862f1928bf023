#ifndef SENNS_ERROR_HPP
#define SENNS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace senns {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A vector or matrix did not have the length the network expects.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
      : Error(what + ": expected length " + std::to_string(expected) + ", got " +
              std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

// Invalid argument or configuration (layer size 0, bad lambdas, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Model-file problems. The subclasses let callers tell them apart.
class FormatError : public Error {
 public:
  using Error::Error;
};
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};
class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};
class ShapeError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Dataset ingestion failures. `line()` is 1-based, 0 when not applicable.
class DataError : public Error {
 public:
  enum class Kind { Empty, RaggedRow, NonNumeric, BadMagic, CountMismatch, Truncated, Io, Degenerate };

  DataError(Kind kind, const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

// Training produced a non-finite objective or gradient.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t iteration)
      : Error(what + " at iteration " + std::to_string(iteration)), iteration_(iteration) {}

  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace senns

#endif  // SENNS_ERROR_HPP
