#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qbnn {

enum class ErrorKind {
  Usage,
  Dimension,
  Parse,
  Capacity,
  UnsupportedFanIn,
  EmbeddingNotFound,
  Io,
  Tie,
  Internal,
};

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

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorKind::Dimension, what) {}
};

/// Parse failure; `line` is 1-based, 0 when the input has no line structure (JSON).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(ErrorKind::Parse, line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what) : Error(ErrorKind::Capacity, what) {}
};

class UnsupportedFanInError : public Error {
 public:
  explicit UnsupportedFanInError(std::size_t fan_in)
      : Error(ErrorKind::UnsupportedFanIn,
              "unsupported fan-in " + std::to_string(fan_in) + " (must be 2^n - 1)"),
        fan_in_(fan_in) {}
  std::size_t fan_in() const noexcept { return fan_in_; }

 private:
  std::size_t fan_in_;
};

class EmbeddingNotFound : public Error {
 public:
  EmbeddingNotFound(const std::string& what, std::size_t largest_partial)
      : Error(ErrorKind::EmbeddingNotFound, what), largest_partial_(largest_partial) {}
  /// Most logical variables placed by any attempt.
  std::size_t largest_partial() const noexcept { return largest_partial_; }

 private:
  std::size_t largest_partial_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class TieError : public Error {
 public:
  explicit TieError(const std::string& what) : Error(ErrorKind::Tie, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ErrorKind::Internal, what) {}
};

}  // namespace qbnn
