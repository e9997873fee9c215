#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace zoprox {

/// Base class for every error raised by the library.
///
/// Call sites higher up the stack may prepend context ("iteration 17: ...")
/// with add_context() and rethrow the same object, so the dynamic type is
/// preserved for callers that catch a specific subclass.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) {}

  const char* what() const noexcept override { return message_.c_str(); }

  void add_context(const std::string& context) { message_ = context + ": " + message_; }

 private:
  std::string message_;
};

/// An oracle returned NaN or Inf. `component` and `coordinate` are 0-based.
class NonFiniteValue : public Error {
 public:
  NonFiniteValue(std::string message, std::optional<std::size_t> component = {},
                 std::optional<std::size_t> coordinate = {})
      : Error(std::move(message)), component_(component), coordinate_(coordinate) {}

  std::optional<std::size_t> component() const { return component_; }
  std::optional<std::size_t> coordinate() const { return coordinate_; }

 private:
  std::optional<std::size_t> component_;
  std::optional<std::size_t> coordinate_;
};

class InvalidArgument : public Error {
  using Error::Error;
};

class InvalidBatch : public InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

class InvalidStep : public InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

class DimensionError : public Error {
  using Error::Error;
};

class EmptyDataset : public Error {
  using Error::Error;
};

class OracleUnavailable : public Error {
 public:
  OracleUnavailable(std::string message, std::optional<std::size_t> example = {})
      : Error(std::move(message)), example_(example) {}

  std::optional<std::size_t> example() const { return example_; }

 private:
  std::optional<std::size_t> example_;
};

/// Malformed LIBSVM input. `line` and `column` are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
              message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class LabelError : public Error {
  using Error::Error;
};

class SplitError : public Error {
  using Error::Error;
};

class ConfigError : public Error {
  using Error::Error;
};

class IOError : public Error {
  using Error::Error;
};

}  // namespace zoprox
