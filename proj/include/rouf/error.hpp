#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rouf {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (e.g. time outside a trace).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration: bad dimensions, invalid ranges, unknown names.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A requested object would be too large to materialize.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Simulation input outside the model's admissible ranges.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Text input (CSV, STL) that does not parse. `line` and `column` are 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(Format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string Format(const std::string& what, std::size_t line, std::size_t column) {
    std::string out = what;
    if (line > 0) {
      out += " (line " + std::to_string(line);
      if (column > 0) out += ", column " + std::to_string(column);
      out += ")";
    }
    return out;
  }

  std::size_t line_;
  std::size_t column_;
};

/// The trace is too short for the temporal extent of a formula.
class HorizonError : public Error {
 public:
  using Error::Error;
};

/// A formula mentions a signal the trace does not carry.
class UnknownSignalError : public Error {
 public:
  explicit UnknownSignalError(const std::string& name)
      : Error("unknown signal '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Failure talking to a remote classifier. Never a classification result.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Wraps an error raised while processing element `index` of a batch.
template <class Base>
class IndexedError : public Base {
 public:
  IndexedError(const Base& cause, std::size_t index)
      : Base(std::string(cause.what()) + " [at index " + std::to_string(index) + "]"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace rouf
