#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semdiff {

/// Base of every error the library raises. `exit_code()` maps the error
/// onto the CLI exit-code contract (1 usage, 2 data, 3 runner/transport).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 2; }
};

class IOError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 1; }
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("parse error at " + std::to_string(line) + ":" +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Raised when one side of a pair fails to parse; `side()` is 1 or 2.
class SideParseError : public Error {
 public:
  SideParseError(int side, const ParseError& cause)
      : Error("side " + std::to_string(side) + ": " + cause.what()),
        side_(side) {}
  int side() const { return side_; }

 private:
  int side_;
};

class TreeTooLarge : public Error {
 public:
  using Error::Error;
};

class StaleSiteError : public Error {
 public:
  using Error::Error;
};

class InvalidRange : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

class MalformedResponse : public Error {
 public:
  using Error::Error;
};

class RunnerNotFound : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

class RunnerCrashed : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

class EmptySeries : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class ZeroDenominator : public Error {
 public:
  using Error::Error;
};

class NotEnoughTasks : public Error {
 public:
  using Error::Error;
};

class NoFeasibleCandidate : public Error {
 public:
  using Error::Error;
};

class MissingScores : public Error {
 public:
  using Error::Error;
};

class NoControlPoints : public Error {
 public:
  using Error::Error;
};

}  // namespace semdiff
