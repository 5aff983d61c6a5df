#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace btx {

// Error categories. The CLI maps each category onto a distinct exit code.
enum class ErrorKind {
  Internal,
  Format,          // LLM answer grammar violation
  UnknownSymbol,   // predicate/object/skill not in the domain
  Parse,           // tree text
  Schema,          // domain/scenario/fixture files
  Evaluation,      // tick-time domain mismatch
  InvalidTree,
  InvalidTarget,
  UnknownNode,
  UnboundSlot,
  UnitMismatch,
  PreconditionViolation,
  Unsolvable,
  BudgetExceeded,
  BackendUnavailable,
  RateLimited,
  MissingFixture,
  DuplicateSuggestion,
  InvalidSpec,     // prompt spec missing required context
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Grammar violation in an LLM response or literal text. `token` is the
// offending token (may be empty at end of input); `column` is 1-based.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::string token, std::size_t column)
      : Error(ErrorKind::Format, message), token_(std::move(token)), column_(column) {}

  const std::string& token() const noexcept { return token_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string token_;
  std::size_t column_;
};

class UnknownSymbol : public Error {
 public:
  explicit UnknownSymbol(std::string name, const std::string& what_kind = "symbol")
      : Error(ErrorKind::UnknownSymbol, "unknown " + what_kind + " '" + name + "'"),
        name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// Positioned error for structured text inputs (tree files, domain and
// scenario files). Line and column are 1-based; 0 means unknown.
class PositionedError : public Error {
 public:
  PositionedError(ErrorKind kind, std::string source, std::size_t line, std::size_t column,
                  std::string expected)
      : Error(kind, format(source, line, column, expected)),
        source_(std::move(source)),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  static std::string format(const std::string& source, std::size_t line, std::size_t column,
                            const std::string& expected) {
    return source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + expected;
  }

  std::string source_;
  std::size_t line_;
  std::size_t column_;
  std::string expected_;
};

class ParseError : public PositionedError {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, std::string expected)
      : PositionedError(ErrorKind::Parse, std::move(source), line, column, std::move(expected)) {}
};

class SchemaError : public PositionedError {
 public:
  SchemaError(std::string source, std::size_t line, std::size_t column, std::string expected)
      : PositionedError(ErrorKind::Schema, std::move(source), line, column, std::move(expected)) {}
};

class RateLimited : public Error {
 public:
  RateLimited(const std::string& message, double retry_after_seconds)
      : Error(ErrorKind::RateLimited, message), retry_after_(retry_after_seconds) {}

  double retry_after_seconds() const noexcept { return retry_after_; }

 private:
  double retry_after_;
};

class MissingFixture : public Error {
 public:
  explicit MissingFixture(std::string key)
      : Error(ErrorKind::MissingFixture, "no scripted response for key '" + key + "'"),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace btx
