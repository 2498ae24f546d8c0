#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace climatekb {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violated a documented contract (bad record, unknown id, bad score).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Syntax error at a 1-based line/column of some text input.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ", column " +
                        std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace climatekb
