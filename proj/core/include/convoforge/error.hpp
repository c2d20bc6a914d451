#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace convoforge {

// Base class for every error the library raises on bad input or bad
// configuration. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input at a known line of a text stream.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed record that violates the data model (missing field, bad value).
class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Precondition violated by an in-memory argument or configuration value.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace convoforge
