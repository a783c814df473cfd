#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coursemi {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (TSV rows, config lines).
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a data-model rule.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Missing or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced by a numeric primitive, or a non-finite loss.
class NumericFault : public Error {
 public:
  using Error::Error;
};

// Incompatible tensor shapes or out-of-range indices passed to a primitive.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace coursemi
