#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace htgcn {

// Base of every error the library throws. kind() is a stable machine-readable
// tag used by the CLI when it reports failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "shape_error"; }
};

class GraphError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "graph_error"; }
};

class UnknownTypeError : public GraphError {
 public:
  UnknownTypeError(const std::string& which, int tag)
      : GraphError("unknown " + which + " type tag " + std::to_string(tag)), tag_(tag) {}
  int tag() const noexcept { return tag_; }
  const char* kind() const noexcept override { return "unknown_type"; }

 private:
  int tag_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& field, const std::string& detail)
      : Error("line " + std::to_string(line) + ": field '" + field + "': " + detail),
        line_(line),
        field_(field) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }
  const char* kind() const noexcept override { return "parse_error"; }

 private:
  std::size_t line_;
  std::string field_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& detail)
      : Error("invalid " + field + ": " + detail), field_(field) {}
  const std::string& field() const noexcept { return field_; }
  const char* kind() const noexcept override { return "config_error"; }

 private:
  std::string field_;
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric_error"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

}  // namespace htgcn
