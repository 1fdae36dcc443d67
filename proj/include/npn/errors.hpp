#ifndef NPN_ERRORS_HPP_
#define NPN_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace npn {

// Malformed input record. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input parses but breaks a data-model invariant.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::size_t line, std::string field, const std::string& what)
      : std::runtime_error((line == 0 ? std::string() : "line " + std::to_string(line) + ": ") +
                           "field '" + field + "': " + what),
        line_(line),
        field_(std::move(field)) {}
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

// Bad configuration value; `field` is the dotted key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Non-finite value in a numeric computation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace npn

#endif  // NPN_ERRORS_HPP_
