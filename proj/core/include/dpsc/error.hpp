#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dpsc {

// Violated precondition on an argument value (item-set mismatch, k > N, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid sampler/experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input file. line() is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dpsc
