#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nhdp {

// Bad hyperparameters, malformed input files, CLI misuse. The CLI maps this
// to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Parse failure in an input file; carries a 1-based line number when known.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ConfigError(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  explicit ParseError(const std::string& what) : ConfigError(what), line_(0) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Broken internal invariant: count tables out of sync, sampler protocol
// violated. The CLI maps this to exit code 3.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace nhdp
