#pragma once

#include <stdexcept>
#include <string>

namespace hetmpc {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input does not fit the cluster (e.g. a shard larger than a small machine).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A randomized algorithm exhausted its retries.
class RunFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace hetmpc
