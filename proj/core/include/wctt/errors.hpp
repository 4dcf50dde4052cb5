#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace wctt {

/// Invalid platform, flow or experiment parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A modelling assumption was broken at run time (non-contiguous contention
/// domain, virtual-channel exhaustion, buffer overflow, ...). Indicates a bug
/// or a configuration outside the supported model.
class ModelViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed input file. Carries the 1-based line number and offending field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) +
                           (field.empty() ? std::string{} : ", field '" + field + "'") + ": " +
                           message),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace wctt
