#pragma once

#include <stdexcept>
#include <string>

namespace uniord {

/// An argument violated an operation's input domain (bad index, length mismatch, sigma <= 0).
class DomainError : public std::invalid_argument {
public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Incompatible or malformed configuration (head/loss mismatch, bad soft-target spec).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be read, parsed, or written.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Optimization diverged (NaN loss, non-finite likelihood).
class TrainingError : public std::runtime_error {
public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace uniord
