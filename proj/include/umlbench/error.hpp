#pragma once

#include <stdexcept>
#include <string>

namespace umlbench {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a function receives an empty sample or list it cannot summarize.
class EmptyInputError : public Error {
 public:
  explicit EmptyInputError(const std::string& what) : Error("empty input: " + what) {}
};

/// I/O failure (unreadable directory, unwritable output, ...).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or command-line arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace umlbench
