#pragma once

#include <stdexcept>
#include <string>

namespace hybridfm {

// Inputs violate an operation's contract.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& message)
      : std::runtime_error(message) {}
};

// A file could not be parsed; the message names the offending section or
// line.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& message)
      : std::runtime_error(message) {}
};

// A model file was written by an incompatible format version.
class VersionError : public std::runtime_error {
 public:
  explicit VersionError(const std::string& message)
      : std::runtime_error(message) {}
};

}  // namespace hybridfm
