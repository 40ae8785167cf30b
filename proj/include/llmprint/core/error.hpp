#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace llmprint {

/// Base of every exception thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t expected, std::size_t actual)
      : Error("length mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Malformed or unsupported persisted document.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A backend was asked for something it does not advertise.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace llmprint
