#pragma once

#include <stdexcept>
#include <string>

namespace cstariff {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: files, configuration, arguments. Maps to CLI exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

class DegenerateProfile : public InputError {
 public:
  using InputError::InputError;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class ScenarioMismatch : public InputError {
 public:
  using InputError::InputError;
};

class IllPosed : public InputError {
 public:
  using InputError::InputError;
};

class MissingHours : public InputError {
 public:
  using InputError::InputError;
};

class NegativeLoad : public InputError {
 public:
  using InputError::InputError;
};

class MalformedRow : public InputError {
 public:
  MalformedRow(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Exit code 2.
class CalibrationFailed : public Error {
 public:
  using Error::Error;
};

/// A post-condition the library guarantees did not hold. Exit code 3.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace cstariff
