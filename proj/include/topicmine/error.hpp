#pragma once

#include <stdexcept>
#include <string>

namespace topicmine {

// Process exit codes shared by every subcommand.
enum class ExitCode : int { ok = 0, input_error = 2, numerical_abort = 3 };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::input_error; }
};

/// Malformed input files, invalid UTF-8, alignment mismatches.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or violated operation precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient; aborts the current computation.
class NumericalError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::numerical_abort; }
};

}  // namespace topicmine
