#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pvsoc {

enum class ErrorCode {
  InvalidArgument,
  Config,
  MalformedRow,
  DuplicateTimestamp,
  EmptyFile,
  GapTooLong,
  InsufficientHistory,
  InsufficientData,
  DegenerateInput,
  UnfittedModel,
  NonConvergence,
  SeriesMisaligned,
  EmptySpan,
  Io,
  InvariantBreach,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Row-level parse failure; `line` is 1-based and counts the header.
class MalformedRowError : public Error {
 public:
  MalformedRowError(std::size_t line, const std::string& what)
      : Error(ErrorCode::MalformedRow,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pvsoc
