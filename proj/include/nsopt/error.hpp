#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nsopt {

enum class ErrorCode {
  InvalidArgument,
  NonFinite,
  NonSymmetric,
  DimensionMismatch,
  NonPositiveStep,
  InvertedBounds,
  UnboundedLipschitz,
  DegenerateDenominator,
  NonFiniteIterate,
  Unsupported,
  NotCertified,
  AuditFailure,
  ParseError,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Parse failures remember the offending 1-based line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

// An audit that found a counterexample; `index` is the first violating iteration.
class AuditError : public Error {
 public:
  AuditError(std::size_t index, const std::string& what)
      : Error(ErrorCode::AuditFailure, what + " (first violation at index " + std::to_string(index) + ")"),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace nsopt
