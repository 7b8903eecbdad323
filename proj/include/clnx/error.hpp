#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clnx {

enum class ErrorCode {
  UnterminatedString,
  UnterminatedComment,
  UnbalancedBraces,
  MalformedHeader,
  UnknownGotoTarget,
  DisconnectedBlock,
  MalformedHunkHeader,
  LineCountMismatch,
  CoordinateMismatch,
  NoPath,
  FileNotFound,
  RecordParse,
  RuleParse,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Error raised by every stage of the toolchain. `line`/`col` are 1-based
/// source positions when the error has one, 0 otherwise. `stage` is filled in
/// by the pipeline driver so callers can tell which step rejected the input.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, int line = 0, int col = 0);

  ErrorCode code() const noexcept { return code_; }
  int line() const noexcept { return line_; }
  int col() const noexcept { return col_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  Error with_stage(std::string stage) const;

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            int line, int col, const std::string& stage);

  ErrorCode code_;
  std::string detail_;
  int line_;
  int col_;
  std::string stage_;
};

}  // namespace clnx
