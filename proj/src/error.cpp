#include "clnx/error.hpp"

namespace clnx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnterminatedString: return "UnterminatedString";
    case ErrorCode::UnterminatedComment: return "UnterminatedComment";
    case ErrorCode::UnbalancedBraces: return "UnbalancedBraces";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnknownGotoTarget: return "UnknownGotoTarget";
    case ErrorCode::DisconnectedBlock: return "DisconnectedBlock";
    case ErrorCode::MalformedHunkHeader: return "MalformedHunkHeader";
    case ErrorCode::LineCountMismatch: return "LineCountMismatch";
    case ErrorCode::CoordinateMismatch: return "CoordinateMismatch";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::RecordParse: return "RecordParse";
    case ErrorCode::RuleParse: return "RuleParse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, int line, int col)
    : std::runtime_error(format(code, message, line, col, {})),
      code_(code),
      detail_(std::move(message)),
      line_(line),
      col_(col) {}

Error Error::with_stage(std::string stage) const {
  Error e(code_, detail_, line_, col_);
  static_cast<std::runtime_error&>(e) =
      std::runtime_error(format(code_, detail_, line_, col_, stage));
  e.stage_ = std::move(stage);
  return e;
}

std::string Error::format(ErrorCode code, const std::string& message, int line,
                          int col, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += stage + ": ";
  out += to_string(code);
  if (line > 0) {
    out += " at " + std::to_string(line);
    if (col > 0) out += ":" + std::to_string(col);
  }
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace clnx
