#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clnx/cfg.hpp"

namespace clnx {

struct DiffHunk {
  int old_start = 0;
  int old_len = 0;
  int new_start = 0;
  int new_len = 0;
  std::vector<int> removed_old_lines;
  std::vector<int> added_new_lines;
  // Post-image position at which each removed line used to sit; parallel to
  // removed_old_lines.
  std::vector<int> removed_new_positions;
  std::string file_path;
  bool truncated = false;  // body shorter than the header declares

  // Body text, kept for fuzzy anchoring of records without a start line.
  std::vector<std::pair<int, std::string>> context_new;  // (post-image line, text)
  std::vector<std::pair<int, std::string>> added_text;   // (post-image line, text)
  std::vector<std::string> removed_text;
};

/// Parses unified diff text. Lines outside hunks (commit headers, `diff --git`,
/// index lines, `---`/`+++`) are skipped; `+++ b/...` and `diff --git` set the
/// file path of subsequent hunks. A body cut short is flagged `truncated`; a
/// body with more change lines than declared raises LineCountMismatch.
std::vector<DiffHunk> parse_diff(std::string_view diff_text);

enum class SpanOrigin { RemovalAnchor, AddedLines };
enum class Coordinate { PostImage };

struct TaintSpan {
  int first = 1;  // l_s
  int last = 1;   // l_e
  SpanOrigin origin = SpanOrigin::RemovalAnchor;

  bool operator==(const TaintSpan&) const = default;
};

inline constexpr int kDefaultWindow = 3;

/// Tainted post-image line spans: every run of removed lines anchors at its
/// post-image position, every run of added lines anchors at itself, each
/// anchor widens by `window` lines on both sides, then overlapping or
/// touching spans merge.
std::vector<TaintSpan> taint_spans(const std::vector<DiffHunk>& hunks, int window = kDefaultWindow,
                                   Coordinate coordinate = Coordinate::PostImage);

/// Merges overlapping/adjacent spans; output sorted and pairwise separated.
std::vector<TaintSpan> merge_spans(std::vector<TaintSpan> spans);

struct MarkResult {
  Cfg cfg;
  int tainted_count = 0;
  // Spans lying entirely outside [1, function_last_line]; they are dropped.
  std::vector<TaintSpan> out_of_range;
  bool clipped = false;  // some span was clipped to the function
};

/// Sets `tainted` on every non-synthetic block whose line range intersects a
/// span. Spans must already be in function-local coordinates.
MarkResult mark_tainted(Cfg cfg, const std::vector<TaintSpan>& spans, int function_last_line);

/// Keeps hunks of `file_path` (suffix match on path components); hunks with no
/// recorded path always pass. An empty filter keeps everything.
std::vector<DiffHunk> filter_hunks(const std::vector<DiffHunk>& hunks, std::string_view file_path);

/// Shifts file-level spans into function-local lines given the 1-based file
/// line of the function's first line.
std::vector<TaintSpan> rebase_spans(const std::vector<TaintSpan>& spans, int func_start_line);

/// Estimates the function's file start line by matching hunk text (context
/// and added lines exactly, removed lines by token overlap) against the
/// function. Returns nullopt when nothing matches.
std::optional<int> infer_start_line(const std::vector<DiffHunk>& hunks, std::string_view function_text);

}  // namespace clnx
