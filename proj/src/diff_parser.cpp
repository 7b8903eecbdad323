#include <charconv>

#include "clnx/diff_taint.hpp"
#include "clnx/error.hpp"

namespace clnx {

namespace {

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Parses "N" or "N,M" at `s`, advancing it. Count defaults to 1.
bool parse_range(std::string_view& s, int& start, int& len) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), start);
  if (ec != std::errc{} || p == s.data()) return false;
  s.remove_prefix(static_cast<std::size_t>(p - s.data()));
  len = 1;
  if (!s.empty() && s.front() == ',') {
    s.remove_prefix(1);
    auto [q, ec2] = std::from_chars(s.data(), s.data() + s.size(), len);
    if (ec2 != std::errc{} || q == s.data()) return false;
    s.remove_prefix(static_cast<std::size_t>(q - s.data()));
  }
  return start >= 0 && len >= 0;
}

bool parse_hunk_header(std::string_view line, DiffHunk& h) {
  std::string_view s = line;
  if (!starts_with(s, "@@ -")) return false;
  s.remove_prefix(4);
  if (!parse_range(s, h.old_start, h.old_len)) return false;
  if (!starts_with(s, " +")) return false;
  s.remove_prefix(2);
  if (!parse_range(s, h.new_start, h.new_len)) return false;
  return starts_with(s, " @@");
}

std::string strip_side_prefix(std::string_view path) {
  if (starts_with(path, "a/") || starts_with(path, "b/")) path.remove_prefix(2);
  return std::string(path);
}

std::string path_from_git_header(std::string_view line) {
  // diff --git a/x b/y -> y
  const std::size_t pos = line.rfind(" b/");
  if (pos != std::string_view::npos) return std::string(line.substr(pos + 3));
  const std::size_t sp = line.rfind(' ');
  return sp == std::string_view::npos ? std::string{} : strip_side_prefix(line.substr(sp + 1));
}

bool is_file_header(std::string_view line) {
  return starts_with(line, "+++ ") || starts_with(line, "--- ");
}

}  // namespace

std::vector<DiffHunk> parse_diff(std::string_view diff_text) {
  const auto lines = split_lines(diff_text);
  std::vector<DiffHunk> hunks;
  std::string path;
  std::size_t i = 0;
  while (i < lines.size()) {
    const std::string_view line = lines[i];
    if (starts_with(line, "diff --git ")) {
      path = path_from_git_header(line);
      ++i;
      continue;
    }
    if (starts_with(line, "+++ ")) {
      std::string_view p = line.substr(4);
      const std::size_t tab = p.find('\t');
      if (tab != std::string_view::npos) p = p.substr(0, tab);
      if (p != "/dev/null") path = strip_side_prefix(p);
      ++i;
      continue;
    }
    if (!starts_with(line, "@@")) {
      ++i;
      continue;
    }

    DiffHunk h;
    if (!parse_hunk_header(line, h)) {
      throw Error(ErrorCode::MalformedHunkHeader, std::string(line), static_cast<int>(i + 1));
    }
    h.file_path = path;
    const int header_line = static_cast<int>(i + 1);
    // An empty side names the line *before* the change.
    int old_line = h.old_len == 0 ? h.old_start + 1 : h.old_start;
    int new_line = h.new_len == 0 ? h.new_start + 1 : h.new_start;
    int old_seen = 0;
    int new_seen = 0;
    ++i;
    auto mismatch = [&](std::size_t at) {
      throw Error(ErrorCode::LineCountMismatch,
                  "hunk at diff line " + std::to_string(header_line) +
                      " has more body lines than its header declares",
                  static_cast<int>(at + 1));
    };
    while (i < lines.size() && (old_seen < h.old_len || new_seen < h.new_len)) {
      const std::string_view body = lines[i];
      const char tag = body.empty() ? ' ' : body.front();
      const std::string text = body.empty() ? std::string{} : std::string(body.substr(1));
      if (tag == ' ') {
        if (old_seen >= h.old_len || new_seen >= h.new_len) mismatch(i);
        h.context_new.emplace_back(new_line, text);
        ++old_line, ++new_line, ++old_seen, ++new_seen;
      } else if (tag == '-') {
        if (old_seen >= h.old_len) mismatch(i);
        h.removed_old_lines.push_back(old_line);
        h.removed_new_positions.push_back(new_line);
        h.removed_text.push_back(text);
        ++old_line, ++old_seen;
      } else if (tag == '+') {
        if (new_seen >= h.new_len) mismatch(i);
        h.added_new_lines.push_back(new_line);
        h.added_text.emplace_back(new_line, text);
        ++new_line, ++new_seen;
      } else if (tag != '\\') {
        break;
      }
      ++i;
    }
    h.truncated = old_seen < h.old_len || new_seen < h.new_len;
    if (!h.truncated) {
      while (i < lines.size() && starts_with(lines[i], "\\")) ++i;
      if (i < lines.size()) {
        const std::string_view next = lines[i];
        if ((starts_with(next, "+") || starts_with(next, "-")) && !is_file_header(next)) mismatch(i);
      }
    }
    hunks.push_back(std::move(h));
  }
  return hunks;
}

std::vector<DiffHunk> filter_hunks(const std::vector<DiffHunk>& hunks, std::string_view file_path) {
  if (file_path.empty()) return hunks;
  const std::string want = strip_side_prefix(file_path);
  auto suffix_match = [](std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    if (a.substr(a.size() - b.size()) != b) return false;
    return a.size() == b.size() || a[a.size() - b.size() - 1] == '/';
  };
  std::vector<DiffHunk> out;
  for (const DiffHunk& h : hunks) {
    if (h.file_path.empty() || suffix_match(h.file_path, want)) out.push_back(h);
  }
  return out;
}

}  // namespace clnx
