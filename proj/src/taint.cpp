#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "clnx/diff_taint.hpp"

namespace clnx {

namespace {

// Consecutive runs of `lines` (assumed ascending) mapped through `pos`.
template <typename PosFn>
void for_each_run(const std::vector<int>& lines, PosFn pos,
                  const std::function<void(int, int)>& emit) {
  std::size_t k = 0;
  while (k < lines.size()) {
    std::size_t end = k + 1;
    while (end < lines.size() && lines[end] == lines[end - 1] + 1) ++end;
    int lo = pos(k);
    int hi = lo;
    for (std::size_t j = k; j < end; ++j) {
      lo = std::min(lo, pos(j));
      hi = std::max(hi, pos(j));
    }
    emit(lo, hi);
    k = end;
  }
}

}  // namespace

std::vector<TaintSpan> merge_spans(std::vector<TaintSpan> spans) {
  std::sort(spans.begin(), spans.end(), [](const TaintSpan& a, const TaintSpan& b) {
    return a.first != b.first ? a.first < b.first : a.last < b.last;
  });
  std::vector<TaintSpan> out;
  for (const TaintSpan& s : spans) {
    if (!out.empty() && s.first <= out.back().last + 1) {
      TaintSpan& m = out.back();
      m.last = std::max(m.last, s.last);
      if (s.origin == SpanOrigin::RemovalAnchor) m.origin = SpanOrigin::RemovalAnchor;
    } else {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<TaintSpan> taint_spans(const std::vector<DiffHunk>& hunks, int window, Coordinate) {
  window = std::max(window, 0);
  std::vector<TaintSpan> spans;
  auto widen = [&](int lo, int hi, SpanOrigin origin) {
    lo = std::max(lo, 1);
    hi = std::max(hi, lo);
    spans.push_back({std::max(1, lo - window), hi + window, origin});
  };
  for (const DiffHunk& h : hunks) {
    // A removal occupies no post-image lines; it anchors where the next
    // surviving line now sits.
    for_each_run(
        h.removed_old_lines, [&](std::size_t k) { return h.removed_new_positions[k]; },
        [&](int lo, int hi) { widen(lo, hi, SpanOrigin::RemovalAnchor); });
    for_each_run(
        h.added_new_lines, [&](std::size_t k) { return h.added_new_lines[k]; },
        [&](int lo, int hi) { widen(lo, hi, SpanOrigin::AddedLines); });
  }
  return merge_spans(std::move(spans));
}

MarkResult mark_tainted(Cfg cfg, const std::vector<TaintSpan>& spans, int function_last_line) {
  MarkResult result;
  std::vector<TaintSpan> usable;
  for (const TaintSpan& s : spans) {
    if (s.last < 1 || s.first > function_last_line) {
      result.out_of_range.push_back(s);
      continue;
    }
    TaintSpan c = s;
    c.first = std::max(c.first, 1);
    c.last = std::min(c.last, function_last_line);
    if (!(c == s)) result.clipped = true;
    usable.push_back(c);
  }
  for (BasicBlock& b : cfg.blocks) {
    b.tainted = false;
    if (b.is_synthetic()) continue;
    for (const TaintSpan& s : usable) {
      if (s.first <= b.lines.last && b.lines.first <= s.last) {
        b.tainted = true;
        break;
      }
    }
    result.tainted_count += b.tainted;
  }
  result.cfg = std::move(cfg);
  return result;
}

std::vector<TaintSpan> rebase_spans(const std::vector<TaintSpan>& spans, int func_start_line) {
  std::vector<TaintSpan> out;
  out.reserve(spans.size());
  for (TaintSpan s : spans) {
    s.first -= func_start_line - 1;
    s.last -= func_start_line - 1;
    out.push_back(s);
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

// Lines like "}", "break;" or "else" match everywhere and carry no position.
bool distinctive(const std::string& t) {
  int alnum = 0;
  for (char c : t) alnum += std::isalnum(static_cast<unsigned char>(c)) != 0;
  return t.size() >= 6 && alnum >= 4;
}

std::set<std::string> words(std::string_view s) {
  std::set<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      cur += c;
    } else if (!cur.empty()) {
      out.insert(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(std::move(cur));
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& w : a) common += b.count(w);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

}  // namespace

std::optional<int> infer_start_line(const std::vector<DiffHunk>& hunks, std::string_view function_text) {
  const auto lines = split_lines(function_text);
  std::unordered_map<std::string, std::vector<int>> by_text;
  std::vector<std::set<std::string>> line_words(lines.size());
  for (std::size_t k = 0; k < lines.size(); ++k) {
    std::string t = trim(lines[k]);
    line_words[k] = words(t);
    if (distinctive(t)) by_text[t].push_back(static_cast<int>(k + 1));
  }

  std::map<int, double> votes;
  auto vote_exact = [&](int post_line, const std::string& text) {
    auto it = by_text.find(trim(text));
    if (it == by_text.end()) return;
    const double w = 1.0 / static_cast<double>(it->second.size());
    for (int local : it->second) votes[post_line - local + 1] += w;
  };
  for (const DiffHunk& h : hunks) {
    for (const auto& [line, text] : h.context_new) vote_exact(line, text);
    for (const auto& [line, text] : h.added_text) vote_exact(line, text);
    for (std::size_t k = 0; k < h.removed_text.size(); ++k) {
      const std::string t = trim(h.removed_text[k]);
      if (!distinctive(t)) continue;
      const auto w = words(t);
      double best = 0.5;
      int best_line = -1;
      for (std::size_t j = 0; j < lines.size(); ++j) {
        const double sim = jaccard(w, line_words[j]);
        if (sim > best) {
          best = sim;
          best_line = static_cast<int>(j + 1);
        }
      }
      if (best_line > 0) votes[h.removed_new_positions[k] - best_line + 1] += 0.5;
    }
  }
  std::optional<int> start;
  double top = 0.0;
  for (const auto& [offset, weight] : votes) {
    if (weight > top) {
      top = weight;
      start = offset;
    }
  }
  return start;
}

}  // namespace clnx
