#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "clnx/error.hpp"
#include "clnx/path_select.hpp"

namespace clnx {

namespace {

void count_tokens(const BasicBlock& b, std::map<std::string, long>& freq, long& total) {
  for (const Statement& s : b.statements) {
    for (const Token& t : s.tokens) {
      if (!t.significant()) continue;
      ++freq[t.text];
      ++total;
    }
  }
}

double entropy_of(const std::map<std::string, long>& freq, long total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto& [text, n] : freq) {
    const double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

constexpr double kEntropyTolerance = 1e-9;

}  // namespace

double path_entropy(const Cfg& cfg, const std::vector<int>& block_ids) {
  std::map<std::string, long> freq;
  long total = 0;
  for (int id : block_ids) count_tokens(cfg.blocks.at(static_cast<std::size_t>(id)), freq, total);
  return entropy_of(freq, total);
}

CriticalPath select_critical_path(const Cfg& cfg, std::size_t tie_cap) {
  const std::size_t n = cfg.blocks.size();
  if (cfg.entry_id < 0 || cfg.exit_id < 0 || static_cast<std::size_t>(cfg.entry_id) >= n ||
      static_cast<std::size_t>(cfg.exit_id) >= n) {
    throw Error(ErrorCode::NoPath, "graph has no entry or exit block");
  }
  const std::vector<int> order = topological_order(cfg);
  if (order.size() != n) throw Error(ErrorCode::NoPath, "graph has a cycle");

  const auto succ = cfg.successors();
  auto gain = [&](int v) { return cfg.blocks[static_cast<std::size_t>(v)].tainted ? 1 : 0; };

  // best[v]: score of the best entry->v path (v included); ties keeps every
  // predecessor achieving it.
  std::vector<std::optional<PathScore>> best(n);
  std::vector<std::vector<int>> ties(n);
  std::vector<unsigned long long> ways(n, 0);
  const unsigned long long saturate = static_cast<unsigned long long>(tie_cap) + 1;
  best[static_cast<std::size_t>(cfg.entry_id)] = PathScore{gain(cfg.entry_id), 1};
  ways[static_cast<std::size_t>(cfg.entry_id)] = 1;

  for (int u : order) {
    const auto& bu = best[static_cast<std::size_t>(u)];
    if (!bu) continue;
    for (int v : succ[static_cast<std::size_t>(u)]) {
      const PathScore cand{bu->covered + gain(v), bu->length + 1};
      auto& bv = best[static_cast<std::size_t>(v)];
      auto& wv = ways[static_cast<std::size_t>(v)];
      if (!bv || cand.better_than(*bv)) {
        bv = cand;
        ties[static_cast<std::size_t>(v)] = {u};
        wv = ways[static_cast<std::size_t>(u)];
      } else if (cand == *bv) {
        ties[static_cast<std::size_t>(v)].push_back(u);
        wv = std::min(saturate, wv + ways[static_cast<std::size_t>(u)]);
      }
    }
  }
  const auto& final_score = best[static_cast<std::size_t>(cfg.exit_id)];
  if (!final_score) throw Error(ErrorCode::NoPath, "exit block is unreachable from the entry");
  for (auto& t : ties) std::sort(t.begin(), t.end());

  CriticalPath result;
  result.tainted_covered = final_score->covered;
  result.length = final_score->length;

  if (ways[static_cast<std::size_t>(cfg.exit_id)] <= tie_cap) {
    // Enumerate every co-optimal path backwards from the exit.
    std::optional<std::vector<int>> chosen;
    double chosen_h = 0.0;
    std::vector<int> rev{cfg.exit_id};
    auto consider = [&]() {
      std::vector<int> path(rev.rbegin(), rev.rend());
      const double h = path_entropy(cfg, path);
      if (!chosen || h > chosen_h + kEntropyTolerance ||
          (std::abs(h - chosen_h) <= kEntropyTolerance && path < *chosen)) {
        chosen = std::move(path);
        chosen_h = h;
      }
    };
    auto walk = [&](auto& self, int v) -> void {
      if (v == cfg.entry_id) {
        consider();
        return;
      }
      for (int p : ties[static_cast<std::size_t>(v)]) {
        rev.push_back(p);
        self(self, p);
        rev.pop_back();
      }
    };
    walk(walk, cfg.exit_id);
    result.block_ids = std::move(*chosen);
    result.entropy = chosen_h;
    return result;
  }

  // Too many ties: walk back from the exit, at each step taking the
  // predecessor that maximizes the entropy of the suffix built so far.
  result.approximate = true;
  std::map<std::string, long> freq;
  long total = 0;
  std::vector<int> rev{cfg.exit_id};
  count_tokens(cfg.blocks[static_cast<std::size_t>(cfg.exit_id)], freq, total);
  int v = cfg.exit_id;
  while (v != cfg.entry_id) {
    int pick = -1;
    double pick_h = 0.0;
    for (int p : ties[static_cast<std::size_t>(v)]) {
      auto f = freq;
      long t = total;
      count_tokens(cfg.blocks[static_cast<std::size_t>(p)], f, t);
      const double h = entropy_of(f, t);
      if (pick < 0 || h > pick_h + kEntropyTolerance) {
        pick = p;
        pick_h = h;
      }
    }
    count_tokens(cfg.blocks[static_cast<std::size_t>(pick)], freq, total);
    rev.push_back(pick);
    v = pick;
  }
  result.block_ids.assign(rev.rbegin(), rev.rend());
  result.entropy = entropy_of(freq, total);
  return result;
}

std::string MappedLine::rendered() const {
  if (!loop_header) return text;
  const std::size_t indent = text.find_first_not_of(" \t");
  if (indent == std::string::npos) return text + std::string(kLoopAnnotation);
  return text.substr(0, indent) + std::string(kLoopAnnotation) + " " + text.substr(indent);
}

std::vector<MappedLine> map_back(const Cfg& cfg, const CriticalPath& path, std::string_view source) {
  const auto lines = split_lines(source);
  const int line_count = static_cast<int>(lines.size());

  // Multi-line tokens must be emitted whole or the excerpt stops lexing.
  std::vector<LineRange> multi;
  for (const Token& t : lex(source, LexOptions{true})) {
    if (t.end_line > t.line) multi.push_back({t.line, t.end_line});
  }
  auto widen = [&](LineRange r) {
    bool grew = true;
    while (grew) {
      grew = false;
      for (const LineRange& m : multi) {
        if (!m.intersects(r)) continue;
        if (m.first < r.first || m.last > r.last) {
          r.first = std::min(r.first, m.first);
          r.last = std::max(r.last, m.last);
          grew = true;
        }
      }
    }
    r.first = std::max(r.first, 1);
    r.last = std::min(r.last, line_count);
    return r;
  };

  std::vector<MappedLine> out;
  std::vector<int> slot(static_cast<std::size_t>(line_count) + 1, -1);
  auto emit = [&](LineRange r) -> int {
    int first_new = -1;
    r = widen(r);
    for (int l = r.first; l <= r.last; ++l) {
      if (slot[static_cast<std::size_t>(l)] >= 0) continue;
      slot[static_cast<std::size_t>(l)] = static_cast<int>(out.size());
      if (first_new < 0) first_new = static_cast<int>(out.size());
      out.push_back({l, lines[static_cast<std::size_t>(l - 1)], false});
    }
    return first_new;
  };

  for (const BasicBlock& b : cfg.blocks) {
    for (const Statement& s : b.statements) {
      if (s.kind == StatementKind::Signature) emit(s.lines);
    }
  }
  for (int id : path.block_ids) {
    const BasicBlock& b = cfg.blocks.at(static_cast<std::size_t>(id));
    if (b.is_synthetic()) continue;
    const int first_new = emit(b.lines);
    if (!b.is_loop_header) continue;
    int at = first_new;
    if (at < 0) {
      const LineRange r = widen(b.lines);
      at = slot[static_cast<std::size_t>(r.first)];
    }
    if (at >= 0) out[static_cast<std::size_t>(at)].loop_header = true;
  }
  return out;
}

std::string join_lines(const std::vector<MappedLine>& lines) {
  std::string out;
  for (const MappedLine& l : lines) {
    out += l.rendered();
    out += '\n';
  }
  return out;
}

}  // namespace clnx
