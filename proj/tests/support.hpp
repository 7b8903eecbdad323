// Shared fixtures and brute-force oracles for the unit and acceptance suites.
#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "clnx/cfg.hpp"
#include "clnx/diff_taint.hpp"
#include "clnx/path_select.hpp"

namespace clnx::testing {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Statement word_statement(const std::vector<std::string>& words, int line) {
  Statement s;
  s.lines = {line, line};
  for (const std::string& w : words) {
    Token t;
    t.kind = TokenKind::Identifier;
    t.text = w;
    t.line = t.end_line = line;
    s.tokens.push_back(t);
  }
  return s;
}

/// Random DAG over `n` blocks, edges only from lower to higher id, with a
/// guaranteed entry->exit chain. Block i covers line i+1; the exit is synthetic.
inline Cfg random_dag(std::mt19937& rng, int n, double edge_p, double taint_p) {
  Cfg cfg;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> word(0, 5);
  for (int i = 0; i < n; ++i) {
    BasicBlock b;
    b.id = i;
    if (i == n - 1) {
      b.is_exit = true;
    } else {
      b.lines = {i + 1, i + 1};
      std::vector<std::string> words;
      const int len = 1 + word(rng);
      for (int k = 0; k < len; ++k) words.push_back(std::string(1, static_cast<char>('a' + word(rng))));
      b.statements.push_back(word_statement(words, i + 1));
      b.tainted = u(rng) < taint_p;
    }
    b.is_entry = i == 0;
    cfg.blocks.push_back(std::move(b));
  }
  cfg.entry_id = 0;
  cfg.exit_id = n - 1;
  // chain through a random subset so the exit is reachable
  int at = 0;
  while (at != n - 1) {
    std::uniform_int_distribution<int> step(at + 1, n - 1);
    const int next = step(rng);
    cfg.add_edge(at, next);
    at = next;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < edge_p) cfg.add_edge(i, j);
    }
  }
  return cfg;
}

/// Every entry->exit path, by depth-first enumeration.
inline std::vector<std::vector<int>> all_paths(const Cfg& cfg) {
  const auto succ = cfg.successors();
  std::vector<std::vector<int>> out;
  std::vector<int> cur{cfg.entry_id};
  std::function<void(int)> dfs = [&](int v) {
    if (v == cfg.exit_id) {
      out.push_back(cur);
      return;
    }
    for (int s : succ[static_cast<std::size_t>(v)]) {
      cur.push_back(s);
      dfs(s);
      cur.pop_back();
    }
  };
  dfs(cfg.entry_id);
  return out;
}

inline int covered_by(const Cfg& cfg, const std::vector<int>& path) {
  std::set<int> ids;
  for (int id : path) {
    if (cfg.blocks[static_cast<std::size_t>(id)].tainted) ids.insert(id);
  }
  return static_cast<int>(ids.size());
}

/// Exhaustive optimum: (max covered, then min length).
inline std::pair<int, int> brute_force_optimum(const Cfg& cfg) {
  std::pair<int, int> best{-1, 0};
  for (const auto& p : all_paths(cfg)) {
    const int c = covered_by(cfg, p);
    const int len = static_cast<int>(p.size());
    if (c > best.first || (c == best.first && len < best.second)) best = {c, len};
  }
  return best;
}

/// Blocks partitioning [1, last_line] into consecutive ranges, plus an exit.
inline Cfg random_line_blocks(std::mt19937& rng, int last_line) {
  Cfg cfg;
  std::uniform_int_distribution<int> size(1, 6);
  int line = 1;
  while (line <= last_line) {
    BasicBlock b;
    b.id = static_cast<int>(cfg.blocks.size());
    b.lines = {line, std::min(last_line, line + size(rng) - 1)};
    line = b.lines.last + 1;
    cfg.blocks.push_back(std::move(b));
  }
  BasicBlock exit;
  exit.id = static_cast<int>(cfg.blocks.size());
  exit.is_exit = true;
  cfg.blocks.push_back(exit);
  cfg.blocks.front().is_entry = true;
  cfg.entry_id = 0;
  cfg.exit_id = exit.id;
  for (std::size_t k = 0; k + 1 < cfg.blocks.size(); ++k) cfg.add_edge(static_cast<int>(k), static_cast<int>(k + 1));
  return cfg;
}

/// Per-line reference: a block is tainted iff one of its lines lies in a span
/// and inside the function.
inline std::vector<bool> brute_force_taint(const Cfg& cfg, const std::vector<TaintSpan>& spans, int last_line) {
  std::vector<bool> line_hit(static_cast<std::size_t>(last_line) + 2, false);
  for (const TaintSpan& s : spans) {
    for (int l = s.first; l <= s.last; ++l) {
      if (l >= 1 && l <= last_line) line_hit[static_cast<std::size_t>(l)] = true;
    }
  }
  std::vector<bool> out;
  for (const BasicBlock& b : cfg.blocks) {
    bool hit = false;
    if (!b.is_synthetic()) {
      for (int l = b.lines.first; l <= b.lines.last; ++l) hit = hit || line_hit[static_cast<std::size_t>(l)];
    }
    out.push_back(hit);
  }
  return out;
}

/// A random well-formed unified diff and the line numbers it should yield.
struct GeneratedDiff {
  std::string text;
  std::vector<int> removed_old;
  std::vector<int> added_new;
  std::vector<int> removed_new_pos;
};

inline GeneratedDiff random_diff(std::mt19937& rng, int hunks) {
  GeneratedDiff g;
  std::ostringstream os;
  os << "diff --git a/src/f.c b/src/f.c\n--- a/src/f.c\n+++ b/src/f.c\n";
  std::uniform_int_distribution<int> gap(1, 15);
  std::uniform_int_distribution<int> op(0, 2);
  std::uniform_int_distribution<int> body_len(1, 10);
  int old_line = 1;
  int new_line = 1;
  for (int h = 0; h < hunks; ++h) {
    const int skip = gap(rng);
    old_line += skip;
    new_line += skip;
    const int old_start = old_line;
    const int new_start = new_line;
    std::vector<std::string> body;
    const int n = body_len(rng);
    int old_len = 0;
    int new_len = 0;
    for (int k = 0; k < n; ++k) {
      switch (op(rng)) {
        case 0:
          body.push_back(" ctx" + std::to_string(k));
          ++old_line, ++new_line, ++old_len, ++new_len;
          break;
        case 1:
          body.push_back("-gone" + std::to_string(k));
          g.removed_old.push_back(old_line);
          g.removed_new_pos.push_back(new_line);
          ++old_line, ++old_len;
          break;
        default:
          body.push_back("+new" + std::to_string(k));
          g.added_new.push_back(new_line);
          ++new_line, ++new_len;
          break;
      }
    }
    os << "@@ -" << (old_len == 0 ? old_start - 1 : old_start) << "," << old_len << " +"
       << (new_len == 0 ? new_start - 1 : new_start) << "," << new_len << " @@\n";
    for (const auto& l : body) os << l << "\n";
  }
  g.text = os.str();
  return g;
}

}  // namespace clnx::testing
