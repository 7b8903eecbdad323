#pragma once

#include <string>
#include <vector>

#include "clnx/source_model.hpp"

namespace clnx {

struct BasicBlock {
  int id = 0;
  std::vector<Statement> statements;
  LineRange lines;  // [0,0] for synthetic blocks
  bool is_entry = false;
  bool is_exit = false;
  bool is_loop_header = false;
  bool tainted = false;
  bool unreachable = false;  // dead code kept for line coverage

  bool is_synthetic() const { return lines.is_sentinel(); }
};

struct Edge {
  int from = 0;
  int to = 0;
  bool unreachable = false;  // attaches dead code to the exit

  bool operator==(const Edge& o) const { return from == o.from && to == o.to; }
};

/// Block graph of one function. Block ids are dense indices into `blocks`.
struct Cfg {
  std::vector<BasicBlock> blocks;
  std::vector<Edge> edges;
  int entry_id = -1;
  int exit_id = -1;

  std::vector<std::vector<int>> successors() const;
  std::vector<std::vector<int>> predecessors() const;
  bool has_edge(int from, int to) const;
  /// Adds the edge unless present. Returns true when added.
  bool add_edge(int from, int to, bool unreachable = false);
  int add_block(BasicBlock block);
};

/// Builds the block graph from segmented statements. Returns and gotos are
/// wired to a synthetic exit block; loops still contain their back edges.
Cfg build_cfg(const std::vector<Statement>& statements);

/// Appends a synthetic exit when none exists and links every block without
/// a successor to it.
Cfg normalize_exits(Cfg cfg);

/// Removes every DFS back edge, labels loop headers and reconnects loop
/// bodies that lost their only successor to the loop's exit.
Cfg flatten_loops(Cfg cfg);

/// Convenience: lex, segment, build, normalize and flatten.
Cfg build_flat_cfg(std::string_view source);

/// Checks single entry/exit, acyclicity, reachability and edge uniqueness.
/// Throws Error{DisconnectedBlock} describing the first violation.
void validate(const Cfg& cfg);

bool is_acyclic(const Cfg& cfg);
/// Number of back edges a DFS from the entry (then from unvisited blocks) finds.
int count_back_edges(const Cfg& cfg);
/// Topological order (Kahn, smallest id first); empty when the graph has a cycle.
std::vector<int> topological_order(const Cfg& cfg);

/// Number of distinct entry-to-exit paths, saturating at `cap`.
unsigned long long count_paths(const Cfg& cfg, unsigned long long cap = 1ull << 62);

/// Graphviz rendering; edges between consecutive ids of `highlight` are drawn bold.
std::string to_dot(const Cfg& cfg, const std::vector<int>& highlight = {});

}  // namespace clnx
