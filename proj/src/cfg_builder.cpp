#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "clnx/cfg.hpp"
#include "clnx/error.hpp"

namespace clnx {

std::vector<std::vector<int>> Cfg::successors() const {
  std::vector<std::vector<int>> out(blocks.size());
  for (const Edge& e : edges) out[e.from].push_back(e.to);
  return out;
}

std::vector<std::vector<int>> Cfg::predecessors() const {
  std::vector<std::vector<int>> out(blocks.size());
  for (const Edge& e : edges) out[e.to].push_back(e.from);
  return out;
}

bool Cfg::has_edge(int from, int to) const {
  return std::any_of(edges.begin(), edges.end(),
                     [&](const Edge& e) { return e.from == from && e.to == to; });
}

bool Cfg::add_edge(int from, int to, bool unreachable) {
  if (has_edge(from, to)) return false;
  edges.push_back({from, to, unreachable});
  return true;
}

int Cfg::add_block(BasicBlock block) {
  block.id = static_cast<int>(blocks.size());
  blocks.push_back(std::move(block));
  return blocks.back().id;
}

namespace {

// ---------------------------------------------------------------------------
// Statement nesting, rebuilt from the flat statement list.

struct Node {
  enum class Kind { Leaf, Seq, Compound, If, Loop, DoLoop, Switch };
  Kind kind = Kind::Leaf;
  int head = 0;
  int close = -1;      // BlockClose of a compound, DoWhile tail of a do loop
  int else_head = -1;  // ElseHeader of an if
  std::vector<Node> children;
};

class StructureParser {
 public:
  explicit StructureParser(const std::vector<Statement>& s) : stmts_(s) {}

  std::vector<Node> parse_all() {
    std::vector<Node> top;
    while (i_ < stmts_.size()) top.push_back(parse_stmt());
    return top;
  }

 private:
  const Statement& at(std::size_t k) const { return stmts_[k]; }

  [[noreturn]] void fail(ErrorCode code, const char* what, std::size_t k) const {
    const int line = k < stmts_.size() ? stmts_[k].lines.first : 0;
    throw Error(code, what, line);
  }

  Node leaf() { return Node{Node::Kind::Leaf, static_cast<int>(i_++), -1, -1, {}}; }

  Node parse_body() {
    if (i_ >= stmts_.size()) fail(ErrorCode::MalformedHeader, "control statement has no body", i_ - 1);
    if (at(i_).kind != StatementKind::Preproc) return parse_stmt();
    Node seq{Node::Kind::Seq, static_cast<int>(i_), -1, -1, {}};
    while (i_ < stmts_.size() && at(i_).kind == StatementKind::Preproc) seq.children.push_back(leaf());
    if (i_ >= stmts_.size()) fail(ErrorCode::MalformedHeader, "control statement has no body", i_ - 1);
    seq.children.push_back(parse_stmt());
    return seq;
  }

  Node parse_stmt() {
    const Statement& s = at(i_);
    switch (s.kind) {
      case StatementKind::BlockOpen: {
        Node n{Node::Kind::Compound, static_cast<int>(i_++), -1, -1, {}};
        while (i_ < stmts_.size() && at(i_).kind != StatementKind::BlockClose) {
          n.children.push_back(parse_stmt());
        }
        if (i_ >= stmts_.size()) fail(ErrorCode::UnbalancedBraces, "block never closed", n.head);
        n.close = static_cast<int>(i_++);
        return n;
      }
      case StatementKind::BlockClose:
        fail(ErrorCode::UnbalancedBraces, "unexpected closing brace", i_);
      case StatementKind::CondHeader:
        break;
      default:
        return leaf();
    }
    Node n;
    n.head = static_cast<int>(i_++);
    switch (s.control) {
      case Control::If:
        n.kind = Node::Kind::If;
        n.children.push_back(parse_body());
        if (i_ < stmts_.size() && at(i_).kind == StatementKind::ElseHeader) {
          n.else_head = static_cast<int>(i_++);
          n.children.push_back(parse_body());
        }
        return n;
      case Control::While:
      case Control::For:
      case Control::ForEver:
        n.kind = Node::Kind::Loop;
        n.children.push_back(parse_body());
        return n;
      case Control::Switch:
        n.kind = Node::Kind::Switch;
        n.children.push_back(parse_body());
        return n;
      case Control::Do:
        n.kind = Node::Kind::DoLoop;
        n.children.push_back(parse_body());
        if (i_ >= stmts_.size() || at(i_).control != Control::DoWhile) {
          fail(ErrorCode::MalformedHeader, "'do' body not followed by 'while'", n.head);
        }
        n.close = static_cast<int>(i_++);
        return n;
      default:
        n.kind = Node::Kind::Leaf;
        return n;
    }
  }

  const std::vector<Statement>& stmts_;
  std::size_t i_ = 0;
};

// ---------------------------------------------------------------------------
// Statement-level successor wiring. Index `exit_` stands for the function exit.

class Wiring {
 public:
  explicit Wiring(const std::vector<Statement>& s)
      : stmts_(s), exit_(static_cast<int>(s.size())), succ_(s.size()) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k].kind == StatementKind::GotoLabel) labels_.emplace(s[k].label, static_cast<int>(k));
    }
  }

  std::vector<std::vector<int>> run(const std::vector<Node>& top) {
    wire_sequence(top, exit_, -1, -1);
    for (const auto& [from, name] : gotos_) {
      int target = exit_;
      if (!name.empty()) {
        auto it = labels_.find(name);
        if (it == labels_.end()) {
          throw Error(ErrorCode::UnknownGotoTarget, "no label '" + name + "' in function",
                      stmts_[from].lines.first);
        }
        target = it->second;
      }
      link(from, target);
    }
    return std::move(succ_);
  }

 private:
  static int entry(const Node& n) {
    if (n.kind == Node::Kind::Seq) return entry(n.children.front());
    return n.head;
  }

  void link(int from, int to) {
    auto& s = succ_[from];
    if (std::find(s.begin(), s.end(), to) == s.end()) s.push_back(to);
  }

  void wire_sequence(const std::vector<Node>& seq, int next, int brk, int cont) {
    for (std::size_t k = 0; k < seq.size(); ++k) {
      const int follow = k + 1 < seq.size() ? entry(seq[k + 1]) : next;
      wire(seq[k], follow, brk, cont);
    }
  }

  void collect_cases(const Node& n, std::vector<int>& out, bool& has_default) const {
    if (n.kind == Node::Kind::Switch) return;
    if (n.kind == Node::Kind::Leaf) {
      const Control c = stmts_[n.head].control;
      if (c == Control::Case || c == Control::Default) out.push_back(n.head);
      if (c == Control::Default) has_default = true;
      return;
    }
    for (const Node& child : n.children) collect_cases(child, out, has_default);
  }

  void wire(const Node& n, int next, int brk, int cont) {
    switch (n.kind) {
      case Node::Kind::Leaf: {
        const Statement& s = stmts_[n.head];
        switch (s.control) {
          case Control::Return: link(n.head, exit_); break;
          case Control::Goto: gotos_.emplace_back(n.head, s.label); break;
          case Control::Break: link(n.head, brk >= 0 ? brk : next); break;
          case Control::Continue: link(n.head, cont >= 0 ? cont : next); break;
          default: link(n.head, next); break;
        }
        return;
      }
      case Node::Kind::Seq:
        wire_sequence(n.children, next, brk, cont);
        return;
      case Node::Kind::Compound:
        link(n.head, n.children.empty() ? n.close : entry(n.children.front()));
        wire_sequence(n.children, n.close, brk, cont);
        link(n.close, next);
        return;
      case Node::Kind::If:
        link(n.head, entry(n.children[0]));
        link(n.head, n.else_head >= 0 ? n.else_head : next);
        wire(n.children[0], next, brk, cont);
        if (n.else_head >= 0) {
          link(n.else_head, entry(n.children[1]));
          wire(n.children[1], next, brk, cont);
        }
        return;
      case Node::Kind::Loop:
        link(n.head, entry(n.children[0]));
        if (stmts_[n.head].control != Control::ForEver) link(n.head, next);
        wire(n.children[0], n.head, next, n.head);
        return;
      case Node::Kind::DoLoop:
        link(n.head, entry(n.children[0]));
        wire(n.children[0], n.close, next, n.close);
        link(n.close, entry(n.children[0]));
        link(n.close, next);
        return;
      case Node::Kind::Switch: {
        std::vector<int> cases;
        bool has_default = false;
        collect_cases(n.children[0], cases, has_default);
        for (int c : cases) link(n.head, c);
        if (!has_default) link(n.head, next);
        // A switch body that does not start at a label is dead until one.
        wire(n.children[0], next, next, cont);
        return;
      }
    }
  }

  const std::vector<Statement>& stmts_;
  int exit_;
  std::vector<std::vector<int>> succ_;
  std::map<std::string, int> labels_;
  std::vector<std::pair<int, std::string>> gotos_;
};

bool ends_block(const Statement& s) {
  return s.kind == StatementKind::Jump || s.kind == StatementKind::CondHeader;
}

bool starts_block(const Statement& s) {
  return s.kind == StatementKind::GotoLabel || s.kind == StatementKind::CaseLabel ||
         s.control == Control::DoWhile;
}

std::vector<bool> reachable_from(const std::vector<std::vector<int>>& succ, int root) {
  std::vector<bool> seen(succ.size(), false);
  if (root < 0 || root >= static_cast<int>(succ.size())) return seen;
  std::vector<int> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : succ[v]) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

// Back edges of a DFS rooted at the entry, continued from unvisited blocks
// in id order so dead regions are covered too.
std::vector<Edge> find_back_edges(const Cfg& cfg) {
  const auto succ = cfg.successors();
  const std::size_t n = cfg.blocks.size();
  enum Color : unsigned char { White, Gray, Black };
  std::vector<Color> color(n, White);
  std::vector<Edge> back;
  auto dfs = [&](int root) {
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    color[root] = Gray;
    while (!stack.empty()) {
      auto& [v, k] = stack.back();
      if (k < succ[v].size()) {
        const int w = succ[v][k++];
        if (color[w] == Gray) {
          back.push_back({v, w, false});
        } else if (color[w] == White) {
          color[w] = Gray;
          stack.emplace_back(w, 0);
        }
      } else {
        color[v] = Black;
        stack.pop_back();
      }
    }
  };
  if (cfg.entry_id >= 0 && static_cast<std::size_t>(cfg.entry_id) < n) dfs(cfg.entry_id);
  for (std::size_t v = 0; v < n; ++v) {
    if (color[v] == White) dfs(static_cast<int>(v));
  }
  return back;
}

}  // namespace

Cfg build_cfg(const std::vector<Statement>& statements) {
  Cfg cfg;
  const int n = static_cast<int>(statements.size());
  if (n == 0) {
    BasicBlock entry;
    entry.is_entry = true;
    cfg.entry_id = cfg.add_block(std::move(entry));
    return normalize_exits(std::move(cfg));
  }

  StructureParser parser(statements);
  const auto top = parser.parse_all();
  auto succ = Wiring(statements).run(top);
  succ.emplace_back();  // the exit sentinel has no successors

  const auto live = reachable_from(succ, 0);
  // Predecessors that share the statement's liveness; dead code never splits
  // a live block.
  std::vector<std::vector<int>> preds(n + 1);
  for (int s = 0; s < n; ++s) {
    for (int t : succ[s]) {
      if (live[s] == live[t]) preds[t].push_back(s);
    }
  }

  std::vector<int> block_of(n, -1);
  for (int s = 0; s < n; ++s) {
    bool leader = s == 0 || starts_block(statements[s]) || ends_block(statements[s - 1]) ||
                  live[s] != live[s - 1] || preds[s].size() != 1 || preds[s][0] != s - 1 ||
                  succ[s - 1].size() != 1 || succ[s - 1][0] != s;
    if (leader) {
      BasicBlock b;
      b.unreachable = !live[s];
      block_of[s] = cfg.add_block(std::move(b));
    } else {
      block_of[s] = block_of[s - 1];
    }
    BasicBlock& b = cfg.blocks[block_of[s]];
    const LineRange& r = statements[s].lines;
    if (b.statements.empty()) {
      b.lines = r;
    } else {
      b.lines.first = std::min(b.lines.first, r.first);
      b.lines.last = std::max(b.lines.last, r.last);
    }
    b.statements.push_back(statements[s]);
  }

  BasicBlock exit;
  exit.is_exit = true;
  cfg.exit_id = cfg.add_block(std::move(exit));
  cfg.entry_id = 0;
  cfg.blocks[0].is_entry = true;

  for (int s = 0; s < n; ++s) {
    const bool last_in_block = s + 1 == n || block_of[s + 1] != block_of[s];
    if (!last_in_block) continue;
    const int from = block_of[s];
    for (int t : succ[s]) {
      const int to = t == n ? cfg.exit_id : block_of[t];
      if (live[s]) {
        cfg.add_edge(from, to);
      } else if (t == n || !live[t]) {
        cfg.add_edge(from, to, /*unreachable=*/true);
      }
    }
  }

  cfg = normalize_exits(std::move(cfg));

  const auto reach = reachable_from(cfg.successors(), cfg.entry_id);
  for (const BasicBlock& b : cfg.blocks) {
    if (!b.unreachable && !reach[b.id]) {
      throw Error(ErrorCode::DisconnectedBlock,
                  "block " + std::to_string(b.id) + " not reachable from entry", b.lines.first);
    }
  }
  return cfg;
}

Cfg normalize_exits(Cfg cfg) {
  int exit = -1;
  if (cfg.exit_id >= 0 && cfg.exit_id < static_cast<int>(cfg.blocks.size()) &&
      cfg.blocks[cfg.exit_id].is_synthetic() && cfg.blocks[cfg.exit_id].statements.empty()) {
    exit = cfg.exit_id;
  }
  if (exit < 0) {
    BasicBlock b;
    b.is_exit = true;
    exit = cfg.add_block(std::move(b));
  }
  for (BasicBlock& b : cfg.blocks) b.is_exit = b.id == exit;
  cfg.exit_id = exit;
  // The exit never branches.
  std::erase_if(cfg.edges, [&](const Edge& e) { return e.from == exit; });

  std::vector<bool> has_succ(cfg.blocks.size(), false);
  for (const Edge& e : cfg.edges) has_succ[e.from] = true;
  for (const BasicBlock& b : cfg.blocks) {
    if (b.id != exit && !has_succ[b.id]) cfg.add_edge(b.id, exit, b.unreachable);
  }
  return cfg;
}

Cfg flatten_loops(Cfg cfg) {
  const std::vector<Edge> back = find_back_edges(cfg);
  if (back.empty()) return cfg;

  const auto original_pred = cfg.predecessors();
  std::erase_if(cfg.edges, [&](const Edge& e) {
    return std::find(back.begin(), back.end(), e) != back.end();
  });

  for (const Edge& e : back) {
    const BasicBlock& src = cfg.blocks[e.from];
    const bool do_tail = !src.statements.empty() && src.statements.back().control == Control::DoWhile;
    cfg.blocks[do_tail ? e.from : e.to].is_loop_header = true;
  }

  for (const Edge& e : back) {
    const auto succ = cfg.successors();
    if (!succ[e.from].empty() || e.from == cfg.exit_id) continue;

    // Natural loop of the back edge: blocks reaching the tail without
    // passing through the header.
    std::vector<bool> in_loop(cfg.blocks.size(), false);
    in_loop[e.to] = true;
    std::vector<int> stack;
    if (!in_loop[e.from]) {
      in_loop[e.from] = true;
      stack.push_back(e.from);
    }
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int p : original_pred[v]) {
        if (!in_loop[p]) {
          in_loop[p] = true;
          stack.push_back(p);
        }
      }
    }

    int target = -1;
    for (std::size_t v = 0; v < cfg.blocks.size(); ++v) {
      if (!in_loop[v]) continue;
      for (int w : succ[v]) {
        if (in_loop[w] || w == cfg.exit_id) continue;
        if (target < 0 || w < target) target = w;
      }
    }
    if (target >= 0 && reachable_from(succ, target)[e.from]) target = -1;
    if (target < 0) target = cfg.exit_id;
    if (target >= 0) cfg.add_edge(e.from, target, cfg.blocks[e.from].unreachable);
  }
  return cfg;
}

Cfg build_flat_cfg(std::string_view source) {
  return flatten_loops(normalize_exits(build_cfg(segment(lex(source)))));
}

std::vector<int> topological_order(const Cfg& cfg) {
  const std::size_t n = cfg.blocks.size();
  std::vector<int> indeg(n, 0);
  const auto succ = cfg.successors();
  for (const Edge& e : cfg.edges) ++indeg[e.to];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.push(static_cast<int>(v));
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int w : succ[v]) {
      if (--indeg[w] == 0) ready.push(w);
    }
  }
  if (order.size() != n) order.clear();
  return order;
}

bool is_acyclic(const Cfg& cfg) {
  return cfg.blocks.empty() || !topological_order(cfg).empty();
}

int count_back_edges(const Cfg& cfg) { return static_cast<int>(find_back_edges(cfg).size()); }

unsigned long long count_paths(const Cfg& cfg, unsigned long long cap) {
  const auto order = topological_order(cfg);
  if (order.empty() || cfg.entry_id < 0 || cfg.exit_id < 0) return 0;
  std::vector<unsigned long long> ways(cfg.blocks.size(), 0);
  ways[cfg.entry_id] = 1;
  const auto succ = cfg.successors();
  for (int v : order) {
    if (ways[v] == 0) continue;
    for (int w : succ[v]) ways[w] = std::min(cap, ways[w] + ways[v]);
  }
  return ways[cfg.exit_id];
}

void validate(const Cfg& cfg) {
  auto fail = [](const std::string& what, int line = 0) {
    throw Error(ErrorCode::DisconnectedBlock, what, line);
  };
  const int n = static_cast<int>(cfg.blocks.size());
  if (cfg.entry_id < 0 || cfg.entry_id >= n) fail("missing entry block");
  if (cfg.exit_id < 0 || cfg.exit_id >= n) fail("missing exit block");
  int entries = 0;
  int exits = 0;
  for (const BasicBlock& b : cfg.blocks) {
    entries += b.is_entry;
    exits += b.is_exit;
  }
  if (entries != 1 || !cfg.blocks[cfg.entry_id].is_entry) fail("entry block is not unique");
  if (exits != 1 || !cfg.blocks[cfg.exit_id].is_exit) fail("exit block is not unique");
  for (std::size_t i = 0; i < cfg.edges.size(); ++i) {
    const Edge& e = cfg.edges[i];
    if (e.to == cfg.entry_id) fail("entry block has an incoming edge");
    if (e.from == cfg.exit_id) fail("exit block has an outgoing edge");
    for (std::size_t j = i + 1; j < cfg.edges.size(); ++j) {
      if (cfg.edges[j] == e) fail("duplicate edge");
    }
  }
  if (!is_acyclic(cfg)) fail("graph still has a cycle");
  const auto forward = reachable_from(cfg.successors(), cfg.entry_id);
  const auto backward = reachable_from(cfg.predecessors(), cfg.exit_id);
  for (const BasicBlock& b : cfg.blocks) {
    if (!b.unreachable && !forward[b.id]) {
      fail("block " + std::to_string(b.id) + " not reachable from entry", b.lines.first);
    }
    if (!backward[b.id]) {
      fail("block " + std::to_string(b.id) + " does not reach the exit", b.lines.first);
    }
  }
}

std::string to_dot(const Cfg& cfg, const std::vector<int>& highlight) {
  std::set<std::pair<int, int>> on_path;
  for (std::size_t k = 1; k < highlight.size(); ++k) on_path.emplace(highlight[k - 1], highlight[k]);
  std::ostringstream os;
  os << "digraph cfg {\n  node [shape=box];\n";
  for (const BasicBlock& b : cfg.blocks) {
    os << "  b" << b.id << " [label=\"B" << b.id;
    if (!b.is_synthetic()) os << " [" << b.lines.first << "-" << b.lines.last << "]";
    if (b.is_entry) os << " entry";
    if (b.is_exit) os << " exit";
    if (b.is_loop_header) os << " loop";
    if (b.unreachable) os << " dead";
    os << "\"";
    if (b.tainted) os << ", style=filled, fillcolor=\"#f4cccc\"";
    os << "];\n";
  }
  for (const Edge& e : cfg.edges) {
    os << "  b" << e.from << " -> b" << e.to;
    if (e.unreachable) {
      os << " [style=dashed]";
    } else if (on_path.count({e.from, e.to})) {
      os << " [penwidth=3]";
    }
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace clnx
