#include "doctest.h"

#include <cmath>
#include <random>

#include "clnx/error.hpp"
#include "clnx/path_select.hpp"
#include "clnx/pipeline.hpp"
#include "support.hpp"

using namespace clnx;
using clnx::testing::slurp;
using clnx::testing::word_statement;

namespace {

// Blocks 0..n-1 with block 0 entry and n-1 synthetic exit.
Cfg skeleton(int n, const std::vector<std::pair<int, int>>& edges) {
  Cfg cfg;
  for (int i = 0; i < n; ++i) {
    BasicBlock b;
    b.id = i;
    b.is_entry = i == 0;
    b.is_exit = i == n - 1;
    if (i != n - 1) {
      b.lines = {i + 1, i + 1};
      b.statements.push_back(word_statement({"s" + std::to_string(i)}, i + 1));
    }
    cfg.blocks.push_back(std::move(b));
  }
  cfg.entry_id = 0;
  cfg.exit_id = n - 1;
  for (auto [a, b] : edges) cfg.add_edge(a, b);
  return cfg;
}

}  // namespace

TEST_CASE("diamond picks the tainted branch") {
  Cfg cfg = skeleton(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  cfg.blocks[2].tainted = true;
  const CriticalPath p = select_critical_path(cfg);
  CHECK(p.block_ids == std::vector<int>{0, 2, 3});
  CHECK(p.tainted_covered == 1);
  CHECK(p.length == 3);
  CHECK_FALSE(p.approximate);
}

TEST_CASE("without taint the shorter branch wins") {
  // 0 -> 1 -> 6 (3 blocks) versus 0 -> 2 -> 3 -> 4 -> 6 (5 blocks)
  const Cfg cfg = skeleton(7, {{0, 1}, {1, 6}, {0, 2}, {2, 3}, {3, 4}, {4, 6}, {5, 6}});
  const CriticalPath p = select_critical_path(cfg);
  CHECK(p.block_ids == std::vector<int>{0, 1, 6});
  CHECK(p.length == 3);
}

TEST_CASE("coverage beats length") {
  Cfg cfg = skeleton(6, {{0, 1}, {1, 5}, {0, 2}, {2, 3}, {3, 4}, {4, 5}});
  cfg.blocks[3].tainted = true;
  const CriticalPath p = select_critical_path(cfg);
  CHECK(p.block_ids == std::vector<int>{0, 2, 3, 4, 5});
  CHECK(p.tainted_covered == 1);
}

TEST_CASE("entropy then id order breaks ties") {
  Cfg cfg = skeleton(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  cfg.blocks[1].statements = {word_statement({"s0", "s0", "s0"}, 2)};
  cfg.blocks[2].statements = {word_statement({"x", "y", "z"}, 3)};
  CHECK(select_critical_path(cfg).block_ids == std::vector<int>{0, 2, 3});

  cfg.blocks[2].statements = {word_statement({"s0", "s0", "s0"}, 3)};
  CHECK(select_critical_path(cfg).block_ids == std::vector<int>{0, 1, 3});
}

TEST_CASE("path entropy") {
  Cfg cfg = skeleton(2, {{0, 1}});
  auto with_tokens = [&](std::vector<std::string> words) {
    cfg.blocks[0].statements = {word_statement(words, 1)};
    return path_entropy(cfg, {0, 1});
  };
  CHECK(with_tokens({"a", "a", "a", "a"}) == doctest::Approx(0.0));
  CHECK(with_tokens({"a", "b"}) == doctest::Approx(1.0));
  CHECK(with_tokens({"a", "a", "b", "b", "c", "c", "d", "d"}) == doctest::Approx(2.0));
  CHECK(with_tokens({}) == 0.0);
  // comments do not count
  Statement s = word_statement({"a", "b"}, 1);
  Token c;
  c.kind = TokenKind::Comment;
  c.text = "/* c */";
  s.tokens.push_back(c);
  cfg.blocks[0].statements = {s};
  CHECK(path_entropy(cfg, {0, 1}) == doctest::Approx(1.0));
}

TEST_CASE("DP optimum equals exhaustive enumeration") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> size(2, 12);
  for (int round = 0; round < 300; ++round) {
    const Cfg cfg = clnx::testing::random_dag(rng, size(rng), 0.35, 0.4);
    const auto [covered, length] = clnx::testing::brute_force_optimum(cfg);
    const CriticalPath p = select_critical_path(cfg);
    REQUIRE(p.tainted_covered == covered);
    REQUIRE(p.length == length);
    REQUIRE(p.block_ids.front() == cfg.entry_id);
    REQUIRE(p.block_ids.back() == cfg.exit_id);
    for (std::size_t k = 1; k < p.block_ids.size(); ++k) REQUIRE(cfg.has_edge(p.block_ids[k - 1], p.block_ids[k]));
    REQUIRE(clnx::testing::covered_by(cfg, p.block_ids) == p.tainted_covered);
    REQUIRE(p.entropy == doctest::Approx(path_entropy(cfg, p.block_ids)));
  }
}

TEST_CASE("tie cap falls back to a deterministic greedy choice") {
  // 8 chained diamonds: 256 co-optimal paths
  std::vector<std::pair<int, int>> edges;
  int join = 0;
  int next = 1;
  for (int k = 0; k < 8; ++k) {
    const int a = next++, b = next++, j = next++;
    edges.insert(edges.end(), {{join, a}, {join, b}, {a, j}, {b, j}});
    join = j;
  }
  const int exit = next;
  edges.emplace_back(join, exit);
  const Cfg cfg = skeleton(exit + 1, edges);
  const CriticalPath approx = select_critical_path(cfg, 64);
  CHECK(approx.approximate);
  CHECK(approx.length == 1 + 8 * 2 + 1);
  CHECK(select_critical_path(cfg, 64).block_ids == approx.block_ids);
  const CriticalPath exact = select_critical_path(cfg, 1000);
  CHECK_FALSE(exact.approximate);
  CHECK(exact.entropy >= approx.entropy - 1e-9);
}

TEST_CASE("unreachable exit raises NoPath") {
  const Cfg cfg = skeleton(3, {{0, 1}});
  try {
    select_critical_path(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoPath);
  }
}

TEST_CASE("map_back: straight line keeps every line") {
  const std::string src = "void f(void)\n{\n    a();\n}\n";
  const Cfg cfg = build_flat_cfg(src);
  const auto lines = map_back(cfg, select_critical_path(cfg), src);
  REQUIRE(lines.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(lines[static_cast<std::size_t>(k)].line == k + 1);
  CHECK(join_lines(lines) == src);
}

TEST_CASE("map_back: diamond drops the other branch") {
  const std::string src = "int f(int a)\n{\n    if (a)\n        a = 1;\n    else\n        a = 2;\n    return a;\n}\n";
  Cfg cfg = build_flat_cfg(src);
  const MarkResult m = mark_tainted(cfg, {{4, 4, SpanOrigin::AddedLines}}, 8);
  const auto lines = map_back(m.cfg, select_critical_path(m.cfg), src);
  std::vector<int> nums;
  for (const auto& l : lines) nums.push_back(l.line);
  CHECK(nums == std::vector<int>{1, 2, 3, 4, 7});
}

TEST_CASE("map_back: loop header annotated exactly once (golden)") {
  const std::string src = slurp(CLNX_TEST_DATA "/loop_fixture.c");
  const std::string diff = slurp(CLNX_TEST_DATA "/loop_fixture.diff");
  PipelineOptions opts;
  opts.func_start_line = 1;
  opts.structural_only = true;
  const PipelineResult r = naturalize_record(src, diff, opts);
  CHECK(r.output.text == slurp(CLNX_TEST_DATA "/loop_fixture.expected"));
  std::size_t count = 0;
  for (std::size_t at = 0; (at = r.output.text.find("loop:", at)) != std::string::npos; ++at) ++count;
  CHECK(count == 1);
}

TEST_CASE("map_back widens blocks to whole multi-line comments") {
  const std::string src = "void f(void)\n{\n    a(); /* starts\n    ends */ b();\n}\n";
  const Cfg cfg = build_flat_cfg(src);
  const auto lines = map_back(cfg, select_critical_path(cfg), src);
  CHECK(lines.size() == 5);
}

TEST_CASE("rendered loop annotation keeps indentation") {
  MappedLine l{3, "    while (x) {", true};
  CHECK(l.rendered() == "    loop: while (x) {");
}
