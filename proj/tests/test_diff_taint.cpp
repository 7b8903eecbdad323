#include "doctest.h"

#include <random>

#include "clnx/diff_taint.hpp"
#include "clnx/error.hpp"
#include "support.hpp"

using namespace clnx;
using clnx::testing::slurp;

TEST_CASE("mutex commit: anchors and spans") {
  const auto hunks = parse_diff(slurp(CLNX_TEST_DATA "/util_mutex.diff"));
  REQUIRE(hunks.size() == 4);
  CHECK(hunks[0].truncated);  // the stray `@@ -212,7 +212,7 @@` has no body
  std::vector<int> anchors;
  for (const DiffHunk& h : hunks) {
    for (int p : h.removed_new_positions) anchors.push_back(p);
  }
  CHECK(anchors == std::vector<int>{120, 307, 555});
  CHECK(hunks[1].removed_old_lines == std::vector<int>{120});
  CHECK(hunks[1].added_new_lines == std::vector<int>{120});
  CHECK(hunks[1].file_path == "server/util_mutex.c");

  const auto spans = taint_spans(hunks, 3);
  CHECK(spans == std::vector<TaintSpan>{{117, 123, SpanOrigin::RemovalAnchor},
                                        {304, 310, SpanOrigin::RemovalAnchor},
                                        {552, 558, SpanOrigin::RemovalAnchor}});
}

TEST_CASE("hunk header forms") {
  auto h = parse_diff("@@ -5 +7,2 @@ ctx\n-a\n+b\n+c\n");
  REQUIRE(h.size() == 1);
  CHECK(h[0].old_start == 5);
  CHECK(h[0].old_len == 1);
  CHECK(h[0].new_len == 2);
  CHECK(h[0].added_new_lines == std::vector<int>{7, 8});
  CHECK(h[0].removed_new_positions == std::vector<int>{7});

  // pure deletion: the new side names the line before the removal
  h = parse_diff("@@ -10,2 +9,0 @@\n-x\n-y\n");
  CHECK(h[0].removed_old_lines == std::vector<int>{10, 11});
  CHECK(h[0].removed_new_positions == std::vector<int>{10, 10});
  CHECK(taint_spans(h, 1) == std::vector<TaintSpan>{{9, 11, SpanOrigin::RemovalAnchor}});
}

TEST_CASE("diff errors") {
  try {
    parse_diff("@@ -a +1 @@\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedHunkHeader);
    CHECK(e.line() == 1);
  }
  try {
    parse_diff("@@ -1,1 +1,1 @@\n-a\n+b\n+c\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LineCountMismatch);
  }
  // a following file header is not an excess change line
  CHECK_NOTHROW(parse_diff("@@ -1 +1 @@\n-a\n+b\n--- a/x\n+++ b/x\n@@ -3 +3 @@\n-c\n+d\n"));
  // a body cut short is flagged, not rejected
  const auto h = parse_diff("@@ -1,4 +1,4 @@\n a\n-b\n");
  CHECK(h[0].truncated);
}

TEST_CASE("random diffs round-trip their line numbers") {
  std::mt19937 rng(11);
  for (int round = 0; round < 300; ++round) {
    const auto g = clnx::testing::random_diff(rng, 1 + round % 5);
    const auto hunks = parse_diff(g.text);
    std::vector<int> removed, added, pos;
    for (const DiffHunk& h : hunks) {
      CHECK_FALSE(h.truncated);
      CHECK(h.file_path == "src/f.c");
      removed.insert(removed.end(), h.removed_old_lines.begin(), h.removed_old_lines.end());
      added.insert(added.end(), h.added_new_lines.begin(), h.added_new_lines.end());
      pos.insert(pos.end(), h.removed_new_positions.begin(), h.removed_new_positions.end());
    }
    REQUIRE(removed == g.removed_old);
    REQUIRE(added == g.added_new);
    REQUIRE(pos == g.removed_new_pos);
  }
}

TEST_CASE("spans: runs, merging, clamping") {
  DiffHunk h;
  h.removed_old_lines = {10, 11, 20};
  h.removed_new_positions = {10, 10, 18};
  h.added_new_lines = {2, 3};
  const auto spans = taint_spans({h}, 2);
  CHECK(spans == std::vector<TaintSpan>{{1, 5, SpanOrigin::AddedLines},
                                        {8, 12, SpanOrigin::RemovalAnchor},
                                        {16, 20, SpanOrigin::RemovalAnchor}});
  // touching spans merge; removal origin wins
  CHECK(merge_spans({{1, 3, SpanOrigin::AddedLines}, {4, 6, SpanOrigin::RemovalAnchor}}) ==
        std::vector<TaintSpan>{{1, 6, SpanOrigin::RemovalAnchor}});
  CHECK(taint_spans({}, 3).empty());
}

TEST_CASE("mark_tainted agrees with the per-line reference") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> line(-5, 70);
  std::uniform_int_distribution<int> len(0, 8);
  for (int round = 0; round < 300; ++round) {
    const int last = 20 + round % 40;
    const Cfg cfg = clnx::testing::random_line_blocks(rng, last);
    std::vector<TaintSpan> spans;
    for (int k = 0; k < 1 + round % 4; ++k) {
      const int a = line(rng);
      spans.push_back({a, a + len(rng), SpanOrigin::AddedLines});
    }
    const MarkResult r = mark_tainted(cfg, spans, last);
    const auto expect = clnx::testing::brute_force_taint(cfg, spans, last);
    int count = 0;
    for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
      REQUIRE(r.cfg.blocks[b].tainted == expect[b]);
      count += expect[b];
    }
    CHECK(r.tainted_count == count);
    for (const TaintSpan& s : spans) {
      const bool outside = s.last < 1 || s.first > last;
      CHECK(outside == (std::find(r.out_of_range.begin(), r.out_of_range.end(), s) != r.out_of_range.end()));
    }
  }
}

TEST_CASE("synthetic blocks are never tainted and stale flags are cleared") {
  std::mt19937 rng(1);
  Cfg cfg = clnx::testing::random_line_blocks(rng, 10);
  for (BasicBlock& b : cfg.blocks) b.tainted = true;
  const MarkResult r = mark_tainted(cfg, {{1, 1, SpanOrigin::AddedLines}}, 10);
  CHECK(r.cfg.blocks[0].tainted);
  CHECK_FALSE(r.cfg.blocks.back().tainted);
  CHECK(r.tainted_count == 1);
}

TEST_CASE("clipping is reported") {
  std::mt19937 rng(2);
  const Cfg cfg = clnx::testing::random_line_blocks(rng, 10);
  CHECK(mark_tainted(cfg, {{8, 14, SpanOrigin::AddedLines}}, 10).clipped);
  CHECK_FALSE(mark_tainted(cfg, {{2, 4, SpanOrigin::AddedLines}}, 10).clipped);
}

TEST_CASE("filter_hunks matches path suffixes on component boundaries") {
  const auto hunks = parse_diff(
      "diff --git a/server/util_mutex.c b/server/util_mutex.c\n@@ -1 +1 @@\n-a\n+b\n"
      "diff --git a/lib/mutex.c b/lib/mutex.c\n@@ -1 +1 @@\n-a\n+b\n");
  CHECK(filter_hunks(hunks, "server/util_mutex.c").size() == 1);
  CHECK(filter_hunks(hunks, "util_mutex.c").size() == 1);
  CHECK(filter_hunks(hunks, "b/lib/mutex.c").size() == 1);
  CHECK(filter_hunks(hunks, "mutex.c").size() == 1);  // not a suffix of util_mutex.c at a boundary
  CHECK(filter_hunks(hunks, "").size() == 2);
}

TEST_CASE("rebasing and fuzzy anchoring") {
  CHECK(rebase_spans({{117, 123, SpanOrigin::RemovalAnchor}}, 110) ==
        std::vector<TaintSpan>{{8, 14, SpanOrigin::RemovalAnchor}});

  const std::string func = slurp(CLNX_TEST_DATA "/util_mutex_excerpt.c");
  const auto hunks = parse_diff(slurp(CLNX_TEST_DATA "/util_mutex.diff"));
  CHECK(infer_start_line(hunks, func) == 110);
  CHECK_FALSE(infer_start_line(hunks, "int f() { return 0; }").has_value());
}
