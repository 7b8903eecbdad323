#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clnx/cfg.hpp"

namespace clnx {

struct CriticalPath {
  std::vector<int> block_ids;
  int tainted_covered = 0;
  int length = 0;
  double entropy = 0.0;  // bits
  bool approximate = false;  // tie enumeration cap hit; greedy tiebreak used
};

/// Ordering key of a partial path: more tainted blocks first, then fewer blocks.
struct PathScore {
  int covered = 0;
  int length = 0;

  bool better_than(const PathScore& o) const {
    return covered != o.covered ? covered > o.covered : length < o.length;
  }
  bool operator==(const PathScore&) const = default;
};

inline constexpr std::size_t kDefaultTieCap = 64;

/// Picks the entry-to-exit path covering the most tainted blocks, then the
/// shortest, then the one with the highest token entropy, then the
/// lexicographically smallest id sequence. One topological pass keeps the
/// best score per block with all predecessors that achieve it; co-optimal
/// paths are enumerated only at reconstruction, up to `tie_cap`.
CriticalPath select_critical_path(const Cfg& cfg, std::size_t tie_cap = kDefaultTieCap);

/// Shannon entropy (bits) of the token-text distribution over the
/// non-comment tokens of the given blocks.
double path_entropy(const Cfg& cfg, const std::vector<int>& block_ids);

struct MappedLine {
  int line = 0;  // 1-based line in the function text
  std::string text;
  bool loop_header = false;

  std::string rendered() const;  // text with the `loop:` annotation applied
};

inline constexpr std::string_view kLoopAnnotation = "loop:";

/// Source lines of the path in path order: signature first, each block's
/// full lines (widened to whole multi-line comments and literals), duplicates
/// dropped. The first line of a loop-header block carries the annotation.
std::vector<MappedLine> map_back(const Cfg& cfg, const CriticalPath& path, std::string_view source);

std::string join_lines(const std::vector<MappedLine>& lines);

}  // namespace clnx
