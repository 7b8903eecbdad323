#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clnx/cfg.hpp"
#include "clnx/diff_taint.hpp"
#include "clnx/naturalize.hpp"
#include "clnx/path_select.hpp"

namespace clnx {

struct PipelineOptions {
  int window = kDefaultWindow;
  bool structural_only = false;  // stop after reverse mapping
  bool token_only = false;       // rewrite every line, no path selection
  const RuleSet* rules = nullptr;  // null = default_rules()
  // 1-based file line of the function's first line. When absent and the
  // diff has hunks, the offset is estimated from hunk text.
  std::optional<int> func_start_line;
  std::string file_path;  // keeps only hunks touching this file
};

struct PipelineResult {
  NaturalizedOutput output;
  Cfg cfg;  // flattened, taint marked; empty under token_only
  CriticalPath path;
  std::vector<TaintSpan> spans;  // function-local
  int tainted_blocks = 0;
  // no_diff, fuzzy_anchor, unanchored, coordinate_mismatch, spans_clipped,
  // approximate_path
  std::vector<std::string> flags;
};

/// Runs the whole chain on one function and its commit diff. Errors carry
/// the name of the stage that raised them.
PipelineResult naturalize_record(std::string_view source, std::string_view diff_text,
                                 const PipelineOptions& options = {});

/// Stages up to taint marking; shared by the analyzer front end.
struct TaintedCfg {
  Cfg cfg;
  std::vector<TaintSpan> spans;
  int tainted_blocks = 0;
  std::vector<std::string> flags;
};

TaintedCfg analyze_record(std::string_view source, std::string_view diff_text, const PipelineOptions& options = {});

}  // namespace clnx
