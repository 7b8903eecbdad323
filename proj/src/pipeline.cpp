#include <stdexcept>

#include "clnx/error.hpp"
#include "clnx/pipeline.hpp"

namespace clnx {

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(name);
  }
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

}  // namespace

TaintedCfg analyze_record(std::string_view source, std::string_view diff_text, const PipelineOptions& options) {
  TaintedCfg out;
  const auto tokens = stage("lex", [&] { return lex(source); });
  const auto statements = stage("segment", [&] { return segment(tokens); });
  Cfg cfg = stage("build_cfg", [&] { return build_cfg(statements); });
  cfg = stage("normalize_exits", [&] { return normalize_exits(std::move(cfg)); });
  cfg = stage("flatten_loops", [&] {
    Cfg flat = flatten_loops(std::move(cfg));
    validate(flat);
    return flat;
  });

  auto hunks = stage("parse_diff", [&] { return filter_hunks(parse_diff(diff_text), options.file_path); });
  if (blank(diff_text) || hunks.empty()) out.flags.emplace_back("no_diff");

  std::vector<TaintSpan> spans = stage("taint_spans", [&] { return taint_spans(hunks, options.window); });
  if (!spans.empty()) {
    std::optional<int> start = options.func_start_line;
    if (!start) {
      start = infer_start_line(hunks, source);
      out.flags.emplace_back(start ? "fuzzy_anchor" : "unanchored");
    }
    spans = start ? rebase_spans(spans, *start) : std::vector<TaintSpan>{};
  }

  const int last_line = static_cast<int>(split_lines(source).size());
  MarkResult marked = stage("mark_tainted", [&] { return mark_tainted(std::move(cfg), spans, last_line); });
  if (!marked.out_of_range.empty()) out.flags.emplace_back("coordinate_mismatch");
  if (marked.clipped) out.flags.emplace_back("spans_clipped");
  out.cfg = std::move(marked.cfg);
  out.tainted_blocks = marked.tainted_count;
  out.spans = std::move(spans);
  return out;
}

PipelineResult naturalize_record(std::string_view source, std::string_view diff_text,
                                 const PipelineOptions& options) {
  if (options.structural_only && options.token_only) {
    throw std::invalid_argument("structural_only and token_only are mutually exclusive");
  }
  const RuleSet& rules = options.rules ? *options.rules : default_rules();
  PipelineResult result;
  const int original_lines = static_cast<int>(split_lines(source).size());

  if (options.token_only) {
    stage("lex", [&] { return lex(source); });
    std::vector<MappedLine> lines;
    int n = 0;
    for (std::string& l : split_lines(source)) lines.push_back({++n, std::move(l), false});
    result.output = stage("apply_rules", [&] { return apply_rules(lines, rules); });
    result.output.original_line_count = original_lines;
    result.output.original_chars = source.size();
    return result;
  }

  TaintedCfg tainted = analyze_record(source, diff_text, options);
  result.flags = std::move(tainted.flags);
  result.spans = std::move(tainted.spans);
  result.tainted_blocks = tainted.tainted_blocks;
  result.cfg = std::move(tainted.cfg);
  result.path = stage("select_critical_path", [&] { return select_critical_path(result.cfg); });
  if (result.path.approximate) result.flags.emplace_back("approximate_path");
  const auto mapped = stage("map_back", [&] { return map_back(result.cfg, result.path, source); });

  if (options.structural_only) {
    result.output.text = join_lines(mapped);
    result.output.path_line_count = static_cast<int>(mapped.size());
  } else {
    result.output = stage("apply_rules", [&] { return apply_rules(mapped, rules); });
  }
  result.output.original_line_count = original_lines;
  result.output.original_chars = source.size();
  result.output.naturalized_chars = result.output.text.size();
  return result;
}

}  // namespace clnx
