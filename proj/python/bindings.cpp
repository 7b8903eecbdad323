#include <optional>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "clnx/corpus.hpp"
#include "clnx/error.hpp"
#include "clnx/naturalize.hpp"
#include "clnx/pipeline.hpp"
#include "clnx/serialize.hpp"

namespace py = pybind11;
using namespace clnx;

namespace {

std::optional<RuleSet> rules_from(const std::optional<std::string>& path) {
  if (!path) return std::nullopt;
  return load_rule_file(*path);
}

PipelineOptions options(int window, bool structural_only, bool token_only, std::optional<int> func_start_line,
                        const std::string& file_path, const std::optional<RuleSet>& rules) {
  PipelineOptions o;
  o.window = window;
  o.structural_only = structural_only;
  o.token_only = token_only;
  o.func_start_line = func_start_line;
  o.file_path = file_path;
  o.rules = rules ? &*rules : nullptr;
  return o;
}

py::dict counts(const std::array<int, kCategoryCount>& c) {
  py::dict d;
  for (std::size_t k = 0; k < kCategoryCount; ++k) d[py::str(std::string(to_string(static_cast<RuleCategory>(k))))] = c[k];
  return d;
}

py::dict naturalize(const std::string& source, const std::string& diff, int window, bool structural_only,
                    bool token_only, std::optional<int> func_start_line, const std::string& file_path,
                    const std::optional<std::string>& rules_path) {
  const auto rules = rules_from(rules_path);
  PipelineResult r;
  {
    py::gil_scoped_release release;
    r = naturalize_record(source, diff,
                          options(window, structural_only, token_only, func_start_line, file_path, rules));
  }
  py::dict d;
  d["text"] = r.output.text;
  d["flags"] = r.flags;
  d["path"] = r.path.block_ids;
  d["tainted_blocks"] = r.tainted_blocks;
  d["covered"] = r.path.tainted_covered;
  d["approximate"] = r.path.approximate;
  d["rules_applied"] = counts(r.output.rules_applied);
  return d;
}

std::string analyze(const std::string& source, const std::string& diff, const std::string& emit,
                    const std::string& format, int window, std::optional<int> func_start_line,
                    const std::string& file_path) {
  const TaintedCfg t = analyze_record(source, diff, options(window, false, false, func_start_line, file_path, {}));
  if (emit == "cfg") {
    return format == "dot" ? to_dot(t.cfg) : format == "plain" ? cfg_to_plain(t.cfg) : cfg_to_json(t.cfg);
  }
  if (emit == "taint") {
    if (format == "dot") return to_dot(t.cfg);
    if (format == "plain") return spans_to_plain(t.spans, t.cfg);
    return taint_to_json(filter_hunks(parse_diff(diff), file_path), t.spans, t.cfg, t.flags);
  }
  if (emit == "path") {
    const CriticalPath path = select_critical_path(t.cfg);
    const auto lines = map_back(t.cfg, path, source);
    if (format == "dot") return to_dot(t.cfg, path.block_ids);
    if (format == "plain") return join_lines(lines);
    return path_to_json(path, lines);
  }
  throw std::invalid_argument("emit must be cfg, taint or path");
}

py::list list_rules(const std::optional<std::string>& rules_path) {
  const auto rules = rules_from(rules_path);
  py::list out;
  for (const TransformRule& r : rules ? *rules : default_rules()) {
    py::dict d;
    d["name"] = r.name;
    d["category"] = std::string(to_string(r.category));
    d["pattern"] = r.pattern_source;
    d["template"] = r.template_text;
    d["guard"] = std::string(to_string(r.guard));
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_clnx, m) {
  m.doc() = "Code naturalization for commit-level vulnerability models";

  // args are (message, code, stage)
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
  error.call_once_and_store_result([&] { return py::exception<Error>(m, "ClnxError", PyExc_RuntimeError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::tuple args = py::make_tuple(e.what(), std::string(to_string(e.code())), e.stage());
      PyErr_SetObject(error.get_stored().ptr(), args.ptr());
    }
  });

  m.def("naturalize", &naturalize, py::arg("source"), py::arg("diff") = "", py::kw_only(),
        py::arg("window") = kDefaultWindow, py::arg("structural_only") = false, py::arg("token_only") = false,
        py::arg("func_start_line") = py::none(), py::arg("file_path") = "", py::arg("rules") = py::none(),
        "Naturalize one function against the diff of its commit.");
  m.def("analyze", &analyze, py::arg("source"), py::arg("diff") = "", py::kw_only(), py::arg("emit") = "cfg",
        py::arg("format") = "structured", py::arg("window") = kDefaultWindow,
        py::arg("func_start_line") = py::none(), py::arg("file_path") = "",
        "Render the CFG, taint spans or critical path as JSON, DOT or plain text.");
  m.def(
      "apply_rules",
      [](const std::string& text, const std::optional<std::string>& rules_path) {
        const auto rules = rules_from(rules_path);
        return apply_rules(text, rules ? *rules : default_rules()).text;
      },
      py::arg("text"), py::kw_only(), py::arg("rules") = py::none(), "Rewrite key symbols in source text.");
  m.def("list_rules", &list_rules, py::kw_only(), py::arg("rules") = py::none());
  m.def(
      "run_corpus",
      [](const std::string& input, const std::string& output, unsigned jobs, int window, bool structural_only,
         bool token_only, const std::optional<std::string>& rules_path) {
        const auto rules = rules_from(rules_path);
        CorpusOptions o;
        o.jobs = jobs;
        o.pipeline = options(window, structural_only, token_only, std::nullopt, "", rules);
        CorpusStats s;
        {
          py::gil_scoped_release release;
          s = run_corpus(input, output, o);
        }
        return stats_to_json(s);
      },
      py::arg("input"), py::arg("output"), py::kw_only(), py::arg("jobs") = 0, py::arg("window") = kDefaultWindow,
      py::arg("structural_only") = false, py::arg("token_only") = false, py::arg("rules") = py::none(),
      "Naturalize a JSONL corpus; returns the statistics as a JSON string.");
}
