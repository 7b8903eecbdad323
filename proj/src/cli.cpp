#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"

#include "clnx/cli.hpp"
#include "clnx/corpus.hpp"
#include "clnx/error.hpp"
#include "clnx/pipeline.hpp"
#include "clnx/serialize.hpp"

namespace clnx {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw Error(ErrorCode::Io, "cannot write " + path);
  }
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

struct Common {
  std::string source;
  std::string diff;
  int window = kDefaultWindow;
  bool structural_only = false;
  bool token_only = false;
  std::string rules_path;
  int func_start_line = 0;
  std::string file_path;
};

void add_record_options(CLI::App* cmd, Common& c) {
  cmd->add_option("--source", c.source, "function source file")->required();
  cmd->add_option("--diff", c.diff, "unified diff of the commit");
  cmd->add_option("--window", c.window, "context lines around each change")->check(CLI::NonNegativeNumber);
  cmd->add_option("--func-start-line", c.func_start_line, "file line of the function's first line")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--file-path", c.file_path, "only use hunks of this file");
}

void add_mode_flags(CLI::App* cmd, Common& c) {
  auto* s = cmd->add_flag("--structural-only", c.structural_only, "stop after path selection");
  auto* t = cmd->add_flag("--token-only", c.token_only, "rewrite symbols on every line, no path selection");
  s->excludes(t);
  cmd->add_option("--rules", c.rules_path, "JSON rule file (env CLNX_RULES)");
}

PipelineOptions pipeline_options(const Common& c, const RuleSet* rules) {
  PipelineOptions o;
  o.window = c.window;
  o.structural_only = c.structural_only;
  o.token_only = c.token_only;
  o.rules = rules;
  if (c.func_start_line > 0) o.func_start_line = c.func_start_line;
  o.file_path = c.file_path;
  return o;
}

std::optional<RuleSet> load_rules(const std::string& flag_value) {
  const std::string path = flag_value.empty() ? env_or("CLNX_RULES", "") : flag_value;
  if (path.empty()) return std::nullopt;
  return load_rule_file(path);
}

void report_flags(const std::vector<std::string>& flags, std::ostream& err) {
  for (const std::string& f : flags) {
    if (f == "unanchored") err << "warning: diff could not be anchored in the function; no lines tainted\n";
    if (f == "coordinate_mismatch") err << "warning: some tainted spans fall outside the function\n";
    if (f == "approximate_path") err << "note: too many tied paths; entropy tiebreak was approximated\n";
  }
}

std::string render_rules(const RuleSet& rules) {
  std::ostringstream os;
  std::size_t wname = 4, wpat = 7;
  for (const TransformRule& r : rules) {
    wname = std::max(wname, r.name.size());
    wpat = std::max(wpat, r.pattern_source.size());
  }
  os << std::left << std::setw(22) << "CATEGORY" << std::setw(static_cast<int>(wname) + 2) << "NAME"
     << std::setw(static_cast<int>(wpat) + 2) << "PATTERN" << std::setw(22) << "GUARD" << std::setw(10) << "SOURCE" << "TEMPLATE\n";
  for (const TransformRule& r : rules) {
    os << std::setw(22) << to_string(r.category) << std::setw(static_cast<int>(wname) + 2) << r.name
       << std::setw(static_cast<int>(wpat) + 2) << r.pattern_source << std::setw(22) << to_string(r.guard)
       << std::setw(10) << (r.core ? "core" : "extended") << r.template_text << "\n";
  }
  return os.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linearize a C/C++ function around its commit and rewrite low-level symbols in plain words", "clnx"};
  app.require_subcommand(1);

  Common nat;
  std::string output_path;
  auto* naturalize = app.add_subcommand("naturalize", "naturalize one function against its diff");
  add_record_options(naturalize, nat);
  add_mode_flags(naturalize, nat);
  naturalize->add_option("-o,--output", output_path, "write the result here instead of stdout");

  Common an;
  std::string emit;
  std::string format = "structured";
  auto* analyze = app.add_subcommand("analyze", "print an intermediate result");
  add_record_options(analyze, an);
  analyze->add_option("--emit", emit, "cfg, taint or path")
      ->required()
      ->check(CLI::IsMember({"cfg", "taint", "path"}));
  analyze->add_option("--format", format, "structured, dot or plain")
      ->check(CLI::IsMember({"structured", "dot", "plain"}));

  Common cor;
  std::string input, corpus_out, stats_path;
  unsigned jobs = 0;
  auto* corpus = app.add_subcommand("corpus", "naturalize a JSONL corpus");
  corpus->add_option("--input", input, "input JSONL")->required();
  corpus->add_option("--output", corpus_out, "output JSONL")->required();
  corpus->add_option("--stats", stats_path, "write aggregate statistics as JSON");
  corpus->add_option("--jobs", jobs, "worker threads (env CLNX_JOBS; default: all cores)")
      ->check(CLI::PositiveNumber);
  corpus->add_option("--window", cor.window, "context lines around each change")->check(CLI::NonNegativeNumber);
  add_mode_flags(corpus, cor);

  bool list = false;
  std::string list_rules_path;
  auto* rules_cmd = app.add_subcommand("rules", "show the rule table");
  rules_cmd->add_flag("--list", list, "print every rule")->required();
  rules_cmd->add_option("--rules", list_rules_path, "JSON rule file to list instead (env CLNX_RULES)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (naturalize->parsed()) {
      const auto rules = load_rules(nat.rules_path);
      const std::string source = read_file(nat.source);
      const std::string diff = nat.diff.empty() ? std::string{} : read_file(nat.diff);
      const PipelineResult r = naturalize_record(source, diff, pipeline_options(nat, rules ? &*rules : nullptr));
      report_flags(r.flags, err);
      if (output_path.empty()) {
        out << r.output.text;
      } else {
        write_file(output_path, r.output.text);
      }
      return 0;
    }

    if (analyze->parsed()) {
      const std::string source = read_file(an.source);
      const std::string diff = an.diff.empty() ? std::string{} : read_file(an.diff);
      const PipelineOptions opts = pipeline_options(an, nullptr);
      const TaintedCfg t = analyze_record(source, diff, opts);
      report_flags(t.flags, err);
      if (emit == "cfg") {
        out << (format == "dot" ? to_dot(t.cfg) : format == "plain" ? cfg_to_plain(t.cfg) : cfg_to_json(t.cfg));
      } else if (emit == "taint") {
        if (format == "dot") {
          out << to_dot(t.cfg);
        } else if (format == "plain") {
          out << spans_to_plain(t.spans, t.cfg);
        } else {
          out << taint_to_json(filter_hunks(parse_diff(diff), an.file_path), t.spans, t.cfg, t.flags);
        }
      } else {
        const CriticalPath path = select_critical_path(t.cfg);
        const auto lines = map_back(t.cfg, path, source);
        if (format == "dot") {
          out << to_dot(t.cfg, path.block_ids);
        } else if (format == "plain") {
          out << join_lines(lines);
        } else {
          out << path_to_json(path, lines);
        }
      }
      return 0;
    }

    if (corpus->parsed()) {
      const auto rules = load_rules(cor.rules_path);
      CorpusOptions opts;
      opts.pipeline = pipeline_options(cor, rules ? &*rules : nullptr);
      if (jobs == 0) {
        const std::string env_jobs = env_or("CLNX_JOBS", "");
        if (!env_jobs.empty()) {
          try {
            jobs = static_cast<unsigned>(std::max(1, std::stoi(env_jobs)));
          } catch (const std::exception&) {
            err << "error: CLNX_JOBS must be a positive integer\n";
            return 2;
          }
        }
      }
      opts.jobs = jobs;
      const CorpusStats stats = run_corpus(input, corpus_out, opts);
      if (!stats_path.empty()) write_file(stats_path, stats_to_json(stats));
      err << stats.records_ok << "/" << stats.records_total << " records naturalized";
      if (stats.records_failed) err << ", " << stats.records_failed << " failed";
      err << "\n";
      return stats.records_total > 0 && stats.records_ok == 0 ? 1 : 0;
    }

    if (rules_cmd->parsed()) {
      const auto rules = load_rules(list_rules_path);
      out << render_rules(rules ? *rules : default_rules());
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace clnx
