#include <algorithm>
#include <atomic>
#include <thread>

#include "json.hpp"

#include "clnx/corpus.hpp"
#include "clnx/error.hpp"

namespace clnx {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad_record(int line_no, const std::string& why) {
  throw Error(ErrorCode::RecordParse, why, line_no);
}

std::optional<std::string> optional_string(const ordered_json& obj, const char* key, int line_no) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_string()) bad_record(line_no, std::string("field '") + key + "' must be a string");
  return obj[key].get<std::string>();
}

std::optional<int> optional_int(const ordered_json& obj, const char* key, int line_no) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_number_integer()) bad_record(line_no, std::string("field '") + key + "' must be an integer");
  return obj[key].get<int>();
}

struct Processed {
  std::string line;
  bool ok = false;
  std::size_t original_chars = 0;
  std::size_t naturalized_chars = 0;
  int original_lines = 0;
  int naturalized_lines = 0;
  int tainted = 0;
  int covered = 0;
  bool approximate = false;
  std::array<int, kCategoryCount> rules{};
};

int count_lines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n')) +
         (!text.empty() && text.back() != '\n' ? 1 : 0);
}

ordered_json rules_json(const std::array<int, kCategoryCount>& counts) {
  ordered_json j = ordered_json::object();
  for (std::size_t k = 0; k < kCategoryCount; ++k) j[std::string(to_string(static_cast<RuleCategory>(k)))] = counts[k];
  return j;
}

Processed process(const CorpusEntry& entry, const CorpusOptions& options) {
  Processed p;
  if (!entry.record) {
    ordered_json out;
    try {
      out = ordered_json::parse(entry.raw);
      if (!out.is_object()) out = ordered_json::object();
    } catch (const nlohmann::json::exception&) {
      out = ordered_json::object();
    }
    if (out.empty()) out["line_no"] = entry.line_no;
    out["naturalized"] = nullptr;
    out["error"] = entry.error;
    out["stats"] = nullptr;
    p.line = out.dump();
    return p;
  }

  const CorpusRecord& rec = *entry.record;
  ordered_json out = ordered_json::parse(entry.raw);
  PipelineOptions po = options.pipeline;
  po.func_start_line = rec.func_start_line;
  po.file_path = rec.file_path.value_or("");
  try {
    const PipelineResult r = naturalize_record(rec.func, rec.diff, po);
    p.ok = true;
    p.original_chars = r.output.original_chars;
    p.naturalized_chars = r.output.naturalized_chars;
    p.original_lines = r.output.original_line_count;
    p.naturalized_lines = count_lines(r.output.text);
    p.tainted = r.tainted_blocks;
    p.covered = r.path.tainted_covered;
    p.approximate = r.path.approximate;
    p.rules = r.output.rules_applied;

    ordered_json stats;
    stats["original_lines"] = p.original_lines;
    stats["path_lines"] = r.output.path_line_count;
    stats["naturalized_lines"] = p.naturalized_lines;
    stats["original_chars"] = p.original_chars;
    stats["naturalized_chars"] = p.naturalized_chars;
    stats["tainted_blocks"] = p.tainted;
    stats["covered"] = p.covered;
    stats["total_blocks"] = r.cfg.blocks.size();
    stats["approximate"] = p.approximate;
    stats["rules_applied"] = rules_json(p.rules);
    stats["flags"] = r.flags;
    out["naturalized"] = r.output.text;
    out["error"] = nullptr;
    out["stats"] = std::move(stats);
  } catch (const Error& e) {
    out["naturalized"] = nullptr;
    out["error"] = e.what();
    out["stats"] = nullptr;
  } catch (const std::exception& e) {
    out["naturalized"] = nullptr;
    out["error"] = std::string("internal: ") + e.what();
    out["stats"] = nullptr;
  }
  p.line = out.dump();
  return p;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

}  // namespace

CorpusRecord parse_record(std::string_view json_line, int line_no) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(json_line);
  } catch (const nlohmann::json::exception& e) {
    bad_record(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) bad_record(line_no, "record is not a JSON object");

  CorpusRecord r;
  if (!obj.contains("id")) bad_record(line_no, "missing field 'id'");
  if (obj["id"].is_string()) {
    r.id = obj["id"].get<std::string>();
  } else if (obj["id"].is_number_integer()) {
    r.id = std::to_string(obj["id"].get<long long>());
  } else {
    bad_record(line_no, "field 'id' must be a string or integer");
  }
  if (r.id.empty()) bad_record(line_no, "field 'id' is empty");
  if (!obj.contains("func") || !obj["func"].is_string()) bad_record(line_no, "missing string field 'func'");
  r.func = obj["func"].get<std::string>();
  if (r.func.empty()) bad_record(line_no, "field 'func' is empty");
  r.diff = optional_string(obj, "diff", line_no).value_or("");
  r.target = optional_int(obj, "target", line_no);
  if (r.target && *r.target != 0 && *r.target != 1) bad_record(line_no, "field 'target' must be 0 or 1");
  r.project = optional_string(obj, "project", line_no);
  r.commit_id = optional_string(obj, "commit_id", line_no);
  r.file_path = optional_string(obj, "file_path", line_no);
  r.func_start_line = optional_int(obj, "func_start_line", line_no);
  if (r.func_start_line && *r.func_start_line < 1) bad_record(line_no, "field 'func_start_line' must be >= 1");
  return r;
}

CorpusReader::CorpusReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::FileNotFound, "cannot open corpus file " + path.string());
}

std::optional<CorpusEntry> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    CorpusEntry e;
    e.line_no = line_no_;
    e.raw = std::move(line);
    try {
      CorpusRecord r = parse_record(e.raw, line_no_);
      if (!seen_ids_.insert(r.id).second) bad_record(line_no_, "duplicate id '" + r.id + "'");
      e.record = std::move(r);
    } catch (const Error& err) {
      e.error = err.with_stage("read_corpus").what();
    }
    return e;
  }
  return std::nullopt;
}

std::vector<CorpusEntry> read_corpus(const std::filesystem::path& path) {
  CorpusReader reader(path);
  std::vector<CorpusEntry> out;
  while (auto e = reader.next()) out.push_back(std::move(*e));
  return out;
}

std::string process_entry(const CorpusEntry& entry, const CorpusOptions& options) {
  return process(entry, options).line;
}

CorpusStats run_corpus(const std::filesystem::path& input, const std::filesystem::path& output,
                       const CorpusOptions& options) {
  CorpusReader reader(input);
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + output.string());

  unsigned jobs = options.jobs ? options.jobs : std::thread::hardware_concurrency();
  jobs = std::max(jobs, 1u);
  const std::size_t chunk_size = std::max<std::size_t>(options.chunk_size, 1);

  CorpusStats stats;
  std::vector<double> orig_chars, nat_chars, orig_lines, nat_lines, coverage;

  std::vector<CorpusEntry> chunk;
  std::vector<Processed> done;
  bool more = true;
  while (more) {
    chunk.clear();
    while (chunk.size() < chunk_size) {
      auto e = reader.next();
      if (!e) {
        more = false;
        break;
      }
      chunk.push_back(std::move(*e));
    }
    if (chunk.empty()) break;

    done.assign(chunk.size(), Processed{});
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < chunk.size(); i = next++) done[i] = process(chunk[i], options);
    };
    const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(jobs, chunk.size()));
    if (n_threads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(n_threads);
      for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }

    for (const Processed& p : done) {
      out << p.line << '\n';
      ++stats.records_total;
      if (!p.ok) {
        ++stats.records_failed;
        continue;
      }
      ++stats.records_ok;
      orig_chars.push_back(static_cast<double>(p.original_chars));
      nat_chars.push_back(static_cast<double>(p.naturalized_chars));
      orig_lines.push_back(p.original_lines);
      nat_lines.push_back(p.naturalized_lines);
      if (p.tainted > 0) coverage.push_back(static_cast<double>(p.covered) / p.tainted);
      for (std::size_t k = 0; k < kCategoryCount; ++k) stats.rules_applied[k] += p.rules[k];
      stats.approximate_paths += p.approximate;
    }
  }
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing " + output.string());

  stats.mean_original_chars = mean(orig_chars);
  stats.median_original_chars = median(orig_chars);
  stats.mean_naturalized_chars = mean(nat_chars);
  stats.median_naturalized_chars = median(nat_chars);
  stats.mean_original_lines = mean(orig_lines);
  stats.mean_naturalized_lines = mean(nat_lines);
  if (!coverage.empty()) stats.mean_coverage_ratio = mean(coverage);
  return stats;
}

std::string stats_to_json(const CorpusStats& s) {
  ordered_json j;
  j["records_total"] = s.records_total;
  j["records_ok"] = s.records_ok;
  j["records_failed"] = s.records_failed;
  j["mean_original_chars"] = s.mean_original_chars;
  j["median_original_chars"] = s.median_original_chars;
  j["mean_naturalized_chars"] = s.mean_naturalized_chars;
  j["median_naturalized_chars"] = s.median_naturalized_chars;
  j["mean_original_lines"] = s.mean_original_lines;
  j["mean_naturalized_lines"] = s.mean_naturalized_lines;
  j["mean_coverage_ratio"] = s.mean_coverage_ratio ? ordered_json(*s.mean_coverage_ratio) : ordered_json(nullptr);
  ordered_json rules = ordered_json::object();
  for (std::size_t k = 0; k < kCategoryCount; ++k) rules[std::string(to_string(static_cast<RuleCategory>(k)))] = s.rules_applied[k];
  j["rules_applied"] = std::move(rules);
  j["approximate_paths"] = s.approximate_paths;
  return j.dump(2) + "\n";
}

}  // namespace clnx
