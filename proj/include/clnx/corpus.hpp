#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clnx/naturalize.hpp"
#include "clnx/pipeline.hpp"

namespace clnx {

struct CorpusRecord {
  std::string id;
  std::string func;
  std::string diff;  // empty when the record carries none
  std::optional<int> target;
  std::optional<std::string> project;
  std::optional<std::string> commit_id;
  std::optional<std::string> file_path;
  std::optional<int> func_start_line;
};

/// One input line: either a record or the reason it was rejected.
struct CorpusEntry {
  int line_no = 0;
  std::string raw;
  std::optional<CorpusRecord> record;
  std::string error;
};

/// Parses one JSON object into a record; throws Error{RecordParse}.
CorpusRecord parse_record(std::string_view json_line, int line_no = 0);

/// Streams entries from a JSONL file. Blank lines are skipped; a repeated id
/// rejects the later record.
class CorpusReader {
 public:
  explicit CorpusReader(const std::filesystem::path& path);
  std::optional<CorpusEntry> next();

 private:
  std::ifstream in_;
  int line_no_ = 0;
  std::set<std::string> seen_ids_;
};

std::vector<CorpusEntry> read_corpus(const std::filesystem::path& path);

struct CorpusStats {
  int records_total = 0;
  int records_ok = 0;
  int records_failed = 0;
  double mean_original_chars = 0;
  double median_original_chars = 0;
  double mean_naturalized_chars = 0;
  double median_naturalized_chars = 0;
  double mean_original_lines = 0;
  double mean_naturalized_lines = 0;
  // Over successful records with at least one tainted block.
  std::optional<double> mean_coverage_ratio;
  std::array<long, kCategoryCount> rules_applied{};
  int approximate_paths = 0;
};

std::string stats_to_json(const CorpusStats& stats);

struct CorpusOptions {
  PipelineOptions pipeline;  // func_start_line/file_path come from each record
  unsigned jobs = 0;         // 0 = hardware concurrency
  std::size_t chunk_size = 1024;
};

/// Result line for one entry, as written to the output file (no newline).
std::string process_entry(const CorpusEntry& entry, const CorpusOptions& options);

/// Naturalizes every record of `input` into `output`, one line per input
/// record in input order, and returns the aggregate statistics.
CorpusStats run_corpus(const std::filesystem::path& input, const std::filesystem::path& output,
                       const CorpusOptions& options = {});

}  // namespace clnx
