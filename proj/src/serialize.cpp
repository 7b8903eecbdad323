#include <sstream>

#include "json.hpp"

#include "clnx/serialize.hpp"

namespace clnx {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string_view origin_name(SpanOrigin o) { return o == SpanOrigin::RemovalAnchor ? "removal" : "added"; }

std::vector<int> tainted_ids(const Cfg& cfg) {
  std::vector<int> ids;
  for (const BasicBlock& b : cfg.blocks) {
    if (b.tainted) ids.push_back(b.id);
  }
  return ids;
}

std::string dump(const ordered_json& j, int indent) { return j.dump(indent) + "\n"; }

}  // namespace

std::string cfg_to_json(const Cfg& cfg, int indent) {
  ordered_json j;
  j["entry"] = cfg.entry_id;
  j["exit"] = cfg.exit_id;
  ordered_json blocks = ordered_json::array();
  for (const BasicBlock& b : cfg.blocks) {
    ordered_json jb;
    jb["id"] = b.id;
    jb["lines"] = b.is_synthetic() ? ordered_json(nullptr) : ordered_json::array({b.lines.first, b.lines.last});
    jb["entry"] = b.is_entry;
    jb["exit"] = b.is_exit;
    jb["loop_header"] = b.is_loop_header;
    jb["tainted"] = b.tainted;
    jb["unreachable"] = b.unreachable;
    ordered_json stmts = ordered_json::array();
    for (const Statement& s : b.statements) stmts.push_back(s.text());
    jb["statements"] = std::move(stmts);
    blocks.push_back(std::move(jb));
  }
  j["blocks"] = std::move(blocks);
  ordered_json edges = ordered_json::array();
  for (const Edge& e : cfg.edges) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"unreachable", e.unreachable}});
  }
  j["edges"] = std::move(edges);
  return dump(j, indent);
}

std::string taint_to_json(const std::vector<DiffHunk>& hunks, const std::vector<TaintSpan>& spans, const Cfg& cfg,
                          const std::vector<std::string>& flags, int indent) {
  ordered_json j;
  ordered_json jh = ordered_json::array();
  for (const DiffHunk& h : hunks) {
    ordered_json x;
    x["file_path"] = h.file_path;
    x["old_start"] = h.old_start;
    x["old_len"] = h.old_len;
    x["new_start"] = h.new_start;
    x["new_len"] = h.new_len;
    x["removed_old_lines"] = h.removed_old_lines;
    x["removed_new_positions"] = h.removed_new_positions;
    x["added_new_lines"] = h.added_new_lines;
    x["truncated"] = h.truncated;
    jh.push_back(std::move(x));
  }
  j["hunks"] = std::move(jh);
  ordered_json js = ordered_json::array();
  for (const TaintSpan& s : spans) js.push_back({{"first", s.first}, {"last", s.last}, {"origin", origin_name(s.origin)}});
  j["spans"] = std::move(js);
  j["tainted_blocks"] = tainted_ids(cfg);
  j["flags"] = flags;
  return dump(j, indent);
}

std::string path_to_json(const CriticalPath& path, const std::vector<MappedLine>& lines, int indent) {
  ordered_json j;
  j["block_ids"] = path.block_ids;
  j["covered"] = path.tainted_covered;
  j["length"] = path.length;
  j["entropy"] = path.entropy;
  j["approximate"] = path.approximate;
  ordered_json jl = ordered_json::array();
  for (const MappedLine& l : lines) jl.push_back({{"line", l.line}, {"text", l.text}, {"loop_header", l.loop_header}});
  j["lines"] = std::move(jl);
  return dump(j, indent);
}

std::string cfg_to_plain(const Cfg& cfg) {
  std::ostringstream os;
  const auto succ = cfg.successors();
  for (const BasicBlock& b : cfg.blocks) {
    os << "B" << b.id;
    if (!b.is_synthetic()) os << " [" << b.lines.first << "-" << b.lines.last << "]";
    if (b.is_entry) os << " entry";
    if (b.is_exit) os << " exit";
    if (b.is_loop_header) os << " loop";
    if (b.tainted) os << " tainted";
    if (b.unreachable) os << " dead";
    os << " ->";
    for (int s : succ[static_cast<std::size_t>(b.id)]) os << " B" << s;
    os << "\n";
  }
  return os.str();
}

std::string spans_to_plain(const std::vector<TaintSpan>& spans, const Cfg& cfg) {
  std::ostringstream os;
  for (const TaintSpan& s : spans) os << s.first << "-" << s.last << " " << origin_name(s.origin) << "\n";
  os << "tainted:";
  for (int id : tainted_ids(cfg)) os << " B" << id;
  os << "\n";
  return os.str();
}

}  // namespace clnx
