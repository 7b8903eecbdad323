#pragma once

#include <string>
#include <vector>

#include "clnx/cfg.hpp"
#include "clnx/diff_taint.hpp"
#include "clnx/path_select.hpp"

namespace clnx {

// JSON renderings used by the analyzer front end and the Python module.
std::string cfg_to_json(const Cfg& cfg, int indent = 2);
std::string taint_to_json(const std::vector<DiffHunk>& hunks, const std::vector<TaintSpan>& spans, const Cfg& cfg,
                          const std::vector<std::string>& flags, int indent = 2);
std::string path_to_json(const CriticalPath& path, const std::vector<MappedLine>& lines, int indent = 2);

// Line-oriented renderings.
std::string cfg_to_plain(const Cfg& cfg);
std::string spans_to_plain(const std::vector<TaintSpan>& spans, const Cfg& cfg);

}  // namespace clnx
