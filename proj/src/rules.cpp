#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "clnx/error.hpp"
#include "clnx/naturalize.hpp"

namespace clnx {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "PreprocessorDirective", "Declaration", "ControlStructure", "ApiCall", "Operator"};

constexpr std::array<std::string_view, 6> kGuardNames = {
    "none", "unary_position", "binary_position", "call_position", "declarator_position", "line_start"};

[[noreturn]] void bad_rule(const std::string& what) { throw Error(ErrorCode::RuleParse, what); }

CaptureKind capture_kind(std::string_view name) {
  static const std::pair<std::string_view, CaptureKind> table[] = {
      {"ident", CaptureKind::Ident}, {"operand", CaptureKind::Operand}, {"args", CaptureKind::Args},
      {"tail", CaptureKind::Tail},   {"arg", CaptureKind::Arg},         {"angle", CaptureKind::Angle},
      {"types", CaptureKind::Types}, {"text", CaptureKind::Text},
  };
  for (const auto& [n, k] : table) {
    if (n == name) return k;
  }
  bad_rule("unknown capture kind '" + std::string(name) + "'");
}

TokenKind token_kind(std::string_view name) {
  static const std::pair<std::string_view, TokenKind> table[] = {
      {"Identifier", TokenKind::Identifier}, {"Keyword", TokenKind::Keyword},
      {"Operator", TokenKind::Operator},     {"Punct", TokenKind::Punct},
      {"NumberLit", TokenKind::NumberLit},   {"StringLit", TokenKind::StringLit},
      {"CharLit", TokenKind::CharLit},
  };
  for (const auto& [n, k] : table) {
    if (n == name) return k;
  }
  bad_rule("unknown token kind '%" + std::string(name) + "'");
}

// Placeholder names in a template, in order of appearance.
std::vector<std::string> placeholders(std::string_view tmpl) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while ((i = tmpl.find('{', i)) != std::string_view::npos) {
    const std::size_t close = tmpl.find('}', i);
    if (close == std::string_view::npos) bad_rule("unclosed placeholder in template '" + std::string(tmpl) + "'");
    out.emplace_back(tmpl.substr(i + 1, close - i - 1));
    i = close + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(RuleCategory category) { return kCategoryNames[static_cast<std::size_t>(category)]; }

RuleCategory category_from_string(std::string_view name) {
  for (std::size_t k = 0; k < kCategoryNames.size(); ++k) {
    if (kCategoryNames[k] == name) return static_cast<RuleCategory>(k);
  }
  bad_rule("unknown rule category '" + std::string(name) + "'");
}

std::string_view to_string(Guard guard) { return kGuardNames[static_cast<std::size_t>(guard)]; }

Guard guard_from_string(std::string_view name) {
  if (name.empty()) return Guard::None;
  for (std::size_t k = 0; k < kGuardNames.size(); ++k) {
    if (kGuardNames[k] == name) return static_cast<Guard>(k);
  }
  bad_rule("unknown guard '" + std::string(name) + "'");
}

std::vector<PatternItem> parse_pattern(std::string_view source) {
  std::vector<PatternItem> items;
  std::istringstream in{std::string(source)};
  std::string word;
  while (in >> word) {
    PatternItem item;
    if (word.size() >= 2 && word[0] == '\\') {
      item.text = word.substr(1);
    } else if (word[0] == '$') {
      const std::size_t colon = word.find(':');
      if (colon == std::string::npos || colon == 1) bad_rule("capture needs $name:kind, got '" + word + "'");
      item.type = PatternItem::Type::Capture;
      item.text = word.substr(1, colon - 1);
      item.capture = capture_kind(std::string_view(word).substr(colon + 1));
    } else if (word[0] == '%' && word.size() > 1) {
      item.type = PatternItem::Type::Wildcard;
      item.kind = token_kind(std::string_view(word).substr(1));
    } else if (word.rfind("?=(", 0) == 0 && word.back() == ')') {
      item.type = PatternItem::Type::Lookahead;
      std::string_view alts = std::string_view(word).substr(3, word.size() - 4);
      std::size_t start = 0;
      while (true) {
        const std::size_t bar = alts.find('|', start);
        item.alternatives.emplace_back(alts.substr(start, bar - start));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
      }
    } else if (word[0] == '#' && word.size() > 1) {
      item.type = PatternItem::Type::Directive;
      item.text = word.substr(1);
    } else {
      item.text = word;
    }
    items.push_back(std::move(item));
  }
  if (items.empty()) bad_rule("empty pattern");

  std::set<std::string> names;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const PatternItem& it = items[k];
    if (it.type == PatternItem::Type::Capture) {
      if (!names.insert(it.text).second) bad_rule("duplicate capture '" + it.text + "'");
      if (it.capture == CaptureKind::Text &&
          (k == 0 || items[k - 1].type != PatternItem::Type::Directive || k + 1 != items.size())) {
        bad_rule("a text capture must directly follow a directive and end the pattern");
      }
    }
    if (it.type == PatternItem::Type::Directive && k != 0) bad_rule("a directive must start the pattern");
    if (it.type == PatternItem::Type::Lookahead && k == 0) bad_rule("a pattern cannot start with a lookahead");
  }
  return items;
}

TransformRule make_rule(std::string name, RuleCategory category, std::string_view pattern,
                        std::string template_text, Guard guard, bool core) {
  TransformRule r;
  r.name = std::move(name);
  r.category = category;
  r.pattern = parse_pattern(pattern);
  r.pattern_source = std::string(pattern);
  r.template_text = std::move(template_text);
  r.guard = guard;
  r.core = core;
  std::set<std::string> declared;
  for (const PatternItem& it : r.pattern) {
    if (it.type == PatternItem::Type::Capture) declared.insert(it.text);
  }
  for (const std::string& p : placeholders(r.template_text)) {
    if (!declared.count(p)) bad_rule("rule '" + r.name + "': template uses undeclared capture {" + p + "}");
  }
  return r;
}

const RuleSet& default_rules() {
  using C = RuleCategory;
  using G = Guard;
  static const RuleSet rules = [] {
    RuleSet r;
    auto add = [&](std::string name, C c, std::string_view pat, std::string tmpl, G g, bool core) {
      r.push_back(make_rule(std::move(name), c, pat, std::move(tmpl), g, core));
    };
    // Preprocessor
    add("include", C::PreprocessorDirective, "#include $rest:text", "include header file {rest}", G::None, true);
    add("elif", C::PreprocessorDirective, "#elif $rest:text", "else if {rest}", G::None, true);
    add("define", C::PreprocessorDirective, "#define $rest:text", "define macro {rest}", G::None, false);
    add("ifdef", C::PreprocessorDirective, "#ifdef $rest:text", "if defined {rest}", G::None, false);
    add("ifndef", C::PreprocessorDirective, "#ifndef $rest:text", "if not defined {rest}", G::None, false);
    add("if", C::PreprocessorDirective, "#if $rest:text", "if {rest}", G::None, false);
    add("else", C::PreprocessorDirective, "#else $rest:text", "else {rest}", G::None, false);
    add("endif", C::PreprocessorDirective, "#endif $rest:text", "end if {rest}", G::None, false);

    // Declarations
    add("struct", C::Declaration, "struct $name:ident ?=({)", "declare a structure {name}", G::None, true);
    add("union", C::Declaration, "union $name:ident ?=({)", "declare a union {name}", G::None, false);
    add("enum", C::Declaration, "enum $name:ident ?=({)", "declare an enumeration {name}", G::None, false);
    add("template", C::Declaration, "template $params:angle", "template class definition {params}", G::None, true);
    const std::string_view decl_end = " ?=(;|=|,|[|)|<eol>)";
    add("volatile", C::Declaration, std::string("volatile $type:types $name:ident") + std::string(decl_end),
        "declare volatile variable {name}", G::None, true);
    add("static", C::Declaration, std::string("static $type:types $name:ident") + std::string(decl_end),
        "declare static variable {name}", G::None, false);
    add("register", C::Declaration, std::string("register $type:types $name:ident") + std::string(decl_end),
        "declare register variable {name}", G::None, false);
    add("pointer_decl", C::Declaration, std::string("$type:types * $name:ident") + std::string(decl_end),
        "declare {name} as pointer to {type}", G::DeclaratorPosition, false);
    add("pointer_pointer_decl", C::Declaration, std::string("$type:types * * $name:ident") + std::string(decl_end),
        "declare {name} as pointer to pointer to {type}", G::DeclaratorPosition, false);

    // Control structure
    add("goto", C::ControlStructure, "goto $label:ident", "jump to the statement {label}", G::None, true);
    add("setjmp", C::ControlStructure, "setjmp ( $env:args )", "save the current environment {env}", G::CallPosition,
        true);
    add("longjmp", C::ControlStructure, "longjmp ( $env:arg , $value:arg )",
        "restore the environment {env} with value {value}", G::CallPosition, false);

    // API calls
    add("malloc", C::ApiCall, "malloc ( $size:args )", "allocate memory of {size}", G::CallPosition, true);
    add("free", C::ApiCall, "free ( $ptr:args )", "deallocate memory of {ptr}", G::CallPosition, true);
    add("pthread_create", C::ApiCall, "pthread_create ( $thread:arg $rest:tail )", "create new thread {thread}",
        G::CallPosition, true);
    add("write", C::ApiCall, "write ( $data:arg $rest:tail )", "write {data} to file descriptor", G::CallPosition,
        true);
    add("calloc", C::ApiCall, "calloc ( $count:arg , $size:arg )",
        "allocate zero-initialized memory of {count} elements of {size}", G::CallPosition, false);
    add("realloc", C::ApiCall, "realloc ( $ptr:arg , $size:arg )", "reallocate memory of {ptr} to size {size}",
        G::CallPosition, false);
    add("mmap", C::ApiCall, "mmap ( $args:args )", "map memory region {args}", G::CallPosition, false);
    add("munmap", C::ApiCall, "munmap ( $args:args )", "unmap memory region {args}", G::CallPosition, false);
    add("memcpy", C::ApiCall, "memcpy ( $dst:arg , $src:arg , $n:arg )", "copy {n} bytes from {src} to {dst}",
        G::CallPosition, false);
    add("memset", C::ApiCall, "memset ( $ptr:arg , $value:arg , $n:arg )", "set {n} bytes of {ptr} to {value}",
        G::CallPosition, false);
    add("mutex_lock", C::ApiCall, "pthread_mutex_lock ( $m:args )", "lock mutex {m}", G::CallPosition, false);
    add("mutex_unlock", C::ApiCall, "pthread_mutex_unlock ( $m:args )", "unlock mutex {m}", G::CallPosition, false);
    add("sem_wait", C::ApiCall, "sem_wait ( $s:args )", "wait on semaphore {s}", G::CallPosition, false);
    add("sem_post", C::ApiCall, "sem_post ( $s:args )", "signal semaphore {s}", G::CallPosition, false);
    add("open", C::ApiCall, "open ( $path:arg $rest:tail )", "open file {path}", G::CallPosition, false);
    add("read", C::ApiCall, "read ( $fd:arg $rest:tail )", "read from file descriptor {fd}", G::CallPosition, false);
    add("close", C::ApiCall, "close ( $fd:args )", "close file descriptor {fd}", G::CallPosition, false);
    add("ioctl", C::ApiCall, "ioctl ( $fd:arg , $request:arg $rest:tail )",
        "send device control request {request} to file descriptor {fd}", G::CallPosition, false);
    add("fork", C::ApiCall, "fork ( )", "create new process", G::CallPosition, false);

    // Operators. `&&` and `||` are separate tokens and never match.
    add("dereference", C::Operator, "* $ptr:operand", "dereference {ptr}", G::UnaryPosition, true);
    add("address_of", C::Operator, "& $var:operand", "obtain address of {var}", G::UnaryPosition, true);
    add("bit_not", C::Operator, "~ $value:operand", "Bitwise NOT of {value}", G::UnaryPosition, true);
    add("bit_or", C::Operator, "|", "Bitwise OR", G::BinaryPosition, true);
    add("bit_xor", C::Operator, "^", "Bitwise XOR", G::BinaryPosition, true);
    add("bit_and", C::Operator, "&", "Bitwise AND", G::BinaryPosition, true);
    add("shift_left", C::Operator, "<<", "left shift by", G::BinaryPosition, true);
    add("shift_right", C::Operator, ">>", "right shift by", G::BinaryPosition, true);
    return r;
  }();
  return rules;
}

RuleSet parse_rule_document(std::string_view json_text, const RuleSet& base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    bad_rule(std::string("rule file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
    bad_rule("rule file needs an object with a \"rules\" array");
  }
  const std::string mode = doc.value("mode", std::string("extend"));
  if (mode != "extend" && mode != "replace") bad_rule("rule file mode must be \"extend\" or \"replace\"");

  RuleSet out = mode == "extend" ? base : RuleSet{};
  int n = 0;
  for (const auto& entry : doc["rules"]) {
    ++n;
    if (!entry.is_object()) bad_rule("rule #" + std::to_string(n) + " is not an object");
    try {
      out.push_back(make_rule(entry.value("name", "custom_" + std::to_string(n)),
                              category_from_string(entry.at("category").get<std::string>()),
                              entry.at("pattern").get<std::string>(), entry.at("template").get<std::string>(),
                              guard_from_string(entry.value("guard", std::string{})), false));
    } catch (const nlohmann::json::exception& e) {
      bad_rule("rule #" + std::to_string(n) + ": " + e.what());
    }
  }
  if (out.empty()) bad_rule("rule file leaves no rules");
  return out;
}

RuleSet load_rule_file(const std::filesystem::path& path, const RuleSet& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open rule file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rule_document(buf.str(), base);
}

int NaturalizedOutput::total_rules_applied() const {
  int total = 0;
  for (int n : rules_applied) total += n;
  return total;
}

}  // namespace clnx
