#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "clnx/path_select.hpp"
#include "clnx/source_model.hpp"

namespace clnx {

// Declaration order is also the order in which categories are tried.
enum class RuleCategory { PreprocessorDirective, Declaration, ControlStructure, ApiCall, Operator };
inline constexpr std::size_t kCategoryCount = 5;

std::string_view to_string(RuleCategory category);
RuleCategory category_from_string(std::string_view name);

enum class Guard { None, UnaryPosition, BinaryPosition, CallPosition, DeclaratorPosition, LineStart };

std::string_view to_string(Guard guard);
Guard guard_from_string(std::string_view name);

enum class CaptureKind {
  Ident,    // one identifier
  Operand,  // a unary expression: prefix operators, primary, postfix chain
  Args,     // balanced tokens up to the closing `)`, at least one
  Tail,     // like Args but may be empty
  Arg,      // tokens up to `,` or `)` at depth zero
  Angle,    // a balanced `<...>` group
  Types,    // type specifier words, e.g. `const struct foo`
  Text,     // remainder of a directive line
};

struct PatternItem {
  enum class Type { Literal, Capture, Wildcard, Lookahead, Directive };
  Type type = Type::Literal;
  std::string text;  // literal text, capture name or directive name
  CaptureKind capture = CaptureKind::Ident;
  TokenKind kind = TokenKind::Identifier;  // for wildcards
  std::vector<std::string> alternatives;   // for lookaheads; "<eol>" = end of line
};

/// Parses the pattern mini-language: space-separated literal tokens,
/// `$name:kind` captures, `%Kind` token-kind wildcards, `?=(a|b|<eol>)`
/// lookaheads and `#name` directive heads. `\$`, `\%`, `\?`, `\#` escape.
std::vector<PatternItem> parse_pattern(std::string_view source);

struct TransformRule {
  std::string name;
  RuleCategory category = RuleCategory::Operator;
  std::vector<PatternItem> pattern;
  std::string pattern_source;
  std::string template_text;  // `{name}` placeholders
  Guard guard = Guard::None;
  bool core = false;
};

/// Builds a rule, rejecting malformed patterns and templates that name
/// undeclared captures (Error{RuleParse}).
TransformRule make_rule(std::string name, RuleCategory category, std::string_view pattern,
                        std::string template_text, Guard guard = Guard::None, bool core = false);

using RuleSet = std::vector<TransformRule>;

const RuleSet& default_rules();

/// Loads a JSON rule file: {"mode": "extend"|"replace", "rules": [{"name",
/// "category", "pattern", "template", "guard"}]}. Extended rules come after
/// the defaults, so defaults win ties of equal length.
RuleSet load_rule_file(const std::filesystem::path& path, const RuleSet& base = default_rules());
RuleSet parse_rule_document(std::string_view json_text, const RuleSet& base = default_rules());

struct NaturalizedOutput {
  std::string text;
  std::array<int, kCategoryCount> rules_applied{};
  int original_line_count = 0;
  int path_line_count = 0;
  std::size_t original_chars = 0;
  std::size_t naturalized_chars = 0;

  int total_rules_applied() const;
};

inline constexpr std::string_view kLoopStructurePrefix = "loop structure: ";

/// Rewrites key symbols in the given lines. Line breaks survive, other
/// whitespace runs collapse to one space and indentation is dropped. Lines
/// flagged as loop headers are prefixed with "loop structure: ".
NaturalizedOutput apply_rules(const std::vector<MappedLine>& lines, const RuleSet& rules = default_rules());

/// Text form: each line may carry the `loop:` annotation after its indentation.
NaturalizedOutput apply_rules(std::string_view text, const RuleSet& rules = default_rules());

}  // namespace clnx
