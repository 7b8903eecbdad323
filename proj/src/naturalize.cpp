#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "clnx/naturalize.hpp"

namespace clnx {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

bool one_of(std::string_view s, std::initializer_list<std::string_view> options) {
  return std::find(options.begin(), options.end(), s) != options.end();
}

bool is_type_keyword(std::string_view s) {
  return one_of(s, {"void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "bool", "_Bool",
                    "const", "volatile", "static", "register", "extern", "inline", "restrict", "__restrict",
                    "__inline"});
}

bool is_tag_keyword(std::string_view s) { return one_of(s, {"struct", "union", "enum"}); }

bool is_member_access(std::string_view s) { return one_of(s, {".", "->", "::", ".*", "->*"}); }

bool is_prefix_operator(std::string_view s) { return one_of(s, {"*", "&", "~", "!", "-", "+", "++", "--"}); }

// Keywords after which an expression, not a declaration, starts.
bool is_expression_keyword(std::string_view s) {
  return one_of(s, {"return", "case", "sizeof", "else", "do", "throw", "co_return", "co_yield"});
}

bool is_value_keyword(std::string_view s) { return one_of(s, {"this", "true", "false", "nullptr"}); }

std::string_view trim(std::string_view s) {
  const std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return {};
  const std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// "#  include <x>" -> ("include", "<x>")
std::pair<std::string_view, std::string_view> split_directive(std::string_view text) {
  std::size_t i = 1;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  const std::size_t name_start = i;
  while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
  return {text.substr(name_start, i - name_start), trim(text.substr(i))};
}

struct Capture {
  std::size_t begin = 0;  // significant-token indices, half open
  std::size_t end = 0;
  std::optional<std::string> text;  // directive remainder
};

struct Match {
  std::size_t end = 0;
  std::map<std::string, Capture> captures;
};

struct TemplatePiece {
  bool placeholder = false;
  std::string text;
};

std::vector<TemplatePiece> split_template(std::string_view tmpl) {
  std::vector<TemplatePiece> out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const std::size_t open = tmpl.find('{', i);
    if (open == std::string_view::npos) {
      out.push_back({false, std::string(tmpl.substr(i))});
      break;
    }
    if (open > i) out.push_back({false, std::string(tmpl.substr(i, open - i))});
    const std::size_t close = tmpl.find('}', open);
    out.push_back({true, std::string(tmpl.substr(open + 1, close - open - 1))});
    i = close + 1;
  }
  return out;
}

class Renderer {
 public:
  Renderer(std::string_view text, const RuleSet& rules, std::array<int, kCategoryCount>& counts,
           const std::vector<bool>* loop_lines = nullptr)
      : text_(text), toks_(lex(text, LexOptions{true})), rules_(rules), counts_(counts), loop_lines_(loop_lines) {
    sig_of_raw_.assign(toks_.size(), npos);
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      if (!toks_[i].significant()) continue;
      sig_of_raw_[i] = sig_.size();
      sig_.push_back(i);
    }
    for (const TransformRule& r : rules_) by_category_[static_cast<std::size_t>(r.category)].push_back(&r);
  }

  std::string render_all() {
    if (loop_lines_) prefixed_.assign(loop_lines_->size(), false);
    return render(0, toks_.size(), 0, sig_.size(), true);
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const Token& S(std::size_t i) const { return toks_[sig_[i]]; }

  // ---- token-context predicates -------------------------------------------

  // Index of the `(` matching the `)` at `close`, searching no further back than `lo`.
  std::optional<std::size_t> open_of(std::size_t close, std::size_t lo) const {
    int depth = 0;
    for (std::size_t i = close + 1; i-- > lo;) {
      const std::string& t = S(i).text;
      if (S(i).kind != TokenKind::Punct) continue;
      if (t == ")" || t == "]" || t == "}") ++depth;
      if (t == "(" || t == "[" || t == "{") {
        if (--depth == 0) return i;
      }
    }
    return std::nullopt;
  }

  // `(` at `open` through `)` at `close` encloses only type words: `(char *)`, `(size_t)`.
  bool is_cast_content(std::size_t open, std::size_t close) const {
    if (close <= open + 1) return false;
    bool typed = false;
    for (std::size_t i = open + 1; i < close; ++i) {
      const Token& t = S(i);
      if (t.kind == TokenKind::Keyword) {
        if (!is_type_keyword(t.text) && !is_tag_keyword(t.text)) return false;
        if (!one_of(t.text, {"const", "volatile", "restrict"})) typed = true;
      } else if (t.kind == TokenKind::Identifier) {
        if (t.text.size() > 2 && t.text.ends_with("_t")) typed = true;
      } else if (t.is("*")) {
        typed = true;
      } else if (!t.is("::")) {
        return false;
      }
    }
    return typed;
  }

  enum class CloseKind { Plain, Control, Cast };

  CloseKind classify_close(std::size_t close, std::size_t lo) const {
    const auto open = open_of(close, lo);
    if (!open || !S(*open).is("(")) return CloseKind::Plain;
    if (*open > lo) {
      const Token& before = S(*open - 1);
      if (before.kind == TokenKind::Keyword && one_of(before.text, {"if", "while", "for", "switch"})) {
        return CloseKind::Control;
      }
      if (before.kind == TokenKind::Identifier || before.kind == TokenKind::Keyword || before.is(")") ||
          before.is("]")) {
        return CloseKind::Plain;
      }
    }
    return is_cast_content(*open, close) ? CloseKind::Cast : CloseKind::Plain;
  }

  bool is_postfix_incdec(std::size_t i, std::size_t lo) const {
    if (i == lo) return false;
    const Token& q = S(i - 1);
    return q.kind == TokenKind::Identifier || q.kind == TokenKind::NumberLit || q.is(")") || q.is("]");
  }

  bool unary_position(std::size_t pos, std::size_t lo) const {
    if (pos == lo) return true;
    const Token& p = S(pos - 1);
    switch (p.kind) {
      case TokenKind::Operator:
        if (p.is("++") || p.is("--")) return !is_postfix_incdec(pos - 1, lo);
        return !is_member_access(p.text);
      case TokenKind::Punct:
        if (p.is(")")) return classify_close(pos - 1, lo) != CloseKind::Plain;
        return !p.is("]");
      case TokenKind::Keyword:
        return is_expression_keyword(p.text);
      case TokenKind::PreprocLine:
        return true;
      default:
        return false;
    }
  }

  bool starts_operand(std::size_t i, std::size_t hi) const {
    if (i >= hi) return false;
    const Token& t = S(i);
    switch (t.kind) {
      case TokenKind::Identifier:
      case TokenKind::NumberLit:
      case TokenKind::StringLit:
      case TokenKind::CharLit:
        return true;
      case TokenKind::Keyword:
        return t.is("sizeof") || is_value_keyword(t.text);
      case TokenKind::Operator:
        return is_prefix_operator(t.text) || t.is("::");
      case TokenKind::Punct:
        return t.is("(");
      default:
        return false;
    }
  }

  bool binary_position(std::size_t pos, std::size_t lo, std::size_t hi) const {
    if (pos == lo || !starts_operand(pos + 1, hi)) return false;
    const Token& p = S(pos - 1);
    switch (p.kind) {
      case TokenKind::Identifier:
      case TokenKind::NumberLit:
      case TokenKind::StringLit:
      case TokenKind::CharLit:
        return true;
      case TokenKind::Keyword:
        return is_value_keyword(p.text);
      case TokenKind::Operator:
        return (p.is("++") || p.is("--")) && is_postfix_incdec(pos - 1, lo);
      case TokenKind::Punct:
        if (p.is("]")) return true;
        return p.is(")") && classify_close(pos - 1, lo) == CloseKind::Plain;
      default:
        return false;
    }
  }

  bool call_position(std::size_t pos, std::size_t lo) const {
    if (pos == lo) return true;
    const Token& p = S(pos - 1);
    switch (p.kind) {
      case TokenKind::Operator:
        return !is_member_access(p.text);
      case TokenKind::Punct:
      case TokenKind::PreprocLine:
        return true;
      case TokenKind::Keyword:
        return is_expression_keyword(p.text);
      default:
        return false;
    }
  }

  bool declarator_position(std::size_t pos, std::size_t lo) const {
    if (pos == lo) return true;
    const Token& p = S(pos - 1);
    if (p.kind == TokenKind::PreprocLine || p.is(";") || p.is("{") || p.is("}")) return true;
    if (p.is("(") || p.is(",")) {
      const Token& t = S(pos);
      if (t.kind == TokenKind::Keyword) return is_type_keyword(t.text) || is_tag_keyword(t.text);
      return t.kind == TokenKind::Identifier && t.text.size() > 2 && t.text.ends_with("_t");
    }
    return false;
  }

  bool line_start(std::size_t pos, std::size_t lo) const { return pos == lo || S(pos - 1).end_line < S(pos).line; }

  bool guard_holds(Guard g, std::size_t pos, std::size_t lo, std::size_t hi) const {
    switch (g) {
      case Guard::None:
        return true;
      case Guard::UnaryPosition:
        return unary_position(pos, lo);
      case Guard::BinaryPosition:
        return binary_position(pos, lo, hi);
      case Guard::CallPosition:
        return call_position(pos, lo);
      case Guard::DeclaratorPosition:
        return declarator_position(pos, lo);
      case Guard::LineStart:
        return line_start(pos, lo);
    }
    return false;
  }

  // ---- capture scanners ---------------------------------------------------

  // Skips a bracketed group opening at `i`; returns the index past its closer.
  std::optional<std::size_t> group_end(std::size_t i, std::size_t hi) const {
    std::vector<char> stack;
    for (; i < hi; ++i) {
      const Token& t = S(i);
      if (t.kind != TokenKind::Punct) continue;
      const char c = t.text[0];
      if (c == '(' || c == '[' || c == '{') {
        stack.push_back(c == '(' ? ')' : c == '[' ? ']' : '}');
      } else if (c == ')' || c == ']' || c == '}') {
        if (stack.empty() || stack.back() != c) return std::nullopt;
        stack.pop_back();
        if (stack.empty()) return i + 1;
      }
    }
    return std::nullopt;
  }

  // Scans balanced tokens from `i` up to a depth-zero `)` (or `,` when
  // `stop_at_comma`); returns the index of that stopper.
  std::optional<std::size_t> scan_until_close(std::size_t i, std::size_t hi, bool stop_at_comma) const {
    while (i < hi) {
      const Token& t = S(i);
      if (t.kind == TokenKind::Punct) {
        if (t.is(")") || (stop_at_comma && t.is(","))) return i;
        if (t.is("]") || t.is("}") || t.is(";")) return std::nullopt;
        if (t.is("(") || t.is("[") || t.is("{")) {
          const auto e = group_end(i, hi);
          if (!e) return std::nullopt;
          i = *e;
          continue;
        }
      }
      ++i;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> scan_operand(std::size_t i, std::size_t hi) const {
    // prefix operators and casts
    while (i < hi) {
      const Token& t = S(i);
      if (t.kind == TokenKind::Operator && is_prefix_operator(t.text)) {
        ++i;
      } else if (t.is("sizeof")) {
        ++i;
      } else if (t.is("(")) {
        const auto e = group_end(i, hi);
        if (!e) return std::nullopt;
        if (is_cast_content(i, *e - 1) && starts_operand(*e, hi)) {
          i = *e;
        } else {
          break;
        }
      } else {
        break;
      }
    }
    if (i >= hi) return std::nullopt;
    // primary
    const Token& t = S(i);
    if (t.kind == TokenKind::Identifier || t.kind == TokenKind::NumberLit || t.kind == TokenKind::CharLit ||
        (t.kind == TokenKind::Keyword && is_value_keyword(t.text))) {
      ++i;
    } else if (t.kind == TokenKind::StringLit) {
      while (i < hi && S(i).kind == TokenKind::StringLit) ++i;
    } else if (t.is("::") && i + 1 < hi && S(i + 1).kind == TokenKind::Identifier) {
      i += 2;
    } else if (t.is("(")) {
      const auto e = group_end(i, hi);
      if (!e) return std::nullopt;
      i = *e;
    } else {
      return std::nullopt;
    }
    // postfix chain
    while (i < hi) {
      const Token& p = S(i);
      if (p.is("[") || p.is("(")) {
        const auto e = group_end(i, hi);
        if (!e) break;
        i = *e;
      } else if ((p.is(".") || p.is("->") || p.is("::")) && i + 1 < hi &&
                 S(i + 1).kind == TokenKind::Identifier) {
        i += 2;
      } else if (p.is("++") || p.is("--")) {
        ++i;
      } else {
        break;
      }
    }
    return i;
  }

  // Possible ends of a type-specifier run, longest first.
  std::vector<std::size_t> scan_types(std::size_t i, std::size_t hi) const {
    std::vector<std::size_t> ends;
    bool named = false;
    while (i < hi) {
      const Token& t = S(i);
      if (t.kind == TokenKind::Keyword && is_type_keyword(t.text)) {
        ++i;
      } else if (!named && t.kind == TokenKind::Keyword && is_tag_keyword(t.text) && i + 1 < hi &&
                 S(i + 1).kind == TokenKind::Identifier) {
        i += 2;
        named = true;
      } else if (!named && t.kind == TokenKind::Identifier) {
        ++i;
        while (i + 1 < hi && S(i).is("::") && S(i + 1).kind == TokenKind::Identifier) i += 2;
        named = true;
      } else {
        break;
      }
      ends.push_back(i);
    }
    std::reverse(ends.begin(), ends.end());
    return ends;
  }

  std::optional<std::size_t> scan_angle(std::size_t i, std::size_t hi) const {
    if (i >= hi || !S(i).is("<")) return std::nullopt;
    int depth = 0;
    for (; i < hi; ++i) {
      const Token& t = S(i);
      if (t.is("<")) ++depth;
      if (t.is(">")) --depth;
      if (t.is(">>")) depth -= 2;
      if (t.is(";") || t.is("{") || t.is("}")) return std::nullopt;
      if (depth < 0) return std::nullopt;
      if (depth == 0) return i + 1;
    }
    return std::nullopt;
  }

  // ---- matching -----------------------------------------------------------

  bool lookahead_holds(const PatternItem& it, std::size_t pos, std::size_t hi) const {
    for (const std::string& alt : it.alternatives) {
      if (alt == "<eol>") {
        if (pos >= hi || S(pos).line > S(pos - 1).end_line) return true;
      } else if (pos < hi && S(pos).text == alt) {
        return true;
      }
    }
    return false;
  }

  bool match_from(const TransformRule& rule, std::size_t item, std::size_t pos, std::size_t hi, Match& m) const {
    if (item == rule.pattern.size()) {
      m.end = pos;
      return true;
    }
    const PatternItem& it = rule.pattern[item];
    auto capture_then = [&](std::size_t end) {
      m.captures[it.text] = Capture{pos, end, std::nullopt};
      return match_from(rule, item + 1, end, hi, m);
    };
    switch (it.type) {
      case PatternItem::Type::Literal:
        return pos < hi && S(pos).text == it.text && S(pos).kind != TokenKind::StringLit &&
               S(pos).kind != TokenKind::CharLit && match_from(rule, item + 1, pos + 1, hi, m);
      case PatternItem::Type::Wildcard:
        return pos < hi && S(pos).kind == it.kind && match_from(rule, item + 1, pos + 1, hi, m);
      case PatternItem::Type::Lookahead:
        return lookahead_holds(it, pos, hi) && match_from(rule, item + 1, pos, hi, m);
      case PatternItem::Type::Directive: {
        if (pos >= hi || S(pos).kind != TokenKind::PreprocLine) return false;
        const auto [name, rest] = split_directive(S(pos).text);
        if (name != it.text) return false;
        if (item + 1 < rule.pattern.size() && rule.pattern[item + 1].capture == CaptureKind::Text &&
            rule.pattern[item + 1].type == PatternItem::Type::Capture) {
          m.captures[rule.pattern[item + 1].text] = Capture{pos, pos, std::string(rest)};
          m.end = pos + 1;
          return true;
        }
        return match_from(rule, item + 1, pos + 1, hi, m);
      }
      case PatternItem::Type::Capture:
        break;
    }
    switch (it.capture) {
      case CaptureKind::Ident:
        return pos < hi && S(pos).kind == TokenKind::Identifier && capture_then(pos + 1);
      case CaptureKind::Operand: {
        const auto e = scan_operand(pos, hi);
        return e && capture_then(*e);
      }
      case CaptureKind::Args:
      case CaptureKind::Tail: {
        const auto e = scan_until_close(pos, hi, false);
        return e && (*e > pos || it.capture == CaptureKind::Tail) && capture_then(*e);
      }
      case CaptureKind::Arg: {
        const auto e = scan_until_close(pos, hi, true);
        return e && *e > pos && capture_then(*e);
      }
      case CaptureKind::Angle: {
        const auto e = scan_angle(pos, hi);
        return e && capture_then(*e);
      }
      case CaptureKind::Types:
        for (std::size_t e : scan_types(pos, hi)) {
          if (capture_then(e)) return true;
        }
        return false;
      case CaptureKind::Text:
        return false;  // only valid after a directive
    }
    return false;
  }

  // Comments inside a match must fall inside a capture, which renders them.
  bool comments_covered(const Match& m, std::size_t start) const {
    for (std::size_t raw = sig_[start]; raw < sig_[m.end - 1]; ++raw) {
      if (toks_[raw].significant()) continue;
      bool inside = false;
      for (const auto& [name, c] : m.captures) {
        if (!c.text && c.end > c.begin && sig_[c.begin] < raw && raw < sig_[c.end - 1]) inside = true;
      }
      if (!inside) return false;
    }
    return true;
  }

  std::optional<std::pair<const TransformRule*, Match>> best_match(std::size_t pos, std::size_t lo,
                                                                   std::size_t hi) const {
    for (const auto& group : by_category_) {
      std::optional<std::pair<const TransformRule*, Match>> best;
      for (const TransformRule* rule : group) {
        const PatternItem& first = rule->pattern.front();
        if (first.type == PatternItem::Type::Literal && S(pos).text != first.text) continue;
        if (first.type == PatternItem::Type::Directive && S(pos).kind != TokenKind::PreprocLine) continue;
        if (!guard_holds(rule->guard, pos, lo, hi)) continue;
        Match m;
        if (!match_from(*rule, 0, pos, hi, m) || m.end <= pos || !comments_covered(m, pos)) continue;
        if (!best || m.end > best->second.end) best.emplace(rule, std::move(m));
      }
      if (best) return best;
    }
    return std::nullopt;
  }

  // ---- rendering ----------------------------------------------------------

  std::string render_capture(const Capture& c) {
    if (c.text) {
      Renderer sub(*c.text, rules_, counts_);
      return sub.render_all();
    }
    if (c.end <= c.begin) return {};
    return render(sig_[c.begin], sig_[c.end - 1] + 1, c.begin, c.end, false);
  }

  std::string instantiate(const TransformRule& rule, const Match& m) {
    ++counts_[static_cast<std::size_t>(rule.category)];
    std::string out;
    bool drop_space = false;
    for (const TemplatePiece& piece : split_template(rule.template_text)) {
      if (!piece.placeholder) {
        std::string_view lit = piece.text;
        if (drop_space && !lit.empty() && lit.front() == ' ') lit.remove_prefix(1);
        drop_space = false;
        out += lit;
        continue;
      }
      const std::string value = render_capture(m.captures.at(piece.text));
      if (value.empty()) {
        if (!out.empty() && out.back() == ' ') {
          out.pop_back();
        } else {
          drop_space = true;
        }
      }
      out += value;
    }
    return out;
  }

  void append(std::string& out, std::size_t& last_end, const Token& first, std::string_view piece, bool top_level) {
    std::string gap;
    if (last_end != npos) {
      const std::string_view raw = text_.substr(last_end, first.offset - last_end);
      if (raw.find('\n') != std::string_view::npos) {
        gap = "\n";
      } else if (!raw.empty()) {
        gap = " ";
      }
    }
    const bool at_line_start = last_end == npos || gap == "\n";
    if (top_level && at_line_start && loop_lines_) {
      const auto idx = static_cast<std::size_t>(first.line - 1);
      if (idx < loop_lines_->size() && (*loop_lines_)[idx] && !prefixed_[idx]) {
        prefixed_[idx] = true;
        out += gap;
        out += kLoopStructurePrefix;
        out += piece;
        return;
      }
    }
    if (gap.empty() && !out.empty() && !piece.empty() && is_word_char(out.back()) && is_word_char(piece.front())) {
      gap = " ";
    }
    out += gap;
    out += piece;
  }

  std::string render(std::size_t raw_begin, std::size_t raw_end, std::size_t lo, std::size_t hi, bool top_level) {
    std::string out;
    std::size_t last_end = npos;
    std::size_t i = raw_begin;
    while (i < raw_end) {
      const Token& t = toks_[i];
      std::size_t next = i + 1;
      std::string piece;
      const bool rewritable =
          t.significant() && t.kind != TokenKind::StringLit && t.kind != TokenKind::CharLit;
      std::optional<std::pair<const TransformRule*, Match>> m;
      if (rewritable) m = best_match(sig_of_raw_[i], lo, hi);
      if (m) {
        piece = instantiate(*m->first, m->second);
        next = sig_[m->second.end - 1] + 1;
      } else {
        piece = t.text;
      }
      append(out, last_end, t, piece, top_level);
      const Token& last = toks_[next - 1];
      last_end = last.offset + last.text.size();
      i = next;
    }
    return out;
  }

  std::string_view text_;
  std::vector<Token> toks_;
  std::vector<std::size_t> sig_;
  std::vector<std::size_t> sig_of_raw_;
  const RuleSet& rules_;
  std::array<int, kCategoryCount>& counts_;
  std::array<std::vector<const TransformRule*>, kCategoryCount> by_category_;
  const std::vector<bool>* loop_lines_;
  std::vector<bool> prefixed_;
};

}  // namespace

NaturalizedOutput apply_rules(const std::vector<MappedLine>& lines, const RuleSet& rules) {
  NaturalizedOutput out;
  std::string joined;
  std::vector<bool> loop_lines;
  loop_lines.reserve(lines.size());
  for (const MappedLine& l : lines) {
    joined += l.text;
    joined += '\n';
    loop_lines.push_back(l.loop_header);
    out.original_chars += l.rendered().size() + 1;
  }
  Renderer r(joined, rules, out.rules_applied, &loop_lines);
  out.text = r.render_all();
  if (!out.text.empty()) out.text += '\n';
  out.original_line_count = static_cast<int>(lines.size());
  out.path_line_count = static_cast<int>(lines.size());
  out.naturalized_chars = out.text.size();
  return out;
}

NaturalizedOutput apply_rules(std::string_view text, const RuleSet& rules) {
  std::vector<MappedLine> lines;
  int n = 0;
  for (std::string& line : split_lines(text)) {
    MappedLine ml{++n, std::move(line), false};
    const std::size_t indent = ml.text.find_first_not_of(" \t");
    if (indent != std::string::npos && std::string_view(ml.text).substr(indent).starts_with(kLoopAnnotation)) {
      const std::size_t after = indent + kLoopAnnotation.size();
      if (after == ml.text.size() || ml.text[after] == ' ' || ml.text[after] == '\t') {
        ml.text.erase(indent, kLoopAnnotation.size() + (after < ml.text.size() ? 1 : 0));
        ml.loop_header = true;
      }
    }
    lines.push_back(std::move(ml));
  }
  return apply_rules(lines, rules);
}

}  // namespace clnx
