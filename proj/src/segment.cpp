#include <string>

#include "clnx/error.hpp"
#include "clnx/source_model.hpp"

namespace clnx {

std::string_view to_string(StatementKind kind) {
  switch (kind) {
    case StatementKind::Simple: return "Simple";
    case StatementKind::CondHeader: return "CondHeader";
    case StatementKind::ElseHeader: return "ElseHeader";
    case StatementKind::CaseLabel: return "CaseLabel";
    case StatementKind::GotoLabel: return "GotoLabel";
    case StatementKind::Jump: return "Jump";
    case StatementKind::BlockOpen: return "BlockOpen";
    case StatementKind::BlockClose: return "BlockClose";
    case StatementKind::Declaration: return "Declaration";
    case StatementKind::Preproc: return "Preproc";
    case StatementKind::Signature: return "Signature";
  }
  return "?";
}

std::string Statement::text() const {
  std::string out;
  for (const Token& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.text;
  }
  return out;
}

namespace {

bool is_type_word(const Token& t) {
  static constexpr std::string_view kTypeWords[] = {
      "int", "char", "short", "long", "float", "double", "void", "signed",
      "unsigned", "bool", "_Bool", "const", "volatile", "static", "register",
      "extern", "struct", "union", "enum", "typedef", "auto", "inline", "class",
  };
  if (t.kind != TokenKind::Keyword) return false;
  for (std::string_view w : kTypeWords) {
    if (t.text == w) return true;
  }
  return false;
}

class Segmenter {
 public:
  explicit Segmenter(const std::vector<Token>& all) {
    for (const Token& t : all) {
      if (t.significant()) toks_.push_back(&t);
    }
  }

  std::vector<Statement> run() {
    while (!at_end() && cur().kind == TokenKind::PreprocLine) emit_one(StatementKind::Preproc);

    const std::size_t body = find_body_brace();
    if (body != kNone) {
      if (body > pos_) emit(StatementKind::Signature, Control::None, pos_, body);
      pos_ = body;
      parse_compound();
    }
    while (!at_end()) {
      if (cur().is("}")) unbalanced(cur(), "closing brace without matching opening brace");
      parse_statement();
    }
    return std::move(out_);
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& cur() const { return *toks_[pos_]; }
  const Token* at(std::size_t i) const { return i < toks_.size() ? toks_[i] : nullptr; }

  [[noreturn]] static void unbalanced(const Token& t, const char* what) {
    throw Error(ErrorCode::UnbalancedBraces, what, t.line, t.col);
  }

  // The body opens at the first top-level '{'. A ';' or a control keyword
  // before it means the input is a bare statement sequence.
  std::size_t find_body_brace() const {
    if (at_end()) return kNone;
    const Token& first = cur();
    if (first.kind == TokenKind::Keyword &&
        (first.is("if") || first.is("while") || first.is("for") || first.is("do") ||
         first.is("switch") || first.is("return") || first.is("goto"))) {
      return kNone;
    }
    int depth = 0;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      const Token& t = *toks_[i];
      if (t.is("(") || t.is("[")) ++depth;
      else if (t.is(")") || t.is("]")) depth = depth > 0 ? depth - 1 : 0;
      else if (depth == 0 && t.is(";")) return kNone;
      else if (depth == 0 && t.is("{")) return i;
    }
    return kNone;
  }

  void emit(StatementKind kind, Control control, std::size_t from, std::size_t to,
            std::string label = {}) {
    Statement s;
    s.kind = kind;
    s.control = control;
    s.label = std::move(label);
    s.tokens.reserve(to - from);
    for (std::size_t i = from; i < to; ++i) s.tokens.push_back(*toks_[i]);
    s.lines.first = toks_[from]->line;
    s.lines.last = toks_[from]->end_line;
    for (std::size_t i = from; i < to; ++i) {
      s.lines.first = std::min(s.lines.first, toks_[i]->line);
      s.lines.last = std::max(s.lines.last, toks_[i]->end_line);
    }
    out_.push_back(std::move(s));
  }

  void emit_one(StatementKind kind, Control control = Control::None) {
    emit(kind, control, pos_, pos_ + 1);
    ++pos_;
  }

  // Consumes a parenthesised group starting at pos_; returns one past ')'.
  std::size_t skip_group(const Token& keyword) {
    if (at_end() || !cur().is("(")) {
      throw Error(ErrorCode::MalformedHeader,
                  "'" + keyword.text + "' must be followed by '('", keyword.line, keyword.col);
    }
    int depth = 0;
    while (!at_end()) {
      const Token& t = cur();
      if (t.is("(")) ++depth;
      else if (t.is(")") && --depth == 0) return ++pos_;
      else if (t.is("{") || t.is("}")) {
        // Statement-expressions and lambdas inside conditions are rare; a
        // brace here almost always means a missing ')'.
        if (t.is("}")) break;
      }
      ++pos_;
    }
    throw Error(ErrorCode::MalformedHeader, "unterminated '" + keyword.text + "' condition",
                keyword.line, keyword.col);
  }

  void parse_compound() {
    const Token& open = cur();
    emit_one(StatementKind::BlockOpen);
    while (true) {
      if (at_end()) unbalanced(open, "opening brace never closed");
      if (cur().is("}")) {
        emit_one(StatementKind::BlockClose);
        return;
      }
      parse_statement();
    }
  }

  void parse_body(const Token& owner) {
    while (!at_end() && cur().kind == TokenKind::PreprocLine) emit_one(StatementKind::Preproc);
    if (at_end() || cur().is("}")) {
      throw Error(ErrorCode::MalformedHeader, "'" + owner.text + "' has no body", owner.line,
                  owner.col);
    }
    parse_statement();
  }

  void parse_statement() {
    const Token& t = cur();
    if (t.kind == TokenKind::PreprocLine) {
      emit_one(StatementKind::Preproc);
      return;
    }
    if (t.is("{")) {
      parse_compound();
      return;
    }
    if (t.kind == TokenKind::Keyword) {
      if (t.is("if") || t.is("while") || t.is("switch") || t.is("for")) {
        parse_conditional(t);
        return;
      }
      if (t.is("do")) {
        parse_do(t);
        return;
      }
      if (t.is("else")) {
        emit_one(StatementKind::ElseHeader, Control::Else);
        parse_body(t);
        return;
      }
      if (t.is("case")) {
        parse_case(t);
        return;
      }
      if (t.is("default") && at(pos_ + 1) && at(pos_ + 1)->is(":")) {
        emit(StatementKind::CaseLabel, Control::Default, pos_, pos_ + 2);
        pos_ += 2;
        return;
      }
      if (t.is("return") || t.is("break") || t.is("continue") || t.is("goto")) {
        parse_jump(t);
        return;
      }
      if (t.is("try")) {
        emit_one(StatementKind::Simple);
        return;
      }
      if (t.is("catch")) {
        const std::size_t from = pos_++;
        skip_group(t);
        emit(StatementKind::Simple, Control::None, from, pos_);
        return;
      }
    }
    if (t.kind == TokenKind::Identifier && at(pos_ + 1) && at(pos_ + 1)->is(":")) {
      emit(StatementKind::GotoLabel, Control::Label, pos_, pos_ + 2, t.text);
      pos_ += 2;
      return;
    }
    parse_simple();
  }

  void parse_conditional(const Token& kw) {
    const std::size_t from = pos_++;
    const std::size_t header_open = pos_;
    skip_group(kw);
    Control control = Control::If;
    if (kw.is("while")) control = Control::While;
    else if (kw.is("switch")) control = Control::Switch;
    else if (kw.is("for")) control = empty_for_condition(header_open, pos_) ? Control::ForEver : Control::For;
    emit(StatementKind::CondHeader, control, from, pos_);
    parse_body(kw);
    if (control == Control::If && !at_end() && cur().is("else")) {
      const Token& e = cur();
      emit_one(StatementKind::ElseHeader, Control::Else);
      parse_body(e);
    }
  }

  // `for (init; ; step)` has no exit test.
  bool empty_for_condition(std::size_t open, std::size_t close) const {
    int depth = 0;
    std::size_t first_semi = kNone;
    for (std::size_t i = open; i < close; ++i) {
      const Token& t = *toks_[i];
      if (t.is("(") || t.is("[") || t.is("{")) ++depth;
      else if (t.is(")") || t.is("]") || t.is("}")) --depth;
      else if (depth == 1 && t.is(";")) {
        if (first_semi == kNone) {
          first_semi = i;
        } else {
          return i == first_semi + 1;
        }
      }
    }
    return false;
  }

  void parse_do(const Token& kw) {
    emit_one(StatementKind::CondHeader, Control::Do);
    parse_body(kw);
    if (at_end() || !cur().is("while")) {
      throw Error(ErrorCode::MalformedHeader, "'do' body not followed by 'while'", kw.line,
                  kw.col);
    }
    const Token& w = cur();
    const std::size_t from = pos_++;
    skip_group(w);
    if (!at_end() && cur().is(";")) ++pos_;
    emit(StatementKind::CondHeader, Control::DoWhile, from, pos_);
  }

  void parse_case(const Token& kw) {
    const std::size_t from = pos_++;
    int depth = 0;
    int pending_ternary = 0;
    while (!at_end()) {
      const Token& t = cur();
      if (t.is("(") || t.is("[")) ++depth;
      else if (t.is(")") || t.is("]")) --depth;
      else if (depth == 0 && t.is("?")) ++pending_ternary;
      else if (depth == 0 && t.is(":")) {
        if (pending_ternary == 0) {
          ++pos_;
          emit(StatementKind::CaseLabel, Control::Case, from, pos_);
          return;
        }
        --pending_ternary;
      } else if (t.is(";") || t.is("{") || t.is("}")) {
        break;
      }
      ++pos_;
    }
    throw Error(ErrorCode::MalformedHeader, "'case' label missing ':'", kw.line, kw.col);
  }

  void parse_jump(const Token& kw) {
    Control control = Control::Return;
    if (kw.is("break")) control = Control::Break;
    else if (kw.is("continue")) control = Control::Continue;
    else if (kw.is("goto")) control = Control::Goto;
    std::string target;
    if (control == Control::Goto && at(pos_ + 1) && at(pos_ + 1)->kind == TokenKind::Identifier) {
      target = at(pos_ + 1)->text;
    }
    const std::size_t from = pos_;
    const std::size_t end = scan_simple_end();
    emit(StatementKind::Jump, control, from, end, std::move(target));
    pos_ = end;
  }

  void parse_simple() {
    const std::size_t from = pos_;
    const std::size_t end = scan_simple_end();
    if (end == from) {
      // Only a '}' can stop a statement before it starts; callers handle it.
      unbalanced(cur(), "unexpected closing brace");
    }
    emit(looks_like_declaration(from, end) ? StatementKind::Declaration : StatementKind::Simple,
         Control::None, from, end);
    pos_ = end;
  }

  // Returns one past the statement's last token. Stops after ';' at depth 0,
  // before an enclosing '}', or before the '{' of a macro-introduced block
  // such as `list_for_each_entry(pos, head, member) {`.
  std::size_t scan_simple_end() const {
    int depth = 0;
    std::size_t i = pos_;
    while (i < toks_.size()) {
      const Token& t = *toks_[i];
      if (t.is("(") || t.is("[")) {
        ++depth;
      } else if (t.is(")") || t.is("]")) {
        depth = depth > 0 ? depth - 1 : 0;
      } else if (t.is(";") && depth == 0) {
        return i + 1;
      } else if (t.is("}")) {
        if (depth == 0) return i;
        // A stray brace inside parens: let the caller see it.
        return i;
      } else if (t.is("{")) {
        if (depth == 0 && is_macro_block_head(pos_, i)) return i;
        i = skip_braces(i);
        continue;
      }
      ++i;
    }
    return i;
  }

  // IDENT ( ... ) immediately before '{'.
  bool is_macro_block_head(std::size_t from, std::size_t brace) const {
    if (brace < from + 3) return false;
    if (toks_[from]->kind != TokenKind::Identifier || !toks_[from + 1]->is("(")) return false;
    int depth = 0;
    for (std::size_t i = from + 1; i < brace; ++i) {
      if (toks_[i]->is("(")) ++depth;
      else if (toks_[i]->is(")") && --depth == 0) return i + 1 == brace;
    }
    return false;
  }

  // Skips a balanced {...} run that belongs to an expression or declaration
  // (initialiser lists, lambdas, struct bodies). Returns one past '}' or the
  // end of input when unbalanced, which compound parsing then reports.
  std::size_t skip_braces(std::size_t open) const {
    int depth = 0;
    for (std::size_t i = open; i < toks_.size(); ++i) {
      if (toks_[i]->is("{")) ++depth;
      else if (toks_[i]->is("}") && --depth == 0) return i + 1;
    }
    unbalanced(*toks_[open], "opening brace never closed");
  }

  bool looks_like_declaration(std::size_t from, std::size_t to) const {
    const Token& first = *toks_[from];
    if (is_type_word(first)) return true;
    // IDENT [*|&]* IDENT followed by = ; [ ,
    if (first.kind != TokenKind::Identifier) return false;
    std::size_t i = from + 1;
    while (i < to && (toks_[i]->is("*") || toks_[i]->is("&"))) ++i;
    if (i >= to || toks_[i]->kind != TokenKind::Identifier) return false;
    ++i;
    if (i >= to) return false;
    const Token& next = *toks_[i];
    return next.is("=") || next.is(";") || next.is("[") || next.is(",");
  }

  std::vector<const Token*> toks_;
  std::size_t pos_ = 0;
  std::vector<Statement> out_;
};

}  // namespace

std::vector<Statement> segment(const std::vector<Token>& tokens) {
  return Segmenter(tokens).run();
}

}  // namespace clnx
