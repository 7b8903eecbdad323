#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace clnx {

enum class TokenKind {
  Identifier,
  Keyword,
  Operator,
  Punct,
  NumberLit,
  StringLit,
  CharLit,
  PreprocLine,
  Comment,
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::Punct;
  std::string text;
  int line = 1;      // 1-based line of the first byte
  int col = 1;       // 1-based column of the first byte
  int end_line = 1;  // line of the last byte (differs for comments, raw strings, continued directives)
  std::size_t offset = 0;  // byte offset into the lexed text

  bool is(std::string_view t) const { return text == t; }
  bool significant() const { return kind != TokenKind::Comment; }
};

struct LexOptions {
  // Unterminated literals and comments run to end of input instead of
  // raising. Used when re-lexing already extracted line excerpts.
  bool tolerant = false;
};

/// Lossless lexer for a single C/C++ function. Whitespace is not tokenized;
/// the gap between two consecutive tokens is exactly the bytes between
/// `offset + text.size()` of the first and `offset` of the second.
std::vector<Token> lex(std::string_view source, LexOptions options = {});

/// Reassembles the original text from a token list and its source.
std::string reassemble(std::string_view source, const std::vector<Token>& tokens);

bool is_keyword(std::string_view word);

struct LineRange {
  int first = 0;
  int last = 0;

  bool is_sentinel() const { return first == 0 && last == 0; }
  bool intersects(const LineRange& o) const { return first <= o.last && o.first <= last; }
  bool operator==(const LineRange&) const = default;
};

enum class StatementKind {
  Simple,
  CondHeader,
  ElseHeader,
  CaseLabel,
  GotoLabel,
  Jump,
  BlockOpen,
  BlockClose,
  Declaration,
  Preproc,
  Signature,
};

std::string_view to_string(StatementKind kind);

// Which construct introduced a statement. Keeps the flat statement list
// enough information to rebuild nesting without re-reading tokens.
enum class Control {
  None,
  If,
  While,
  For,
  ForEver,  // `for` with an empty condition
  Do,
  DoWhile,  // trailing `while (...)` of a do loop
  Switch,
  Else,
  Case,
  Default,
  Label,
  Return,
  Goto,
  Break,
  Continue,
};

struct Statement {
  StatementKind kind = StatementKind::Simple;
  Control control = Control::None;
  std::vector<Token> tokens;
  LineRange lines;
  std::string label;  // label name for GotoLabel, target for goto

  std::string text() const;  // token texts joined by single spaces
};

/// Segments the lexed function into statements. Comment tokens are dropped;
/// every other token lands in exactly one statement. The text before the
/// body brace becomes a Signature statement; input without a recognisable
/// signature is treated as a bare statement sequence.
std::vector<Statement> segment(const std::vector<Token>& tokens);

/// Splits text into lines on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view text);

}  // namespace clnx
