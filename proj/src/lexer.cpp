#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "clnx/error.hpp"
#include "clnx/source_model.hpp"

namespace clnx {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "Identifier";
    case TokenKind::Keyword: return "Keyword";
    case TokenKind::Operator: return "Operator";
    case TokenKind::Punct: return "Punct";
    case TokenKind::NumberLit: return "NumberLit";
    case TokenKind::StringLit: return "StringLit";
    case TokenKind::CharLit: return "CharLit";
    case TokenKind::PreprocLine: return "PreprocLine";
    case TokenKind::Comment: return "Comment";
  }
  return "?";
}

bool is_keyword(std::string_view word) {
  static const std::unordered_set<std::string_view> kKeywords = {
      "alignas", "alignof", "auto", "bool", "break", "case", "catch", "char",
      "class", "const", "constexpr", "const_cast", "continue", "decltype",
      "default", "delete", "do", "double", "dynamic_cast", "else", "enum",
      "explicit", "extern", "false", "float", "for", "friend", "goto", "if",
      "inline", "int", "long", "mutable", "namespace", "new", "noexcept",
      "nullptr", "operator", "private", "protected", "public", "register",
      "reinterpret_cast", "restrict", "return", "short", "signed", "sizeof",
      "static", "static_assert", "static_cast", "struct", "switch", "template",
      "this", "throw", "true", "try", "typedef", "typeid", "typename", "union",
      "unsigned", "using", "virtual", "void", "volatile", "while", "_Bool",
      "_Static_assert", "_Noreturn", "_Thread_local", "__inline", "__restrict",
  };
  return kKeywords.contains(word);
}

namespace {

// Longest first within each leading character is handled by trying lengths 3, 2, 1.
constexpr std::array<std::string_view, 27> kMultiOps = {
    ">>=", "<<=", "...", "->*", "<=>", "->", "++", "--", "<<", ">>",
    "<=",  ">=",  "==",  "!=",  "&&",  "||", "+=", "-=", "*=", "/=",
    "%=",  "&=",  "|=",  "^=",  "::",  ".*", "##",
};

constexpr std::string_view kSingleOps = "+-*/%&|^~!=<>?:.#";
constexpr std::string_view kPuncts = "()[]{};,";

bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool is_ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

class Lexer {
 public:
  Lexer(std::string_view src, LexOptions opts) : src_(src), opts_(opts) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        advance();
        at_line_start_ = true;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        advance();
        continue;
      }
      if (c == '#' && at_line_start_) {
        lex_preproc();
      } else if (c == '/' && peek(1) == '/') {
        lex_line_comment();
      } else if (c == '/' && peek(1) == '*') {
        lex_block_comment();
      } else if (c == '"') {
        lex_quoted(pos_, '"', TokenKind::StringLit);
      } else if (c == '\'') {
        lex_quoted(pos_, '\'', TokenKind::CharLit);
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        lex_number();
      } else if (is_ident_start(static_cast<unsigned char>(c))) {
        lex_word();
      } else {
        lex_symbol();
      }
      at_line_start_ = false;
    }
    return std::move(out_);
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      line_start_ = pos_ + 1;
    }
    ++pos_;
  }

  int col_of(std::size_t p) const { return static_cast<int>(p - line_start_) + 1; }

  struct Mark {
    std::size_t pos;
    int line;
    int col;
  };

  Mark mark() const { return {pos_, line_, col_of(pos_)}; }

  void emit(TokenKind kind, const Mark& m) {
    Token t;
    t.kind = kind;
    t.text = std::string(src_.substr(m.pos, pos_ - m.pos));
    t.line = m.line;
    t.col = m.col;
    t.offset = m.pos;
    t.end_line = line_;
    // A token ending right after a newline (never happens for our kinds
    // except a tolerant run-to-end) still ends on the previous line.
    if (pos_ > m.pos && src_[pos_ - 1] == '\n') t.end_line = line_ - 1;
    out_.push_back(std::move(t));
  }

  void lex_preproc() {
    const Mark m = mark();
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        // Backslash continuation, tolerating trailing CR.
        std::size_t back = pos_;
        if (back > m.pos && src_[back - 1] == '\r') --back;
        if (back > m.pos && src_[back - 1] == '\\') {
          advance();
          continue;
        }
        break;
      }
      if (c == '/' && peek(1) == '*') {
        // Block comments inside directives may span lines; keep them opaque.
        const std::size_t close = src_.find("*/", pos_ + 2);
        const std::size_t stop = close == std::string_view::npos ? src_.size() : close + 2;
        while (pos_ < stop) advance();
        continue;
      }
      advance();
    }
    // Trailing CR belongs to the line break, not the directive.
    std::size_t end = pos_;
    while (end > m.pos && src_[end - 1] == '\r') --end;
    const std::size_t saved = pos_;
    pos_ = end;
    emit(TokenKind::PreprocLine, m);
    pos_ = saved;
  }

  void lex_line_comment() {
    const Mark m = mark();
    while (pos_ < src_.size() && src_[pos_] != '\n') advance();
    std::size_t end = pos_;
    while (end > m.pos && src_[end - 1] == '\r') --end;
    const std::size_t saved = pos_;
    pos_ = end;
    emit(TokenKind::Comment, m);
    pos_ = saved;
  }

  void lex_block_comment() {
    const Mark m = mark();
    advance();
    advance();
    while (pos_ < src_.size()) {
      if (src_[pos_] == '*' && peek(1) == '/') {
        advance();
        advance();
        emit(TokenKind::Comment, m);
        return;
      }
      advance();
    }
    if (!opts_.tolerant) {
      throw Error(ErrorCode::UnterminatedComment, "block comment never closed", m.line, m.col);
    }
    emit(TokenKind::Comment, m);
  }

  // `start` may precede pos_ when an encoding prefix (L, u8, ...) was consumed.
  void lex_quoted(std::size_t start, char quote, TokenKind kind) {
    Mark m{start, line_, col_of(start)};
    advance();  // opening quote
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\\') {
        advance();
        if (pos_ < src_.size()) advance();
        continue;
      }
      if (c == quote) {
        advance();
        emit(kind, m);
        return;
      }
      if (c == '\n') break;
      advance();
    }
    if (!opts_.tolerant) {
      throw Error(ErrorCode::UnterminatedString,
                  kind == TokenKind::CharLit ? "character literal never closed"
                                             : "string literal never closed",
                  m.line, m.col);
    }
    std::size_t end = pos_;
    while (end > m.pos + 1 && src_[end - 1] == '\r') --end;
    const std::size_t saved = pos_;
    pos_ = end;
    emit(kind, m);
    pos_ = saved;
  }

  void lex_raw_string(std::size_t start) {
    Mark m{start, line_, col_of(start)};
    advance();  // opening quote
    std::string delim;
    while (pos_ < src_.size() && src_[pos_] != '(' && src_[pos_] != '\n' && delim.size() < 16) {
      delim += src_[pos_];
      advance();
    }
    if (pos_ < src_.size() && src_[pos_] == '(') {
      const std::string close = ")" + delim + "\"";
      const std::size_t found = src_.find(close, pos_);
      if (found != std::string_view::npos) {
        while (pos_ < found + close.size()) advance();
        emit(TokenKind::StringLit, m);
        return;
      }
    }
    if (!opts_.tolerant) {
      throw Error(ErrorCode::UnterminatedString, "raw string literal never closed", m.line, m.col);
    }
    while (pos_ < src_.size()) advance();
    emit(TokenKind::StringLit, m);
  }

  void lex_number() {
    const Mark m = mark();
    while (pos_ < src_.size()) {
      const unsigned char c = static_cast<unsigned char>(src_[pos_]);
      if (std::isalnum(c) || c == '_' || c == '.') {
        const char prev = src_[pos_];
        advance();
        if ((prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P') &&
            (peek(0) == '+' || peek(0) == '-')) {
          advance();
        }
        continue;
      }
      // C++14 digit separator.
      if (c == '\'' && std::isalnum(static_cast<unsigned char>(peek(1)))) {
        advance();
        continue;
      }
      break;
    }
    emit(TokenKind::NumberLit, m);
  }

  void lex_word() {
    const Mark m = mark();
    while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) advance();
    const std::string_view word = src_.substr(m.pos, pos_ - m.pos);
    const char next = peek(0);
    if (next == '"' || next == '\'') {
      const bool raw = word == "R" || word == "LR" || word == "uR" || word == "UR" || word == "u8R";
      const bool prefix = word == "L" || word == "u" || word == "U" || word == "u8";
      if (raw && next == '"') {
        lex_raw_string(m.pos);
        return;
      }
      if (prefix) {
        lex_quoted(m.pos, next, next == '"' ? TokenKind::StringLit : TokenKind::CharLit);
        return;
      }
    }
    emit(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, m);
  }

  void lex_symbol() {
    const Mark m = mark();
    for (std::size_t len : {3u, 2u}) {
      if (pos_ + len > src_.size()) continue;
      const std::string_view cand = src_.substr(pos_, len);
      if (std::find(kMultiOps.begin(), kMultiOps.end(), cand) != kMultiOps.end()) {
        for (std::size_t i = 0; i < len; ++i) advance();
        emit(TokenKind::Operator, m);
        return;
      }
    }
    const char c = src_[pos_];
    advance();
    if (kPuncts.find(c) != std::string_view::npos) {
      emit(TokenKind::Punct, m);
    } else if (kSingleOps.find(c) != std::string_view::npos) {
      emit(TokenKind::Operator, m);
    } else {
      // Stray bytes (backslash, backtick, '@', control characters) survive as
      // one-byte punctuation so lexing stays total and lossless.
      emit(TokenKind::Punct, m);
    }
  }

  std::string_view src_;
  LexOptions opts_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
  bool at_line_start_ = true;
  std::vector<Token> out_;
};

}  // namespace

std::vector<Token> lex(std::string_view source, LexOptions options) {
  return Lexer(source, options).run();
}

std::string reassemble(std::string_view source, const std::vector<Token>& tokens) {
  std::string out;
  out.reserve(source.size());
  std::size_t pos = 0;
  for (const Token& t : tokens) {
    out.append(source.substr(pos, t.offset - pos));
    out.append(t.text);
    pos = t.offset + t.text.size();
  }
  out.append(source.substr(pos));
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

}  // namespace clnx
