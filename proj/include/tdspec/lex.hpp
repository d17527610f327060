#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "tdspec/errors.hpp"

namespace tdspec {

enum class Tok {
  End,
  Ident,
  Nat,
  LParen,     // (
  RParen,     // )
  LBrace,     // {
  RBrace,     // }
  LBrack,     // [
  RBrack,     // ]
  LLBrack,    // [[
  RRBrack,    // ]]
  Lt,         // <
  Gt,         // >
  Le,         // <=
  Ge,         // >=
  Eq,         // =
  Chop,       // ^
  Star,       // *
  Not,        // !
  And,        // &&
  Or,         // ||
  Implies,    // =>
  Iff,        // <=>
  Leadsto,    // ~>
  Comma,      // ,
  Semi,       // ;
  Colon,      // :
  Dot,        // .
  Slash,      // /
  At,         // @
  Hash,       // #
  Minus,      // -
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long value = 0;  // for Nat
  int line = 1;
  int col = 1;
  std::size_t offset = 0;  // byte offset of the token start
};

/// Whitespace-insensitive tokenizer with `//` line comments.
class Lexer {
 public:
  explicit Lexer(std::string text) : src_(std::move(text)) { advance(); }

  const Token& peek() const { return cur_; }
  Tok kind() const { return cur_.kind; }

  Token next() {
    Token t = cur_;
    advance();
    return t;
  }

  bool accept(Tok k) {
    if (cur_.kind == k) {
      advance();
      return true;
    }
    return false;
  }

  Token expect(Tok k, const std::string& what) {
    if (cur_.kind != k) fail("expected " + what);
    return next();
  }

  bool accept_keyword(const std::string& kw) {
    if (cur_.kind == Tok::Ident && cur_.text == kw) {
      advance();
      return true;
    }
    return false;
  }

  void expect_keyword(const std::string& kw) {
    if (!accept_keyword(kw)) fail("expected '" + kw + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + (cur_.kind == Tok::End
                                ? std::string(" (at end of input)")
                                : " near '" + cur_.text + "'"),
                     cur_.line, cur_.col);
  }

  /// Consume raw text up to (not including) the next ';' outside comments.
  /// Used for waveform payloads whose cells are not ordinary tokens.
  std::string raw_until_semi() {
    // Rewind to the start of the current token, then scan characters.
    std::size_t p = cur_start_;
    std::string out;
    int line = cur_.line, col = cur_.col;
    while (p < src_.size() && src_[p] != ';') {
      if (src_[p] == '/' && p + 1 < src_.size() && src_[p + 1] == '/') {
        while (p < src_.size() && src_[p] != '\n') ++p;
        continue;
      }
      if (src_[p] == '\n') { ++line; col = 1; } else { ++col; }
      out.push_back(src_[p]);
      ++p;
    }
    pos_ = p;
    line_ = line;
    col_ = col;
    advance();
    return out;
  }

  const std::string& source() const { return src_; }

 private:
  void advance() {
    skip_ws();
    cur_start_ = pos_;
    cur_ = Token{};
    cur_.line = line_;
    cur_.col = col_;
    cur_.offset = pos_;
    if (pos_ >= src_.size()) {
      cur_.kind = Tok::End;
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        id.push_back(src_[pos_]);
        bump();
      }
      cur_.kind = Tok::Ident;
      cur_.text = id;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long long v = 0;
      std::string text;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        v = v * 10 + (src_[pos_] - '0');
        if (v > 1000000000LL) throw ParseError("numeric constant too large", line_, col_);
        text.push_back(src_[pos_]);
        bump();
      }
      cur_.kind = Tok::Nat;
      cur_.value = v;
      cur_.text = text;
      return;
    }
    auto two = [&](char a, char b) {
      return c == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
    };
    if (two('<', '=') && pos_ + 2 < src_.size() && src_[pos_ + 2] == '>') {
      set(Tok::Iff, "<=>"); bump(); bump(); bump(); return;
    }
    if (two('<', '=')) { set(Tok::Le, "<="); bump(); bump(); return; }
    if (two('>', '=')) { set(Tok::Ge, ">="); bump(); bump(); return; }
    if (two('=', '>')) { set(Tok::Implies, "=>"); bump(); bump(); return; }
    if (two('~', '>')) { set(Tok::Leadsto, "~>"); bump(); bump(); return; }
    if (two('&', '&')) { set(Tok::And, "&&"); bump(); bump(); return; }
    if (two('|', '|')) { set(Tok::Or, "||"); bump(); bump(); return; }
    if (two('[', '[')) { set(Tok::LLBrack, "[["); bump(); bump(); return; }
    if (two(']', ']')) { set(Tok::RRBrack, "]]"); bump(); bump(); return; }
    switch (c) {
      case '(': set(Tok::LParen, "("); break;
      case ')': set(Tok::RParen, ")"); break;
      case '{': set(Tok::LBrace, "{"); break;
      case '}': set(Tok::RBrace, "}"); break;
      case '[': set(Tok::LBrack, "["); break;
      case ']': set(Tok::RBrack, "]"); break;
      case '<': set(Tok::Lt, "<"); break;
      case '>': set(Tok::Gt, ">"); break;
      case '=': set(Tok::Eq, "="); break;
      case '^': set(Tok::Chop, "^"); break;
      case '*': set(Tok::Star, "*"); break;
      case '!': set(Tok::Not, "!"); break;
      case ',': set(Tok::Comma, ","); break;
      case ';': set(Tok::Semi, ";"); break;
      case ':': set(Tok::Colon, ":"); break;
      case '.': set(Tok::Dot, "."); break;
      case '/': set(Tok::Slash, "/"); break;
      case '@': set(Tok::At, "@"); break;
      case '#': set(Tok::Hash, "#"); break;
      case '-': set(Tok::Minus, "-"); break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }
    bump();
  }

  void set(Tok k, const char* text) {
    cur_.kind = k;
    cur_.text = text;
  }

  void bump() {
    if (src_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
    ++pos_;
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
      if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  std::string src_;
  std::size_t pos_ = 0;
  std::size_t cur_start_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
};

}  // namespace tdspec
