#pragma once

#include <rouf/error.hpp>
#include <rouf/stl/formula.hpp>

#include <cctype>
#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rouf::stl {

namespace detail {

enum class Tok {
  kEnd, kNumber, kIdent, kNot, kAnd, kOr, kLParen, kRParen, kLBracket, kRBracket, kComma,
  kPlus, kMinus, kStar, kSlash, kLt, kLe, kGt, kGe, kG, kF, kU, kTrue, kFalse,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t{Tok::kEnd, {}, 0, line, col};
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() &&
                                                         std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      t.kind = Tok::kNumber;
      t.text = std::string(src.substr(i, j - i));
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) {
        throw ParseError("malformed number '" + t.text + "'", line, col);
      }
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.text = std::string(src.substr(i, j - i));
      if (t.text == "G") t.kind = Tok::kG;
      else if (t.text == "F") t.kind = Tok::kF;
      else if (t.text == "U") t.kind = Tok::kU;
      else if (t.text == "true") t.kind = Tok::kTrue;
      else if (t.text == "false") t.kind = Tok::kFalse;
      else t.kind = Tok::kIdent;
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    std::size_t len = 1;
    switch (c) {
      case '!': t.kind = Tok::kNot; break;
      case '&': t.kind = Tok::kAnd; break;
      case '|': t.kind = Tok::kOr; break;
      case '(': t.kind = Tok::kLParen; break;
      case ')': t.kind = Tok::kRParen; break;
      case '[': t.kind = Tok::kLBracket; break;
      case ']': t.kind = Tok::kRBracket; break;
      case ',': t.kind = Tok::kComma; break;
      case '+': t.kind = Tok::kPlus; break;
      case '-': t.kind = Tok::kMinus; break;
      case '*': t.kind = Tok::kStar; break;
      case '/': t.kind = Tok::kSlash; break;
      case '<':
        t.kind = (i + 1 < src.size() && src[i + 1] == '=') ? Tok::kLe : Tok::kLt;
        len = t.kind == Tok::kLe ? 2 : 1;
        break;
      case '>':
        t.kind = (i + 1 < src.size() && src[i + 1] == '=') ? Tok::kGe : Tok::kGt;
        len = t.kind == Tok::kGe ? 2 : 1;
        break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    t.text = std::string(src.substr(i, len));
    advance(len);
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::kEnd, "<end of input>", 0, line, col});
  return out;
}

// Recursive descent with backtracking between predicates and parenthesized formulas.
// The error reported is the one that got furthest into the input.
class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Formula parse_all() {
    try {
      Formula f = parse_or();
      if (peek().kind != Tok::kEnd) fail("unexpected '" + peek().text + "'");
      return f;
    } catch (const Failure&) {
      const Token& t = toks_[best_pos_];
      throw ParseError("syntax error: " + best_msg_, t.line, t.column);
    }
  }

 private:
  struct Failure {};

  const Token& peek() const { return toks_[pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) {
    if (pos_ >= best_pos_) {
      best_pos_ = pos_;
      best_msg_ = msg;
    }
    throw Failure{};
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what + ", found '" + peek().text + "'");
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (accept(Tok::kOr)) f = Formula::disj(f, parse_and());
    return f;
  }

  Formula parse_and() {
    Formula f = parse_until();
    while (accept(Tok::kAnd)) f = Formula::conj(f, parse_until());
    return f;
  }

  Formula parse_until() {
    Formula lhs = parse_unary();
    if (accept(Tok::kU)) {
      auto iv = parse_opt_interval();
      Formula rhs = parse_until();
      return Formula::until(lhs, rhs, iv);
    }
    return lhs;
  }

  Formula parse_unary() {
    if (accept(Tok::kNot)) return Formula::negate(parse_unary());
    if (peek().kind == Tok::kG || peek().kind == Tok::kF) {
      const bool globally = peek().kind == Tok::kG;
      ++pos_;
      auto iv = parse_opt_interval();
      expect(Tok::kLParen, "'(' after temporal operator");
      Formula body = parse_or();
      expect(Tok::kRParen, "')'");
      return globally ? Formula::globally(body, iv) : Formula::eventually(body, iv);
    }
    return parse_atom();
  }

  Formula parse_atom() {
    if (accept(Tok::kTrue)) return Formula::top();
    if (accept(Tok::kFalse)) return Formula::bottom();

    const std::size_t save = pos_;
    try {
      return parse_predicate();
    } catch (const Failure&) {
      pos_ = save;
    }
    if (accept(Tok::kLParen)) {
      Formula f = parse_or();
      expect(Tok::kRParen, "')'");
      return f;
    }
    if (peek().kind == Tok::kIdent) {
      // Bare boolean signal `s` means s >= 0.5.
      std::string name = peek().text;
      ++pos_;
      return Formula::pred(Expr::binary(Expr::Kind::kSub, Expr::signal(name), Expr::number(0.5)), false);
    }
    fail("expected a formula, found '" + peek().text + "'");
  }

  Formula parse_predicate() {
    Expr lhs = parse_sum();
    const Tok cmp = peek().kind;
    if (cmp != Tok::kLt && cmp != Tok::kLe && cmp != Tok::kGt && cmp != Tok::kGe) {
      fail("expected comparison operator, found '" + peek().text + "'");
    }
    ++pos_;
    Expr rhs = parse_sum();
    const bool strict = cmp == Tok::kLt || cmp == Tok::kGt;
    if (cmp == Tok::kGt || cmp == Tok::kGe) {
      // lhs - rhs >= 0
      if (rhs.is_zero_literal()) return Formula::pred(lhs, strict);
      return Formula::pred(Expr::binary(Expr::Kind::kSub, lhs, rhs), strict);
    }
    // rhs - lhs >= 0
    if (lhs.is_zero_literal()) return Formula::pred(rhs, strict);
    if (rhs.is_zero_literal()) return Formula::pred(Expr::neg(lhs), strict);
    return Formula::pred(Expr::binary(Expr::Kind::kSub, rhs, lhs), strict);
  }

  Expr parse_sum() {
    Expr e = parse_product();
    while (true) {
      if (accept(Tok::kPlus)) e = Expr::binary(Expr::Kind::kAdd, e, parse_product());
      else if (accept(Tok::kMinus)) e = Expr::binary(Expr::Kind::kSub, e, parse_product());
      else return e;
    }
  }

  Expr parse_product() {
    Expr e = parse_factor();
    while (true) {
      if (accept(Tok::kStar)) e = Expr::binary(Expr::Kind::kMul, e, parse_factor());
      else if (accept(Tok::kSlash)) e = Expr::binary(Expr::Kind::kDiv, e, parse_factor());
      else return e;
    }
  }

  Expr parse_factor() {
    if (accept(Tok::kMinus)) return Expr::neg(parse_factor());
    if (accept(Tok::kPlus)) return parse_factor();
    if (peek().kind == Tok::kNumber) return Expr::number(toks_[pos_++].number);
    if (peek().kind == Tok::kIdent) return Expr::signal(toks_[pos_++].text);
    if (accept(Tok::kLParen)) {
      Expr e = parse_sum();
      expect(Tok::kRParen, "')'");
      return e;
    }
    fail("expected an arithmetic term, found '" + peek().text + "'");
  }

  std::optional<Interval> parse_opt_interval() {
    if (peek().kind != Tok::kLBracket) return std::nullopt;
    const std::size_t at = pos_;
    ++pos_;
    const double lo = parse_signed_number();
    expect(Tok::kComma, "','");
    const double hi = parse_signed_number();
    expect(Tok::kRBracket, "']'");
    if (!(lo >= 0) || !(lo < hi)) {
      pos_ = at;
      fail("interval must satisfy 0 <= lo < hi");
    }
    return Interval{lo, hi};
  }

  double parse_signed_number() {
    const bool neg = accept(Tok::kMinus);
    if (peek().kind != Tok::kNumber) fail("expected a number, found '" + peek().text + "'");
    const double v = toks_[pos_++].number;
    return neg ? -v : v;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t best_pos_ = 0;
  std::string best_msg_ = "unexpected input";
};

}  // namespace detail

/// Parses the concrete STL syntax:
///   formula  := pred | "!" formula | formula "&" formula | formula "|" formula
///             | formula "U" interval? formula | ("G"|"F") interval? "(" formula ")"
///   interval := "[" num "," num "]"       pred := expr ("<"|"<="|">"|">=") expr
/// Precedence ! > U > & > |; U is right associative. `true`, `false` and a bare
/// signal name `s` (meaning s >= 0.5) are also atoms.
inline Formula parse(std::string_view text) {
  return detail::Parser(detail::tokenize(text)).parse_all();
}

}  // namespace rouf::stl
