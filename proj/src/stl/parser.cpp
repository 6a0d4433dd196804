#include <cctype>
#include <charconv>
#include <optional>

#include "pmon/stl.hpp"

namespace pmon::stl {

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at position " + std::to_string(position)), position_(position) {}

namespace {

enum class Tok { Ident, Number, LParen, RParen, LBracket, RBracket, Comma, Bang, Amp, Pipe,
                 Plus, Minus, Star, Gt, Ge, Lt, Le, EqEq, End };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
      }
      out.push_back({Tok::Number, s.substr(start, i - start), start});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && is_ident(s[i])) ++i;
      out.push_back({Tok::Ident, s.substr(start, i - start), start});
      continue;
    }
    auto two = s.substr(i, 2);
    if (two == ">=") { out.push_back({Tok::Ge, two, start}); i += 2; continue; }
    if (two == "<=") { out.push_back({Tok::Le, two, start}); i += 2; continue; }
    if (two == "==") { out.push_back({Tok::EqEq, two, start}); i += 2; continue; }
    Tok k;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case ',': k = Tok::Comma; break;
      case '!': k = Tok::Bang; break;
      case '&': k = Tok::Amp; break;
      case '|': k = Tok::Pipe; break;
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '>': k = Tok::Gt; break;
      case '<': k = Tok::Lt; break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back({k, s.substr(i, 1), start});
    ++i;
  }
  out.push_back({Tok::End, {}, s.size()});
  return out;
}

bool is_zero_literal(const Expr& e) { return e->op == ExprNode::Op::Const && e->value == 0.0; }

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> names)
      : toks_(tokenize(text)), names_(names) {}

  Formula parse() {
    Formula f = formula();
    if (peek().kind != Tok::End) fail("unexpected trailing input");
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  bool peek_ident(std::string_view word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().pos); }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what);
  }

  Formula formula() {
    Formula lhs = disj();
    if (peek_ident("U")) {
      next();
      auto [a, b] = interval();
      Formula rhs = formula();
      return until(a, b, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula disj() {
    Formula f = conj();
    while (accept(Tok::Pipe)) f = disjunction(std::move(f), conj());
    return f;
  }

  Formula conj() {
    Formula f = unary_formula();
    while (accept(Tok::Amp)) f = conjunction(std::move(f), unary_formula());
    return f;
  }

  Formula unary_formula() {
    if (accept(Tok::Bang)) return negation(unary_formula());
    if (peek_ident("F") || peek_ident("G")) {
      bool is_f = next().text == "F";
      auto [a, b] = interval();
      Formula operand = unary_formula();
      return is_f ? eventually(a, b, std::move(operand)) : always(a, b, std::move(operand));
    }
    return primary();
  }

  std::pair<int, int> interval() {
    expect(Tok::LBracket, "'['");
    std::size_t at = peek().pos;
    int a = bound();
    expect(Tok::Comma, "','");
    int b = bound();
    expect(Tok::RBracket, "']'");
    if (a > b) throw ParseError("inverted interval [" + std::to_string(a) + "," + std::to_string(b) + "]", at);
    return {a, b};
  }

  int bound() {
    if (peek().kind == Tok::Minus) fail("negative temporal bound");
    if (peek().kind != Tok::Number) fail("expected integer bound");
    const Token& t = next();
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || ptr != t.text.data() + t.text.size()) {
      throw ParseError("temporal bound must be a non-negative integer", t.pos);
    }
    return v;
  }

  Formula primary() {
    if (peek_ident("true")) {
      next();
      return make_true();
    }
    if (peek_ident("loc")) {
      next();
      expect(Tok::EqEq, "'=='");
      return loc(mode_id());
    }
    if (peek().kind == Tok::LParen) {
      // Either a parenthesised formula or a comparison whose left side opens
      // with a parenthesised expression; try the comparison first.
      std::size_t save = pos_;
      try {
        return comparison();
      } catch (const ParseError& as_cmp) {
        pos_ = save;
        try {
          next();
          Formula f = formula();
          expect(Tok::RParen, "')'");
          return f;
        } catch (const ParseError& as_formula) {
          throw as_formula.position() >= as_cmp.position() ? as_formula : as_cmp;
        }
      }
    }
    return comparison();
  }

  ModeId mode_id() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      next();
      int v = 0;
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc{} || ptr != t.text.data() + t.text.size() || v < 0) {
        throw ParseError("mode id must be a non-negative integer", t.pos);
      }
      return v;
    }
    if (t.kind == Tok::Ident) {
      for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == t.text) {
          next();
          return static_cast<ModeId>(i);
        }
      }
      throw ParseError("unknown mode '" + std::string(t.text) + "'", t.pos);
    }
    fail("expected mode id");
  }

  Formula comparison() {
    Expr lhs = expr();
    Tok op = peek().kind;
    if (op != Tok::Gt && op != Tok::Ge && op != Tok::Lt && op != Tok::Le) fail("expected comparison");
    next();
    Expr rhs = expr();
    if (op == Tok::Gt || op == Tok::Ge) {
      return atom(is_zero_literal(rhs) ? lhs : lhs - rhs);
    }
    return atom(is_zero_literal(lhs) ? rhs : rhs - lhs);
  }

  Expr expr() {
    Expr e = term();
    while (true) {
      if (accept(Tok::Plus)) {
        e = e + term();
      } else if (accept(Tok::Minus)) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = factor();
    while (accept(Tok::Star)) e = e * factor();
    return e;
  }

  Expr factor() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        next();
        return constant(number(t, false));
      }
      case Tok::Minus: {
        next();
        if (peek().kind == Tok::Number) return constant(number(next(), true));
        return unary(ExprNode::Op::Neg, factor());
      }
      case Tok::LParen: {
        next();
        Expr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: return ident_factor();
      default: fail("expected expression");
    }
  }

  double number(const Token& t, bool negate) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || ptr != t.text.data() + t.text.size()) {
      throw ParseError("malformed number '" + std::string(t.text) + "'", t.pos);
    }
    return negate ? -v : v;
  }

  Expr ident_factor() {
    const Token& t = next();
    std::string_view w = t.text;
    using Op = ExprNode::Op;
    if (w == "min" || w == "max") {
      expect(Tok::LParen, "'('");
      Expr a = expr();
      expect(Tok::Comma, "','");
      Expr b = expr();
      expect(Tok::RParen, "')'");
      return binary(w == "min" ? Op::Min : Op::Max, std::move(a), std::move(b));
    }
    if (w == "abs" || w == "sqrt") {
      expect(Tok::LParen, "'('");
      Expr a = expr();
      expect(Tok::RParen, "')'");
      return unary(w == "abs" ? Op::Abs : Op::Sqrt, std::move(a));
    }
    if (w.size() >= 2 && w[0] == 'x') {
      int idx = 0;
      auto [ptr, ec] = std::from_chars(w.data() + 1, w.data() + w.size(), idx);
      if (ec == std::errc{} && ptr == w.data() + w.size()) return var(idx);
    }
    throw ParseError("unknown identifier '" + std::string(w) + "'", t.pos);
  }

  std::vector<Token> toks_;
  std::span<const std::string> names_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text, std::span<const std::string> mode_names) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ParseError("empty formula", 0);
  return Parser(text, mode_names).parse();
}

}  // namespace pmon::stl
