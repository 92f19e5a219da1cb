#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "qseries.hpp"
#include "weight_basis.hpp"

namespace lacunary {

struct ParseError : InputError {
  ParseError(const std::string& what, std::size_t column)
      : InputError(what + " at column " + std::to_string(column)), column(column) {}
  std::size_t column;
};

/// expr := term (("+"|"-"|"−") term)*; term := factor ("*" factor)*;
/// factor := atom ("^" uint)?; atom := delta | E4 | E6 | uint | "(" expr ")".
struct FormExpr {
  enum class Kind { Delta, E4, E6, Literal, Add, Sub, Mul, Pow };
  Kind kind = Kind::Literal;
  /// Literal value (reduced mod p) or exponent of Pow.
  std::uint64_t value = 0;
  std::vector<FormExpr> args;

  static FormExpr atom(Kind k, std::uint64_t v = 0) { return {k, v, {}}; }
  static FormExpr binary(Kind k, FormExpr a, FormExpr b) { return {k, 0, {std::move(a), std::move(b)}}; }
  static FormExpr power(FormExpr base, std::uint64_t e) { return {Kind::Pow, e, {std::move(base)}}; }

  friend bool operator==(const FormExpr&, const FormExpr&) = default;
};

namespace detail {

class ExprParser {
public:
  ExprParser(const std::string& text, std::uint32_t p) : p_(p)
  {
    // Columns count code points; "−" (U+2212) is folded to '-'.
    for (std::size_t i = 0; i < text.size();) {
      auto c = static_cast<unsigned char>(text[i]);
      if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x88 &&
          static_cast<unsigned char>(text[i + 2]) == 0x92) {
        chars_.push_back('-');
        i += 3;
      } else if (c >= 0x80) {
        std::size_t len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : c >= 0xC0 ? 2 : 1;
        chars_.push_back('\x01');
        i += len;
      } else {
        chars_.push_back(static_cast<char>(c));
        ++i;
      }
    }
  }

  FormExpr parse()
  {
    skip();
    if (pos_ == chars_.size())
      throw ParseError("empty expression", 1);
    FormExpr e = expr();
    skip();
    if (pos_ != chars_.size())
      throw ParseError("unexpected '" + std::string(1, shown(chars_[pos_])) + "'", pos_ + 1);
    return e;
  }

private:
  static char shown(char c) { return c == '\x01' ? '?' : c; }

  void skip()
  {
    while (pos_ < chars_.size() && (chars_[pos_] == ' ' || chars_[pos_] == '\t' || chars_[pos_] == '\n' || chars_[pos_] == '\r'))
      ++pos_;
  }

  bool eat(char c)
  {
    skip();
    if (pos_ < chars_.size() && chars_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  FormExpr expr()
  {
    FormExpr left = term();
    while (true) {
      if (eat('+'))
        left = FormExpr::binary(FormExpr::Kind::Add, std::move(left), term());
      else if (eat('-'))
        left = FormExpr::binary(FormExpr::Kind::Sub, std::move(left), term());
      else
        return left;
    }
  }

  FormExpr term()
  {
    FormExpr left = factor();
    while (eat('*'))
      left = FormExpr::binary(FormExpr::Kind::Mul, std::move(left), factor());
    return left;
  }

  FormExpr factor()
  {
    FormExpr base = atom();
    if (eat('^')) {
      skip();
      std::size_t col = pos_ + 1;
      if (pos_ >= chars_.size() || !std::isdigit(static_cast<unsigned char>(chars_[pos_])))
        throw ParseError("expected a non-negative integer exponent", col);
      std::uint64_t e = 0;
      while (pos_ < chars_.size() && std::isdigit(static_cast<unsigned char>(chars_[pos_]))) {
        e = e * 10 + static_cast<std::uint64_t>(chars_[pos_++] - '0');
        if (e > 1'000'000)
          throw ParseError("exponent too large", col);
      }
      return FormExpr::power(std::move(base), e);
    }
    return base;
  }

  FormExpr atom()
  {
    skip();
    std::size_t col = pos_ + 1;
    if (pos_ >= chars_.size())
      throw ParseError("unexpected end of expression", col);
    char c = chars_[pos_];
    if (c == '(') {
      ++pos_;
      FormExpr e = expr();
      if (!eat(')'))
        throw ParseError("expected ')'", pos_ + 1);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t v = 0;
      while (pos_ < chars_.size() && std::isdigit(static_cast<unsigned char>(chars_[pos_])))
        v = (v * 10 + static_cast<std::uint64_t>(chars_[pos_++] - '0')) % p_;
      return FormExpr::atom(FormExpr::Kind::Literal, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string id;
      while (pos_ < chars_.size() && std::isalnum(static_cast<unsigned char>(chars_[pos_])))
        id += chars_[pos_++];
      if (id == "delta" || id == "Delta")
        return FormExpr::atom(FormExpr::Kind::Delta);
      if (id == "E4")
        return FormExpr::atom(FormExpr::Kind::E4);
      if (id == "E6")
        return FormExpr::atom(FormExpr::Kind::E6);
      throw ParseError("unsupported atom", col);
    }
    throw ParseError("unexpected '" + std::string(1, shown(c)) + "'", col);
  }

  std::uint32_t p_;
  std::vector<char> chars_;
  std::size_t pos_ = 0;
};

} // namespace detail

inline FormExpr parse_form_expression(const std::string& text, std::uint32_t p)
{
  check_modulus(p);
  return detail::ExprParser(text, p).parse();
}

/// Canonical text; parse(to_string(e)) == e.
inline std::string to_string(const FormExpr& e)
{
  using K = FormExpr::Kind;
  auto wrap = [](const FormExpr& x, bool paren) { return paren ? "(" + to_string(x) + ")" : to_string(x); };
  auto additive = [](const FormExpr& x) { return x.kind == K::Add || x.kind == K::Sub; };
  switch (e.kind) {
  case K::Delta: return "delta";
  case K::E4: return "E4";
  case K::E6: return "E6";
  case K::Literal: return std::to_string(e.value);
  case K::Add:
  case K::Sub:
    return to_string(e.args[0]) + (e.kind == K::Add ? " + " : " - ") + wrap(e.args[1], additive(e.args[1]));
  case K::Mul:
    return wrap(e.args[0], additive(e.args[0])) + "*" + wrap(e.args[1], additive(e.args[1]) || e.args[1].kind == K::Mul);
  case K::Pow: {
    const FormExpr& b = e.args[0];
    bool atomic = b.kind == K::Delta || b.kind == K::E4 || b.kind == K::E6 || b.kind == K::Literal;
    return wrap(b, !atomic) + "^" + std::to_string(e.value);
  }
  }
  return "?";
}

namespace detail {

struct Evaluated {
  QSeries series;
  /// Empty for the zero literal, which adopts any weight.
  std::optional<int> weight;
};

inline Evaluated evaluate(const FormExpr& e, std::uint32_t p, std::size_t prec)
{
  using K = FormExpr::Kind;
  switch (e.kind) {
  case K::Delta: return {delta_power(p, 1, prec), 12};
  case K::E4: return {eisenstein(p, 4, prec), 4};
  case K::E6: return {eisenstein(p, 6, prec), 6};
  case K::Literal:
    if (e.value % p == 0)
      return {QSeries(p, prec), std::nullopt};
    return {QSeries::constant(p, prec, static_cast<long long>(e.value)), 0};
  case K::Pow: {
    if (e.value > 100'000)
      throw InputError("exponent too large");
    if (e.args[0].kind == K::Delta)
      return {delta_power(p, e.value, prec), 12 * static_cast<int>(e.value)};
    Evaluated b = evaluate(e.args[0], p, prec);
    if (e.value == 0)
      return {QSeries::constant(p, prec, 1), 0};
    return {pow(b.series, e.value), b.weight ? std::optional<int>(*b.weight * static_cast<int>(e.value)) : std::nullopt};
  }
  case K::Mul: {
    Evaluated a = evaluate(e.args[0], p, prec), b = evaluate(e.args[1], p, prec);
    if (!a.weight || !b.weight)
      return {QSeries(p, prec), std::nullopt};
    return {mul(a.series, b.series), *a.weight + *b.weight};
  }
  case K::Add:
  case K::Sub: {
    Evaluated a = evaluate(e.args[0], p, prec), b = evaluate(e.args[1], p, prec);
    QSeries s = e.kind == K::Add ? add(a.series, b.series) : sub(a.series, b.series);
    if (!a.weight)
      return {s, b.weight};
    if (!b.weight)
      return {s, a.weight};
    int period = static_cast<int>(p) - 1;
    if ((*a.weight - *b.weight) % period != 0)
      throw InputError("mixed weights " + std::to_string(*a.weight) + " and " + std::to_string(*b.weight) +
                       " are not congruent mod p-1");
    return {s, std::max(*a.weight, *b.weight)};
  }
  }
  throw InputError("bad expression");
}

} // namespace detail

/// Evaluates to prec coefficients; the weight lift is the largest monomial weight.
inline GradedForm evaluate(const FormExpr& e, std::uint32_t p, std::size_t prec)
{
  check_modulus(p);
  if (prec == 0)
    throw InputError("precision must be positive");
  auto r = detail::evaluate(e, p, prec);
  return {std::move(r.series), r.weight.value_or(0)};
}

inline GradedForm evaluate_form(const std::string& text, std::uint32_t p, std::size_t prec)
{
  return evaluate(parse_form_expression(text, p), p, prec);
}

} // namespace lacunary
