#include "tilelab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace tilelab {

namespace {

struct Parser {
  const std::string& s;
  const std::map<std::string, double>& consts;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error("expression error at offset " + std::to_string(pos) + " in \"" + s +
                             "\": " + what);
  }

  double parse_expr() {
    double v = parse_term();
    for (;;) {
      if (eat('+'))
        v += parse_term();
      else if (eat('-'))
        v -= parse_term();
      else
        return v;
    }
  }

  double parse_term() {
    double v = parse_power();
    for (;;) {
      if (eat('*'))
        v *= parse_power();
      else if (eat('/')) {
        const double d = parse_power();
        if (d == 0.0) fail("division by zero");
        v /= d;
      } else
        return v;
    }
  }

  double parse_power() {
    const double base = parse_unary();
    if (eat('^')) return std::pow(base, parse_power());
    return base;
  }

  double parse_unary() {
    if (eat('-')) return -parse_unary();
    if (eat('+')) return parse_unary();
    return parse_atom();
  }

  double parse_atom() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end");
    const char c = s[pos];
    if (c == '(') {
      ++pos;
      const double v = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(s.c_str() + pos, &end);
      if (end == s.c_str() + pos) fail("bad number");
      pos = static_cast<size_t>(end - s.c_str());
      return v;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
        ++pos;
      const std::string name = s.substr(start, pos - start);
      if (name == "sqrt") {
        if (!eat('(')) fail("sqrt needs '('");
        const double v = parse_expr();
        if (!eat(')')) fail("expected ')'");
        if (v < 0.0) fail("sqrt of negative value");
        return std::sqrt(v);
      }
      const auto it = consts.find(name);
      if (it == consts.end()) fail("unknown identifier '" + name + "'");
      return it->second;
    }
    fail("unexpected character");
  }
};

}  // namespace

double eval_expression(const std::string& text, const std::map<std::string, double>& constants) {
  Parser p{text, constants};
  const double v = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return v;
}

}  // namespace tilelab
