#include "fractrack/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "fractrack/errors.hpp"

namespace fractrack {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, Expression& out) : text_(text), out_(out) {}

  int parse() {
    const int root = expr();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(what, line, column);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' before end of expression");
      fail(std::string("expected '") + c + "'");
    }
  }

  int node(Op op, int lhs = -1, int rhs = -1, double value = 0.0) {
    out_.nodes_.push_back({op, value, lhs, rhs});
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int expr() {
    int lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = node(Op::add, lhs, term());
      else if (accept('-'))
        lhs = node(Op::sub, lhs, term());
      else
        return lhs;
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = node(Op::mul, lhs, unary());
      else if (accept('/'))
        lhs = node(Op::div, lhs, unary());
      else
        return lhs;
    }
  }

  int unary() {
    if (accept('-')) return node(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = primary();
    if (accept('^')) return node(Op::pow, base, unary());
    return base;
  }

  int primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name == "x") return node(Op::var_x);
      if (name == "t") {
        out_.uses_t_ = true;
        return node(Op::var_t);
      }
      Op f;
      if (name == "exp")
        f = Op::exp;
      else if (name == "cos")
        f = Op::cos;
      else if (name == "sin")
        f = Op::sin;
      else {
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
      }
      expect('(');
      const int arg = expr();
      expect(')');
      return node(f, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  int number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return node(Op::constant, -1, -1, v);
  }

  std::string_view text_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.source_ = std::string(text);
  ExpressionParser p(text, e);
  e.root_ = p.parse();
  return e;
}

double Expression::operator()(double x, double t) const {
  if (root_ < 0) throw DomainError("evaluating an empty expression");
  return eval(root_, x, t);
}

double Expression::eval(int i, double x, double t) const {
  const Node& n = nodes_[static_cast<std::size_t>(i)];
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::var_x: return x;
    case Op::var_t: return t;
    case Op::neg: return -eval(n.lhs, x, t);
    case Op::add: return eval(n.lhs, x, t) + eval(n.rhs, x, t);
    case Op::sub: return eval(n.lhs, x, t) - eval(n.rhs, x, t);
    case Op::mul: return eval(n.lhs, x, t) * eval(n.rhs, x, t);
    case Op::div: return eval(n.lhs, x, t) / eval(n.rhs, x, t);
    case Op::pow: {
      const double b = eval(n.lhs, x, t);
      const double p = eval(n.rhs, x, t);
      // Small integer powers by multiplication keep negative bases well defined.
      if (p == std::round(p) && std::abs(p) <= 64.0) {
        double r = 1.0;
        for (int k = 0; k < static_cast<int>(std::abs(p)); ++k) r *= b;
        return p < 0 ? 1.0 / r : r;
      }
      return std::pow(b, p);
    }
    case Op::exp: return std::exp(eval(n.lhs, x, t));
    case Op::cos: return std::cos(eval(n.lhs, x, t));
    case Op::sin: return std::sin(eval(n.lhs, x, t));
  }
  return 0.0;
}

}  // namespace fractrack
