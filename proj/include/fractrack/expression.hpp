#pragma once

// Closed-form scalar expressions in x and t, as used in scenario files.
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right associative; -x^2 = -(x^2)
//   primary := number | 'x' | 't' | func '(' expr ')' | '(' expr ')'
//   func    := 'exp' | 'cos' | 'sin'
//
// Numbers use the usual decimal/exponent syntax (1, 0.5, 2e-3). Whitespace
// and newlines are ignored between tokens.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fractrack {

class Expression {
 public:
  // Throws ParseError with the 1-based line and column of the offending token.
  static Expression parse(std::string_view text);

  double operator()(double x, double t = 0.0) const;

  const std::string& source() const { return source_; }
  bool uses_t() const { return uses_t_; }

 private:
  enum class Op { constant, var_x, var_t, neg, add, sub, mul, div, pow, exp, cos, sin };
  struct Node {
    Op op;
    double value = 0.0;
    int lhs = -1;
    int rhs = -1;
  };
  friend class ExpressionParser;

  double eval(int node, double x, double t) const;

  std::string source_;
  std::vector<Node> nodes_;
  int root_ = -1;
  bool uses_t_ = false;
};

}  // namespace fractrack
