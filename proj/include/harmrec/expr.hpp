#pragma once

// Scalar field expressions f(x, y) read from run configurations.
//
// Grammar (precedence climbing, loosest first):
//   expr   := expr ('+' | '-') expr
//           | expr ('*' | '/') expr
//           | '-' expr                 (binds tighter than * and /)
//           | expr '^' expr            (tightest, right associative)
//           | number | x | y | pi | e | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | exp | log | sqrt | abs

#include <memory>
#include <string>
#include <string_view>

#include "harmrec/common.hpp"

namespace harmrec {

class FieldExpr {
 public:
  struct Node;

  /// Throws ParseError on malformed input or unknown identifiers.
  static FieldExpr parse(std::string_view src);

  /// Throws EvalError when any sub-expression leaves the real domain or
  /// is non-finite.
  double eval(Point p) const;
  double operator()(Point p) const { return eval(p); }

  /// Fully parenthesized form; parsing it again gives an equivalent tree.
  std::string to_string() const;

  const std::string& source() const { return source_; }

 private:
  FieldExpr(std::shared_ptr<const Node> root, std::string source)
      : root_(std::move(root)), source_(std::move(source)) {}

  std::shared_ptr<const Node> root_;
  std::string source_;
};

inline FieldExpr parse_field(std::string_view src) { return FieldExpr::parse(src); }
inline double eval_field(const FieldExpr& expr, Point p) { return expr.eval(p); }

}  // namespace harmrec
