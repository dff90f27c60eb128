#include "harmrec/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

namespace harmrec {

enum class NodeKind { number, var_x, var_y, constant_pi, constant_e, negate, binary, call };
enum class Func { sin, cos, exp, log, sqrt, abs };

struct FieldExpr::Node {
  NodeKind kind = NodeKind::number;
  double value = 0.0;
  char op = 0;
  Func func = Func::sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const FieldExpr::Node>;

constexpr std::array<std::pair<std::string_view, Func>, 6> kFunctions{{
    {"sin", Func::sin},
    {"cos", Func::cos},
    {"exp", Func::exp},
    {"log", Func::log},
    {"sqrt", Func::sqrt},
    {"abs", Func::abs},
}};

constexpr std::string_view kAllowedNames = "x, y, pi, e, sin, cos, exp, log, sqrt, abs";

std::string_view func_name(Func f) {
  for (const auto& [name, func] : kFunctions) {
    if (func == f) return name;
  }
  return "?";
}

NodePtr make_node(FieldExpr::Node n) { return std::make_shared<const FieldExpr::Node>(std::move(n)); }

struct Token {
  enum class Kind { number, ident, op, lparen, rparen, end } kind = Kind::end;
  std::size_t offset = 0;
  std::string_view text;
  double number = 0.0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  NodePtr parse_all() {
    NodePtr root = parse_expr(0);
    if (tok_.kind != Token::Kind::end) fail("operator or end of input");
    return root;
  }

 private:
  // Binding powers: + - (10), * / (20), prefix minus (25), ^ (30, right assoc).
  static int infix_power(char op) {
    switch (op) {
      case '+':
      case '-':
        return 10;
      case '*':
      case '/':
        return 20;
      case '^':
        return 30;
      default:
        return -1;
    }
  }
  static constexpr int kPrefixMinusPower = 25;

  NodePtr parse_expr(int min_power) {
    NodePtr lhs = parse_prefix();
    while (tok_.kind == Token::Kind::op) {
      const char op = tok_.text[0];
      const int power = infix_power(op);
      if (power <= min_power) break;
      advance();
      const int rhs_power = op == '^' ? power - 1 : power;
      NodePtr rhs = parse_expr(rhs_power);
      lhs = make_node({NodeKind::binary, 0.0, op, Func::sin, lhs, rhs});
    }
    return lhs;
  }

  NodePtr parse_prefix() {
    switch (tok_.kind) {
      case Token::Kind::number: {
        const double v = tok_.number;
        advance();
        return make_node({NodeKind::number, v, 0, Func::sin, nullptr, nullptr});
      }
      case Token::Kind::op:
        if (tok_.text[0] == '-') {
          advance();
          NodePtr operand = parse_expr(kPrefixMinusPower);
          return make_node({NodeKind::negate, 0.0, '-', Func::sin, operand, nullptr});
        }
        break;
      case Token::Kind::lparen: {
        advance();
        NodePtr inner = parse_expr(0);
        expect_rparen();
        return inner;
      }
      case Token::Kind::ident:
        return parse_identifier();
      default:
        break;
    }
    fail("number, identifier, '-' or '('");
  }

  NodePtr parse_identifier() {
    const Token id = tok_;
    advance();
    if (id.text == "x") return make_node({NodeKind::var_x, 0.0, 0, Func::sin, nullptr, nullptr});
    if (id.text == "y") return make_node({NodeKind::var_y, 0.0, 0, Func::sin, nullptr, nullptr});
    if (id.text == "pi") return make_node({NodeKind::constant_pi, 0.0, 0, Func::sin, nullptr, nullptr});
    if (id.text == "e") return make_node({NodeKind::constant_e, 0.0, 0, Func::sin, nullptr, nullptr});
    for (const auto& [name, func] : kFunctions) {
      if (id.text != name) continue;
      if (tok_.kind != Token::Kind::lparen) fail("'(' after function name");
      advance();
      NodePtr arg = parse_expr(0);
      expect_rparen();
      return make_node({NodeKind::call, 0.0, 0, func, arg, nullptr});
    }
    throw ParseError("unknown identifier '" + std::string(id.text) + "' at byte " +
                         std::to_string(id.offset) + "; allowed names: " + std::string(kAllowedNames),
                     id.offset);
  }

  void expect_rparen() {
    if (tok_.kind != Token::Kind::rparen) fail("')'");
    advance();
  }

  [[noreturn]] void fail(std::string_view expected) const {
    std::string found = tok_.kind == Token::Kind::end ? "end of input" : "'" + std::string(tok_.text) + "'";
    throw ParseError("syntax error at byte " + std::to_string(tok_.offset) + ": expected " +
                         std::string(expected) + ", found " + found,
                     tok_.offset);
  }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::end;
      return;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* first = src_.data() + pos_;
      const char* last = src_.data() + src_.size();
      auto [ptr, ec] = std::from_chars(first, last, tok_.number);
      if (ec != std::errc{}) {
        throw ParseError("syntax error at byte " + std::to_string(pos_) + ": malformed number", pos_);
      }
      tok_.kind = Token::Kind::number;
      tok_.text = src_.substr(pos_, static_cast<std::size_t>(ptr - first));
      pos_ += tok_.text.size();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
        ++end;
      }
      tok_.kind = Token::Kind::ident;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    tok_.text = src_.substr(pos_, 1);
    switch (c) {
      case '+':
      case '-':
      case '*':
      case '/':
      case '^':
        tok_.kind = Token::Kind::op;
        break;
      case '(':
        tok_.kind = Token::Kind::lparen;
        break;
      case ')':
        tok_.kind = Token::Kind::rparen;
        break;
      default:
        throw ParseError("syntax error at byte " + std::to_string(pos_) + ": unexpected character '" +
                             std::string(1, c) + "'",
                         pos_);
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

std::string print(const FieldExpr::Node& n) {
  switch (n.kind) {
    case NodeKind::number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      return buf;
    }
    case NodeKind::var_x:
      return "x";
    case NodeKind::var_y:
      return "y";
    case NodeKind::constant_pi:
      return "pi";
    case NodeKind::constant_e:
      return "e";
    case NodeKind::negate:
      return "(-" + print(*n.lhs) + ")";
    case NodeKind::binary:
      return "(" + print(*n.lhs) + " " + n.op + " " + print(*n.rhs) + ")";
    case NodeKind::call:
      return std::string(func_name(n.func)) + "(" + print(*n.lhs) + ")";
  }
  return {};
}

[[noreturn]] void domain_error(const FieldExpr::Node& n, const std::string& why) {
  std::string sub = print(n);
  throw EvalError("domain error in '" + sub + "': " + why, sub);
}

double evaluate(const FieldExpr::Node& n, Point p) {
  double v = 0.0;
  switch (n.kind) {
    case NodeKind::number:
      return n.value;
    case NodeKind::var_x:
      return p.x;
    case NodeKind::var_y:
      return p.y;
    case NodeKind::constant_pi:
      return std::numbers::pi;
    case NodeKind::constant_e:
      return std::numbers::e;
    case NodeKind::negate:
      return -evaluate(*n.lhs, p);
    case NodeKind::binary: {
      const double a = evaluate(*n.lhs, p);
      const double b = evaluate(*n.rhs, p);
      switch (n.op) {
        case '+':
          v = a + b;
          break;
        case '-':
          v = a - b;
          break;
        case '*':
          v = a * b;
          break;
        case '/':
          if (b == 0.0) domain_error(n, "division by zero");
          v = a / b;
          break;
        case '^':
          if (a < 0.0 && b != std::trunc(b)) domain_error(n, "negative base with non-integer exponent");
          v = std::pow(a, b);
          break;
      }
      break;
    }
    case NodeKind::call: {
      const double a = evaluate(*n.lhs, p);
      switch (n.func) {
        case Func::sin:
          v = std::sin(a);
          break;
        case Func::cos:
          v = std::cos(a);
          break;
        case Func::exp:
          v = std::exp(a);
          break;
        case Func::log:
          if (a <= 0.0) domain_error(n, "logarithm of non-positive argument");
          v = std::log(a);
          break;
        case Func::sqrt:
          if (a < 0.0) domain_error(n, "square root of negative argument");
          v = std::sqrt(a);
          break;
        case Func::abs:
          v = std::abs(a);
          break;
      }
      break;
    }
  }
  if (!std::isfinite(v)) domain_error(n, "non-finite result");
  return v;
}

}  // namespace

FieldExpr FieldExpr::parse(std::string_view src) {
  if (src.empty()) throw ParseError("syntax error at byte 0: empty expression", 0);
  Parser parser(src);
  return FieldExpr(parser.parse_all(), std::string(src));
}

double FieldExpr::eval(Point p) const { return evaluate(*root_, p); }

std::string FieldExpr::to_string() const { return print(*root_); }

}  // namespace harmrec
