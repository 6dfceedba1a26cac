#include "nlfpe/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace nlfpe {

struct Expression::Node {
  enum class Kind { constant, variable, add, sub, mul, div, pow, neg, sin, cos, atan, exp, abs };
  Kind kind = Kind::constant;
  double value = 0.0;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;

  double eval(double x) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::variable: return x;
      case Kind::add: return a->eval(x) + b->eval(x);
      case Kind::sub: return a->eval(x) - b->eval(x);
      case Kind::mul: return a->eval(x) * b->eval(x);
      case Kind::div: return a->eval(x) / b->eval(x);
      case Kind::pow: return std::pow(a->eval(x), b->eval(x));
      case Kind::neg: return -a->eval(x);
      case Kind::sin: return std::sin(a->eval(x));
      case Kind::cos: return std::cos(a->eval(x));
      case Kind::atan: return std::atan(a->eval(x));
      case Kind::exp: return std::exp(a->eval(x));
      case Kind::abs: return std::abs(a->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  n->value = v;
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    skip();
    if (pos_ == s_.size()) throw ParseError("empty expression", pos_);
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return n;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (eat('+')) {
        n = make(Kind::add, n, term());
      } else if (eat('-')) {
        n = make(Kind::sub, n, term());
      } else {
        return n;
      }
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) {
        n = make(Kind::mul, n, unary());
      } else if (eat('/')) {
        n = make(Kind::div, n, unary());
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Kind::neg, unary());
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (eat('^')) return make(Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(end - begin);
    return make(Kind::constant, nullptr, nullptr, v);
  }

  NodePtr word() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string w = s_.substr(start, pos_ - start);
    if (w == "x") return make(Kind::variable);
    if (w == "pi") return make(Kind::constant, nullptr, nullptr, std::numbers::pi);
    if (w == "e") return make(Kind::constant, nullptr, nullptr, std::numbers::e);
    Kind k;
    if (w == "sin") {
      k = Kind::sin;
    } else if (w == "cos") {
      k = Kind::cos;
    } else if (w == "arctan" || w == "atan") {
      k = Kind::atan;
    } else if (w == "exp") {
      k = Kind::exp;
    } else if (w == "abs") {
      k = Kind::abs;
    } else {
      throw ParseError("unknown identifier '" + w + "'", start);
    }
    if (!eat('(')) throw ParseError("expected '(' after " + w, pos_);
    NodePtr arg = expr();
    if (!eat(')')) throw ParseError("expected ')'", pos_);
    return make(k, arg);
  }
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.source_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

double Expression::operator()(double x) const { return root_->eval(x); }

double expression_eval(const std::string& text, double x) { return Expression::parse(text)(x); }

}  // namespace nlfpe
