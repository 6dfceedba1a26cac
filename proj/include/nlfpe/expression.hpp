#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace nlfpe {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Real function of x from a small grammar:
///   + - * / ^ (right associative), unary minus, parentheses, numbers,
///   x, pi, e, sin, cos, arctan (alias atan), exp, abs.
/// Immutable after parsing; copies share the tree.
class Expression {
 public:
  static Expression parse(const std::string& text);
  double operator()(double x) const;
  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

/// Parses and evaluates in one go.
double expression_eval(const std::string& text, double x);

}  // namespace nlfpe
