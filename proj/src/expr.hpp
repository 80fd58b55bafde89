#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace knotmorse {

// Expression in the single free variable `t`. Nodes are stored in postfix
// order (children precede their parent, the root is last), so an Expr is a
// plain value: copyable, comparable, and cheap to evaluate without recursion.
class Expr {
 public:
  enum class Op : std::uint8_t { Const, Var, Neg, Sin, Cos, Add, Sub, Mul, Div, Pow };

  struct Node {
    Op op = Op::Const;
    double value = 0.0;  // Const only
    int exponent = 0;    // Pow only
    int lhs = -1;
    int rhs = -1;

    bool operator==(const Node&) const = default;
  };

  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double value);
  static Expr variable();

  double operator()(double t) const;

  // Structural equality: same tree shape, ops and literal values.
  bool operator==(const Expr& other) const { return nodes_ == other.nodes_; }

  const Node& root() const { return nodes_.back(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  bool is_constant() const { return root().op == Op::Const; }
  bool is_constant(double value) const { return is_constant() && root().value == value; }

  // Copy of the subtree rooted at node `index`.
  Expr subtree(int index) const;

  // Round-trippable infix text in the parser's grammar.
  std::string to_string() const;

  friend Expr operator-(const Expr& a);
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr pow(const Expr& a, int exponent);

 private:
  explicit Expr(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  static Expr unary(Op op, const Expr& a);
  static Expr binary(Op op, const Expr& a, const Expr& b);

  std::vector<Node> nodes_;
};

// Parses infix text. Precedence, high to low: `^` (integer literal exponent),
// unary minus, `*` `/`, `+` `-`. Functions `sin` and `cos` require
// parentheses; `pi` is a constant. Throws Error{Syntax | UnknownIdentifier}
// with the byte offset of the problem.
Expr parse_expr(std::string_view source);

// Exact symbolic derivative with respect to t, lightly simplified.
Expr differentiate(const Expr& e);

}  // namespace knotmorse
