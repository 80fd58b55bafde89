#include "expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "error.hpp"

namespace knotmorse {

namespace {

using Op = Expr::Op;

int precedence(const Expr::Node& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return n.value < 0.0 ? 3 : 5;
    default: return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

void append_nodes(std::vector<Expr::Node>& out, const std::vector<Expr::Node>& in) {
  const int offset = static_cast<int>(out.size());
  for (Expr::Node n : in) {
    if (n.lhs >= 0) n.lhs += offset;
    if (n.rhs >= 0) n.rhs += offset;
    out.push_back(n);
  }
}

}  // namespace

Expr Expr::constant(double value) {
  Node n;
  n.op = Op::Const;
  n.value = value;
  return Expr(std::vector<Node>{n});
}

Expr Expr::variable() {
  Node n;
  n.op = Op::Var;
  return Expr(std::vector<Node>{n});
}

Expr Expr::unary(Op op, const Expr& a) {
  std::vector<Node> nodes = a.nodes_;
  Node n;
  n.op = op;
  n.lhs = static_cast<int>(nodes.size()) - 1;
  nodes.push_back(n);
  return Expr(std::move(nodes));
}

Expr Expr::binary(Op op, const Expr& a, const Expr& b) {
  std::vector<Node> nodes;
  nodes.reserve(a.size() + b.size() + 1);
  append_nodes(nodes, a.nodes_);
  const int lhs = static_cast<int>(nodes.size()) - 1;
  append_nodes(nodes, b.nodes_);
  Node n;
  n.op = op;
  n.lhs = lhs;
  n.rhs = static_cast<int>(nodes.size()) - 1;
  nodes.push_back(n);
  return Expr(std::move(nodes));
}

Expr Expr::subtree(int index) const {
  // Postfix storage means the subtree occupies a contiguous range ending at
  // `index`; find its first node by walking down the leftmost children.
  int first = index;
  for (;;) {
    const Node& n = nodes_[first];
    if (n.lhs < 0) break;
    first = n.lhs;
    // lhs subtree starts before rhs subtree, keep descending left.
  }
  std::vector<Node> nodes(nodes_.begin() + first, nodes_.begin() + index + 1);
  for (Node& n : nodes) {
    if (n.lhs >= 0) n.lhs -= first;
    if (n.rhs >= 0) n.rhs -= first;
  }
  return Expr(std::move(nodes));
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.root().value);
  if (a.root().op == Op::Neg) return a.subtree(a.root().lhs);
  return Expr::unary(Op::Neg, a);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.root().value + b.root().value);
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.root().value - b.root().value);
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expr::binary(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.root().value * b.root().value);
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return Expr::binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.root().value != 0.0)
    return Expr::constant(a.root().value / b.root().value);
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  if (b.is_constant(1.0)) return a;
  return Expr::binary(Op::Div, a, b);
}

Expr sin(const Expr& a) {
  if (a.is_constant()) return Expr::constant(std::sin(a.root().value));
  return Expr::unary(Op::Sin, a);
}

Expr cos(const Expr& a) {
  if (a.is_constant()) return Expr::constant(std::cos(a.root().value));
  return Expr::unary(Op::Cos, a);
}

Expr pow(const Expr& a, int exponent) {
  if (exponent == 0) return Expr::constant(1.0);
  if (exponent == 1) return a;
  if (a.is_constant()) return Expr::constant(std::pow(a.root().value, exponent));
  Expr e = Expr::unary(Op::Pow, a);
  e.nodes_.back().exponent = exponent;
  return e;
}

double Expr::operator()(double t) const {
  thread_local std::vector<double> values;
  values.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    double v = 0.0;
    switch (n.op) {
      case Op::Const: v = n.value; break;
      case Op::Var: v = t; break;
      case Op::Neg: v = -values[n.lhs]; break;
      case Op::Sin: v = std::sin(values[n.lhs]); break;
      case Op::Cos: v = std::cos(values[n.lhs]); break;
      case Op::Add: v = values[n.lhs] + values[n.rhs]; break;
      case Op::Sub: v = values[n.lhs] - values[n.rhs]; break;
      case Op::Mul: v = values[n.lhs] * values[n.rhs]; break;
      case Op::Div: v = values[n.lhs] / values[n.rhs]; break;
      case Op::Pow: {
        const double base = values[n.lhs];
        int k = n.exponent < 0 ? -n.exponent : n.exponent;
        double acc = 1.0, b = base;
        while (k) {
          if (k & 1) acc *= b;
          b *= b;
          k >>= 1;
        }
        v = n.exponent < 0 ? 1.0 / acc : acc;
        break;
      }
    }
    values[i] = v;
  }
  return values.back();
}

namespace {

void print_node(const std::vector<Expr::Node>& nodes, int index, std::ostream& os);

void print_child(const std::vector<Expr::Node>& nodes, int child, int min_prec, std::ostream& os) {
  if (precedence(nodes[child]) < min_prec) {
    os << '(';
    print_node(nodes, child, os);
    os << ')';
  } else {
    print_node(nodes, child, os);
  }
}

void print_node(const std::vector<Expr::Node>& nodes, int index, std::ostream& os) {
  const Expr::Node& n = nodes[index];
  switch (n.op) {
    case Op::Const:
      os << format_number(n.value);
      return;
    case Op::Var: os << 't'; return;
    case Op::Neg:
      os << '-';
      print_child(nodes, n.lhs, 3, os);
      return;
    case Op::Sin:
    case Op::Cos:
      os << (n.op == Op::Sin ? "sin(" : "cos(");
      print_node(nodes, n.lhs, os);
      os << ')';
      return;
    case Op::Add:
      print_child(nodes, n.lhs, 1, os);
      os << " + ";
      print_child(nodes, n.rhs, 2, os);
      return;
    case Op::Sub:
      print_child(nodes, n.lhs, 1, os);
      os << " - ";
      print_child(nodes, n.rhs, 2, os);
      return;
    case Op::Mul:
      print_child(nodes, n.lhs, 2, os);
      os << '*';
      print_child(nodes, n.rhs, 3, os);
      return;
    case Op::Div:
      print_child(nodes, n.lhs, 2, os);
      os << '/';
      print_child(nodes, n.rhs, 3, os);
      return;
    case Op::Pow:
      print_child(nodes, n.lhs, 5, os);
      os << '^' << n.exponent;
      return;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }

  [[noreturn]] void fail_at(std::size_t pos, const std::string& what) const {
    throw Error(ErrorCode::Syntax, "syntax error at offset " + std::to_string(pos) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but reached end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_product();
      } else if (accept('-')) {
        lhs = lhs - parse_product();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (accept('/')) {
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      bool paren = accept('(');
      skip_ws();
      bool negative = false;
      if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) {
        negative = src_[pos_] == '-';
        ++pos_;
      }
      const std::size_t digits = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (digits == pos_) fail_at(start, "exponent must be an integer literal");
      int value = 0;
      auto [p, ec] = std::from_chars(src_.data() + digits, src_.data() + pos_, value);
      if (ec != std::errc()) fail_at(digits, "exponent out of range");
      (void)p;
      if (paren) expect(')');
      if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
        fail("exponent must be an integer literal");
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '^') fail("chained exponents need parentheses");
      return pow(base, negative ? -value : value);
    }
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      const std::string_view name = src_.substr(start, pos_ - start);
      if (name == "t") return Expr::variable();
      if (name == "pi") return Expr::constant(std::numbers::pi);
      if (name == "sin" || name == "cos") {
        if (!accept('(')) fail("function '" + std::string(name) + "' requires parentheses");
        Expr arg = parse_sum();
        expect(')');
        return name == "sin" ? sin(arg) : cos(arg);
      }
      throw Error(ErrorCode::UnknownIdentifier, "unknown identifier '" + std::string(name) +
                                                    "' at offset " + std::to_string(start));
    }
    if (accept('(')) {
      Expr e = parse_sum();
      expect(')');
      return e;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    double value = 0.0;
    auto [p, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), value);
    if (ec != std::errc()) fail_at(start, "malformed number");
    pos_ = static_cast<std::size_t>(p - src_.data());
    return Expr::constant(value);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Expr::to_string() const {
  std::ostringstream os;
  print_node(nodes_, static_cast<int>(nodes_.size()) - 1, os);
  return os.str();
}

Expr parse_expr(std::string_view source) { return Parser(source).parse(); }

Expr differentiate(const Expr& e) {
  // Derivatives of every node, computed bottom-up; postfix order guarantees
  // children are done first.
  const auto& nodes = e.nodes();
  std::vector<Expr> d;
  std::vector<Expr> sub;
  d.reserve(nodes.size());
  sub.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Expr::Node& n = nodes[i];
    sub.push_back(e.subtree(static_cast<int>(i)));
    switch (n.op) {
      case Op::Const: d.push_back(Expr::constant(0.0)); break;
      case Op::Var: d.push_back(Expr::constant(1.0)); break;
      case Op::Neg: d.push_back(-d[n.lhs]); break;
      case Op::Sin: d.push_back(cos(sub[n.lhs]) * d[n.lhs]); break;
      case Op::Cos: d.push_back(-(sin(sub[n.lhs]) * d[n.lhs])); break;
      case Op::Add: d.push_back(d[n.lhs] + d[n.rhs]); break;
      case Op::Sub: d.push_back(d[n.lhs] - d[n.rhs]); break;
      case Op::Mul: d.push_back(d[n.lhs] * sub[n.rhs] + sub[n.lhs] * d[n.rhs]); break;
      case Op::Div:
        d.push_back((d[n.lhs] * sub[n.rhs] - sub[n.lhs] * d[n.rhs]) / pow(sub[n.rhs], 2));
        break;
      case Op::Pow:
        d.push_back(Expr::constant(n.exponent) * pow(sub[n.lhs], n.exponent - 1) * d[n.lhs]);
        break;
    }
  }
  return d.back();
}

}  // namespace knotmorse
