#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

#include "isslyap/errors.hpp"

namespace isslyap {

/// Sequence rule such as "(n*pi)^2" or "sqrt(2)*n*pi*(-1)^(n+1)".
///
/// Grammar: integer variable n; constants pi, e; binary + - * / and
/// right-associative ^; unary minus; functions sqrt, sin, cos; parentheses.
class RuleExpression {
 public:
  explicit RuleExpression(std::string_view source) : source_(source) {
    Parser p{source_, 0};
    root_ = p.parse_expression();
    p.skip_space();
    if (p.pos != source_.size()) throw ParseError("unexpected character '" + std::string(1, source_[p.pos]) + "'", p.pos);
  }

  double operator()(long long n) const { return root_->eval(static_cast<double>(n)); }
  const std::string& source() const noexcept { return source_; }

 private:
  struct Node {
    enum class Kind { number, variable, add, sub, mul, div, pow, neg, sqrt, sin, cos } kind;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double n) const {
      switch (kind) {
        case Kind::number: return value;
        case Kind::variable: return n;
        case Kind::add: return lhs->eval(n) + rhs->eval(n);
        case Kind::sub: return lhs->eval(n) - rhs->eval(n);
        case Kind::mul: return lhs->eval(n) * rhs->eval(n);
        case Kind::div: return lhs->eval(n) / rhs->eval(n);
        case Kind::pow: return std::pow(lhs->eval(n), rhs->eval(n));
        case Kind::neg: return -lhs->eval(n);
        case Kind::sqrt: return std::sqrt(lhs->eval(n));
        case Kind::sin: return std::sin(lhs->eval(n));
        case Kind::cos: return std::cos(lhs->eval(n));
      }
      return 0.0;
    }
  };
  using NodePtr = std::shared_ptr<const Node>;

  static NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto node = std::make_shared<Node>();
    node->kind = k;
    node->lhs = std::move(a);
    node->rhs = std::move(b);
    node->value = v;
    return node;
  }

  struct Parser {
    std::string_view s;
    std::size_t pos;

    void skip_space() {
      while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool accept(char c) {
      skip_space();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos);
    }

    NodePtr parse_expression() {
      NodePtr lhs = parse_term();
      for (;;) {
        if (accept('+')) {
          lhs = make(Node::Kind::add, lhs, parse_term());
        } else if (accept('-')) {
          lhs = make(Node::Kind::sub, lhs, parse_term());
        } else {
          return lhs;
        }
      }
    }
    NodePtr parse_term() {
      NodePtr lhs = parse_unary();
      for (;;) {
        if (accept('*')) {
          lhs = make(Node::Kind::mul, lhs, parse_unary());
        } else if (accept('/')) {
          lhs = make(Node::Kind::div, lhs, parse_unary());
        } else {
          return lhs;
        }
      }
    }
    NodePtr parse_unary() {
      if (accept('-')) return make(Node::Kind::neg, parse_unary());
      if (accept('+')) return parse_unary();
      NodePtr base = parse_primary();
      if (accept('^')) return make(Node::Kind::pow, base, parse_unary());
      return base;
    }
    NodePtr parse_primary() {
      skip_space();
      if (pos >= s.size()) throw ParseError("unexpected end of rule", pos);
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        NodePtr inner = parse_expression();
        expect(')');
        return inner;
      }
      if ((c >= '0' && c <= '9') || c == '.') {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
        if (ec != std::errc()) throw ParseError("malformed number", pos);
        pos = static_cast<std::size_t>(ptr - s.data());
        return make(Node::Kind::number, nullptr, nullptr, v);
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
        const std::string_view id = s.substr(start, pos - start);
        if (id == "n") return make(Node::Kind::variable);
        if (id == "pi") return make(Node::Kind::number, nullptr, nullptr, std::numbers::pi);
        if (id == "e") return make(Node::Kind::number, nullptr, nullptr, std::numbers::e);
        Node::Kind fn;
        if (id == "sqrt") {
          fn = Node::Kind::sqrt;
        } else if (id == "sin") {
          fn = Node::Kind::sin;
        } else if (id == "cos") {
          fn = Node::Kind::cos;
        } else {
          throw ParseError("unknown identifier '" + std::string(id) + "'", start);
        }
        expect('(');
        NodePtr arg = parse_expression();
        expect(')');
        return make(fn, arg);
      }
      throw ParseError("unexpected character '" + std::string(1, c) + "'", pos);
    }
  };

  std::string source_;
  NodePtr root_;
};

}  // namespace isslyap
