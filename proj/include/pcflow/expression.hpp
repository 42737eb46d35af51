#pragma once

// Small arithmetic expressions for problem data: + - * / ^, unary minus,
// sin cos exp log sqrt, the constant pi and the variables x y r theta.
// Parsed once into a tree, evaluated many times.

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "pcflow/error.hpp"

namespace pcflow {

class Expression {
 public:
  Expression() = default;

  static Expression parse(const std::string& text) {
    Parser p{text, 0};
    Expression e;
    e.text_ = text;
    e.root_ = p.sum();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    return e;
  }

  double operator()(double x, double y) const {
    if (!root_) throw ConfigError("empty expression");
    return root_->eval({x, y, std::hypot(x, y), std::atan2(y, x)});
  }

  const std::string& text() const { return text_; }

 private:
  struct Vars {
    double x, y, r, theta;
  };

  struct Node {
    char op = 0;    // '#' number, 'v' variable, 'f' function, 'n' negation, else binary operator
    double value = 0.0;
    int var = 0;    // 0 x, 1 y, 2 r, 3 theta
    std::string fn;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(const Vars& v) const {
      switch (op) {
        case '#': return value;
        case 'v': return var == 0 ? v.x : var == 1 ? v.y : var == 2 ? v.r : v.theta;
        case 'n': return -lhs->eval(v);
        case 'f': {
          const double a = lhs->eval(v);
          if (fn == "sin") return std::sin(a);
          if (fn == "cos") return std::cos(a);
          if (fn == "exp") return std::exp(a);
          if (fn == "log") return std::log(a);
          return std::sqrt(a);
        }
        case '+': return lhs->eval(v) + rhs->eval(v);
        case '-': return lhs->eval(v) - rhs->eval(v);
        case '*': return lhs->eval(v) * rhs->eval(v);
        case '/': return lhs->eval(v) / rhs->eval(v);
        default: return std::pow(lhs->eval(v), rhs->eval(v));
      }
    }
  };
  using NodePtr = std::shared_ptr<const Node>;

  static NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  // sum := product (('+'|'-') product)*
  // product := unary (('*'|'/') unary)*
  // unary := '-' unary | power
  // power := atom ('^' unary)?      right associative, binds tighter than unary minus on the left
  struct Parser {
    const std::string& s;
    size_t pos;

    [[noreturn]] void fail(const std::string& why) const {
      throw ConfigError("expression '" + s + "', column " + std::to_string(pos + 1) + ": " + why);
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    NodePtr sum() {
      NodePtr a = product();
      for (;;) {
        if (eat('+')) a = binary('+', a, product());
        else if (eat('-')) a = binary('-', a, product());
        else return a;
      }
    }
    NodePtr product() {
      NodePtr a = unary();
      for (;;) {
        if (eat('*')) a = binary('*', a, unary());
        else if (eat('/')) a = binary('/', a, unary());
        else return a;
      }
    }
    NodePtr unary() {
      if (eat('-')) {
        auto n = std::make_shared<Node>();
        n->op = 'n';
        n->lhs = unary();
        return n;
      }
      if (eat('+')) return unary();
      return power();
    }
    NodePtr power() {
      NodePtr a = atom();
      if (eat('^')) return binary('^', a, unary());
      return a;
    }
    NodePtr atom() {
      skip();
      if (pos >= s.size()) fail("unexpected end");
      if (eat('(')) {
        NodePtr a = sum();
        if (!eat(')')) fail("missing ')'");
        return a;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          fail("bad number");
        }
        pos += used;
        auto n = std::make_shared<Node>();
        n->op = '#';
        n->value = v;
        return n;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string name = s.substr(start, pos - start);
        auto n = std::make_shared<Node>();
        if (name == "pi") {
          n->op = '#';
          n->value = std::numbers::pi;
          return n;
        }
        static const char* vars[] = {"x", "y", "r", "theta"};
        for (int k = 0; k < 4; ++k) {
          if (name == vars[k]) {
            n->op = 'v';
            n->var = k;
            return n;
          }
        }
        if (name == "sin" || name == "cos" || name == "exp" || name == "log" || name == "sqrt") {
          if (!eat('(')) fail("'" + name + "' needs an argument in parentheses");
          n->op = 'f';
          n->fn = name;
          n->lhs = sum();
          if (!eat(')')) fail("missing ')'");
          return n;
        }
        pos = start;
        fail("unknown name '" + name + "'");
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
  };

  std::string text_;
  NodePtr root_;
};

}  // namespace pcflow
