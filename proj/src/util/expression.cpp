#include "fvk/util/expression.hpp"

#include <cctype>
#include <cmath>
#include <set>
#include <stdexcept>

namespace fvk::util {

struct Expression::Node {
  enum class Kind { number, variable, unary_minus, add, sub, mul, div, pow, call } kind = Kind::number;
  double value = 0.0;
  std::string name;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, std::vector<NodePtr> args = {}, double value = 0.0, std::string name = {}) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->args = std::move(args);
  n->value = value;
  n->name = std::move(name);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Kind::add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make(Kind::sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Kind::mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make(Kind::div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::unary_minus, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Kind::pow, {base, unary()});
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return make(Kind::number, {}, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      if (accept('(')) {
        std::vector<NodePtr> args{expr()};
        while (accept(',')) args.push_back(expr());
        if (!accept(')')) fail("expected ')' after arguments of " + name);
        static const std::set<std::string> unary_fns{"sin", "cos", "tan", "exp", "log", "sqrt", "abs"};
        static const std::set<std::string> binary_fns{"pow", "min", "max"};
        if (unary_fns.count(name) != 0U) {
          if (args.size() != 1) fail(name + " takes one argument");
        } else if (binary_fns.count(name) != 0U) {
          if (args.size() != 2) fail(name + " takes two arguments");
        } else {
          fail("unknown function '" + name + "'");
        }
        return make(Kind::call, std::move(args), 0.0, std::move(name));
      }
      if (name == "pi") return make(Kind::number, {}, 3.14159265358979323846);
      return make(Kind::variable, {}, 0.0, std::move(name));
    }
    fail(std::string("unexpected '") + c + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval(const Expression::Node& n, double x, double y, const std::map<std::string, double>& vars) {
  switch (n.kind) {
    case Kind::number:
      return n.value;
    case Kind::variable: {
      if (n.name == "x") return x;
      if (n.name == "y") return y;
      auto it = vars.find(n.name);
      if (it == vars.end()) throw std::invalid_argument("expression: unknown name '" + n.name + "'");
      return it->second;
    }
    case Kind::unary_minus:
      return -eval(*n.args[0], x, y, vars);
    case Kind::add:
      return eval(*n.args[0], x, y, vars) + eval(*n.args[1], x, y, vars);
    case Kind::sub:
      return eval(*n.args[0], x, y, vars) - eval(*n.args[1], x, y, vars);
    case Kind::mul:
      return eval(*n.args[0], x, y, vars) * eval(*n.args[1], x, y, vars);
    case Kind::div:
      return eval(*n.args[0], x, y, vars) / eval(*n.args[1], x, y, vars);
    case Kind::pow:
      return std::pow(eval(*n.args[0], x, y, vars), eval(*n.args[1], x, y, vars));
    case Kind::call: {
      const double a = eval(*n.args[0], x, y, vars);
      if (n.name == "sin") return std::sin(a);
      if (n.name == "cos") return std::cos(a);
      if (n.name == "tan") return std::tan(a);
      if (n.name == "exp") return std::exp(a);
      if (n.name == "log") return std::log(a);
      if (n.name == "sqrt") return std::sqrt(a);
      if (n.name == "abs") return std::fabs(a);
      const double b = eval(*n.args[1], x, y, vars);
      if (n.name == "pow") return std::pow(a, b);
      if (n.name == "min") return std::min(a, b);
      return std::max(a, b);
    }
  }
  return 0.0;
}

void collect(const Expression::Node& n, std::set<std::string>& out) {
  if (n.kind == Kind::variable && n.name != "x" && n.name != "y") out.insert(n.name);
  for (const auto& a : n.args) collect(*a, out);
}

}  // namespace

Expression Expression::constant(double v) {
  Expression e;
  e.root_ = make(Kind::number, {}, v);
  e.text_ = std::to_string(v);
  return e;
}

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

double Expression::operator()(double x, double y, const std::map<std::string, double>& vars) const {
  if (!root_) return 0.0;
  return eval(*root_, x, y, vars);
}

std::vector<std::string> Expression::free_names() const {
  std::set<std::string> names;
  if (root_) collect(*root_, names);
  return {names.begin(), names.end()};
}

bool Expression::is_constant_zero() const { return !root_ || (root_->kind == Kind::number && root_->value == 0.0); }

}  // namespace fvk::util
