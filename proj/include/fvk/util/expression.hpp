#pragma once

// Tiny arithmetic expression language for loads and prescribed values in
// case files, e.g. "sin(pi*y/20)*h" or "-1.5*ncr".
//
// Grammar:  expr := term (('+'|'-') term)*
//           term := unary (('*'|'/') unary)*
//           unary := ('-'|'+') unary | power
//           power := atom ('^' unary)?
//           atom := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
// Functions: sin cos tan exp log sqrt abs pow min max.

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace fvk::util {

class Expression {
 public:
  Expression() = default;  // the constant 0
  static Expression constant(double v);

  /// Parses `text`. Names other than x and y must be resolvable at
  /// evaluation time through the variable map. Throws std::invalid_argument
  /// with the offending position on syntax errors.
  static Expression parse(const std::string& text);

  /// Variables x and y plus any named values.
  double operator()(double x, double y, const std::map<std::string, double>& vars = {}) const;

  /// Names referenced other than x and y.
  [[nodiscard]] std::vector<std::string> free_names() const;

  [[nodiscard]] bool is_constant_zero() const;
  [[nodiscard]] const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_ = "0";
};

}  // namespace fvk::util
