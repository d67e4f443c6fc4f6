#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rallyviz::expr {

// Guard expressions for tactic rules:
//
//   reception.known and reception.row == 0
//   technique in ["forehand_attack", "backhand_attack"] and speed / 50 > 12
//
// Literals: numbers, "strings", true, false, [lists]. Operators by
// precedence: or; and; not; comparisons (< <= > >= == !=) and `in`; + -;
// * /; unary minus. Identifiers may be dotted and resolve against a flat
// variable map.

struct Value;
using List = std::vector<Value>;

struct Value {
  std::variant<bool, double, std::string, List> v;

  Value() : v(false) {}
  Value(bool b) : v(b) {}
  Value(double d) : v(d) {}
  Value(int i) : v(static_cast<double>(i)) {}
  Value(const char* s) : v(std::string(s)) {}
  Value(std::string s) : v(std::move(s)) {}
  Value(List l) : v(std::move(l)) {}

  bool operator==(const Value&) const = default;
  std::string describe() const;
};

using Variables = std::map<std::string, Value, std::less<>>;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised while evaluating: unknown variable, type mismatch, division by zero.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Node;

class Expression {
 public:
  static Expression parse(std::string_view source);

  Value evaluate(const Variables& vars) const;
  bool test(const Variables& vars) const;  // evaluate, requiring a boolean
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace rallyviz::expr
