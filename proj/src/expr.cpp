#include "rallyviz/expr.h"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace rallyviz::expr {

std::string Value::describe() const {
  struct {
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(double d) const {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", d);
      return buf;
    }
    std::string operator()(const std::string& s) const { return "\"" + s + "\""; }
    std::string operator()(const List& l) const {
      std::string out = "[";
      for (size_t i = 0; i < l.size(); ++i) out += (i ? ", " : "") + l[i].describe();
      return out + "]";
    }
  } visitor;
  return std::visit(visitor, v);
}

enum class Op { Or, And, Not, Neg, Lt, Le, Gt, Ge, Eq, Ne, In, Add, Sub, Mul, Div };

struct Node {
  enum class Kind { Literal, Variable, ListLit, Unary, Binary } kind;
  Value literal;
  std::string name;
  Op op = Op::Add;
  std::vector<std::shared_ptr<const Node>> children;
};

namespace {

using NodePtr = std::shared_ptr<const Node>;

struct Token {
  enum class Type { Number, String, Ident, Symbol, End } type;
  std::string text;
  double number = 0;
  size_t pos = 0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      const std::string rest(s.substr(i));
      char* end = nullptr;
      const double d = std::strtod(rest.c_str(), &end);
      const size_t len = static_cast<size_t>(end - rest.c_str());
      out.push_back({Token::Type::Number, rest.substr(0, len), d, i});
      i += len;
      continue;
    }
    if (c == '"') {
      size_t j = i + 1;
      std::string text;
      while (j < s.size() && s[j] != '"') text += s[j++];
      if (j >= s.size()) throw ParseError("unterminated string at " + std::to_string(i));
      out.push_back({Token::Type::String, text, 0, i});
      i = j + 1;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.')) ++j;
      out.push_back({Token::Type::Ident, std::string(s.substr(i, j - i)), 0, i});
      i = j;
      continue;
    }
    static constexpr std::string_view kTwo[] = {"<=", ">=", "==", "!="};
    bool matched = false;
    for (auto sym : kTwo) {
      if (s.substr(i, 2) == sym) {
        out.push_back({Token::Type::Symbol, std::string(sym), 0, i});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("<>+-*/()[],").find(c) != std::string_view::npos) {
      out.push_back({Token::Type::Symbol, std::string(1, c), 0, i});
      ++i;
      continue;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "' at " + std::to_string(i));
  }
  out.push_back({Token::Type::End, "", 0, s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  NodePtr parse() {
    auto n = parse_or();
    if (peek().type != Token::Type::End) error("trailing input");
    return n;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool accept(std::string_view text) {
    const auto& t = peek();
    if ((t.type == Token::Type::Symbol || t.type == Token::Type::Ident) && t.text == text) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view text) {
    if (!accept(text)) error("expected '" + std::string(text) + "'");
  }
  [[noreturn]] void error(const std::string& what) const {
    throw ParseError(what + " at " + std::to_string(peek().pos));
  }

  static NodePtr binary(Op op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->children = {std::move(a), std::move(b)};
    return n;
  }
  static NodePtr unary(Op op, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Unary;
    n->op = op;
    n->children = {std::move(a)};
    return n;
  }

  NodePtr parse_or() {
    auto lhs = parse_and();
    while (accept("or")) lhs = binary(Op::Or, lhs, parse_and());
    return lhs;
  }
  NodePtr parse_and() {
    auto lhs = parse_not();
    while (accept("and")) lhs = binary(Op::And, lhs, parse_not());
    return lhs;
  }
  NodePtr parse_not() {
    if (accept("not")) return unary(Op::Not, parse_not());
    return parse_cmp();
  }
  NodePtr parse_cmp() {
    auto lhs = parse_add();
    static constexpr std::pair<std::string_view, Op> kOps[] = {
        {"<=", Op::Le}, {">=", Op::Ge}, {"==", Op::Eq}, {"!=", Op::Ne},
        {"<", Op::Lt},  {">", Op::Gt},  {"in", Op::In}};
    for (const auto& [text, op] : kOps)
      if (accept(text)) return binary(op, lhs, parse_add());
    return lhs;
  }
  NodePtr parse_add() {
    auto lhs = parse_mul();
    for (;;) {
      if (accept("+")) lhs = binary(Op::Add, lhs, parse_mul());
      else if (accept("-")) lhs = binary(Op::Sub, lhs, parse_mul());
      else return lhs;
    }
  }
  NodePtr parse_mul() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept("*")) lhs = binary(Op::Mul, lhs, parse_unary());
      else if (accept("/")) lhs = binary(Op::Div, lhs, parse_unary());
      else return lhs;
    }
  }
  NodePtr parse_unary() {
    if (accept("-")) return unary(Op::Neg, parse_unary());
    return parse_primary();
  }
  NodePtr parse_primary() {
    const Token t = peek();
    auto n = std::make_shared<Node>();
    switch (t.type) {
      case Token::Type::Number:
        ++pos_;
        n->kind = Node::Kind::Literal;
        n->literal = t.number;
        return n;
      case Token::Type::String:
        ++pos_;
        n->kind = Node::Kind::Literal;
        n->literal = t.text;
        return n;
      case Token::Type::Ident:
        if (t.text == "and" || t.text == "or" || t.text == "not" || t.text == "in")
          error("unexpected keyword '" + t.text + "'");
        ++pos_;
        if (t.text == "true" || t.text == "false") {
          n->kind = Node::Kind::Literal;
          n->literal = (t.text == "true");
        } else {
          n->kind = Node::Kind::Variable;
          n->name = t.text;
        }
        return n;
      case Token::Type::Symbol:
        if (accept("(")) {
          auto inner = parse_or();
          expect(")");
          return inner;
        }
        if (accept("[")) {
          n->kind = Node::Kind::ListLit;
          if (!accept("]")) {
            do n->children.push_back(parse_or());
            while (accept(","));
            expect("]");
          }
          return n;
        }
        error("unexpected '" + t.text + "'");
      case Token::Type::End:
        error("unexpected end of expression");
    }
    error("unreachable");
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

double as_number(const Value& v, const char* ctx) {
  if (const auto* d = std::get_if<double>(&v.v)) return *d;
  throw EvalError(std::string(ctx) + ": expected a number, got " + v.describe());
}

bool as_bool(const Value& v, const char* ctx) {
  if (const auto* b = std::get_if<bool>(&v.v)) return *b;
  throw EvalError(std::string(ctx) + ": expected a boolean, got " + v.describe());
}

Value eval(const Node& n, const Variables& vars) {
  switch (n.kind) {
    case Node::Kind::Literal: return n.literal;
    case Node::Kind::Variable: {
      auto it = vars.find(n.name);
      if (it == vars.end()) throw EvalError("unknown variable '" + n.name + "'");
      return it->second;
    }
    case Node::Kind::ListLit: {
      List items;
      for (const auto& c : n.children) items.push_back(eval(*c, vars));
      return items;
    }
    case Node::Kind::Unary: {
      const Value a = eval(*n.children[0], vars);
      if (n.op == Op::Not) return !as_bool(a, "not");
      return -as_number(a, "unary -");
    }
    case Node::Kind::Binary: break;
  }

  if (n.op == Op::And) {
    if (!as_bool(eval(*n.children[0], vars), "and")) return false;
    return as_bool(eval(*n.children[1], vars), "and");
  }
  if (n.op == Op::Or) {
    if (as_bool(eval(*n.children[0], vars), "or")) return true;
    return as_bool(eval(*n.children[1], vars), "or");
  }
  const Value a = eval(*n.children[0], vars);
  const Value b = eval(*n.children[1], vars);
  switch (n.op) {
    case Op::Eq: return a == b;
    case Op::Ne: return !(a == b);
    case Op::In: {
      const auto* list = std::get_if<List>(&b.v);
      if (list == nullptr) throw EvalError("in: right operand must be a list, got " + b.describe());
      for (const auto& item : *list)
        if (item == a) return true;
      return false;
    }
    case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: {
      const auto* sa = std::get_if<std::string>(&a.v);
      const auto* sb = std::get_if<std::string>(&b.v);
      int cmp = 0;
      if (sa && sb) {
        cmp = sa->compare(*sb);
      } else {
        const double x = as_number(a, "comparison");
        const double y = as_number(b, "comparison");
        cmp = x < y ? -1 : (x > y ? 1 : 0);
      }
      if (n.op == Op::Lt) return cmp < 0;
      if (n.op == Op::Le) return cmp <= 0;
      if (n.op == Op::Gt) return cmp > 0;
      return cmp >= 0;
    }
    case Op::Add: return as_number(a, "+") + as_number(b, "+");
    case Op::Sub: return as_number(a, "-") - as_number(b, "-");
    case Op::Mul: return as_number(a, "*") * as_number(b, "*");
    case Op::Div: {
      const double d = as_number(b, "/");
      if (d == 0.0) throw EvalError("division by zero");
      return as_number(a, "/") / d;
    }
    default: break;
  }
  throw EvalError("bad operator");
}

}  // namespace

Expression Expression::parse(std::string_view source) {
  Expression e;
  e.source_ = std::string(source);
  e.root_ = Parser(tokenize(source)).parse();
  return e;
}

Value Expression::evaluate(const Variables& vars) const { return eval(*root_, vars); }

bool Expression::test(const Variables& vars) const { return as_bool(evaluate(vars), "guard"); }

}  // namespace rallyviz::expr
