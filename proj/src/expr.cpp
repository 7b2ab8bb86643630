#include "hardylab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "hardylab/errors.hpp"

namespace hardylab::forms {

enum class Symbol { X1, X2, X3, R, Z, D };
enum class BinaryOp { Add, Sub, Mul, Div };
enum class Func { Min, Max, Abs, Pos, Neg };

struct CoefficientExpr::Node {
  struct Number {
    double value;
  };
  struct Variable {
    Symbol symbol;
  };
  struct Negate {
    std::shared_ptr<const Node> arg;
  };
  struct Binary {
    BinaryOp op;
    std::shared_ptr<const Node> lhs, rhs;
  };
  struct Power {
    std::shared_ptr<const Node> base;
    double exponent;
  };
  struct Call {
    Func func;
    std::vector<std::shared_ptr<const Node>> args;
  };
  std::variant<Number, Variable, Negate, Binary, Power, Call> v;
};

namespace {

using NodePtr = std::shared_ptr<const CoefficientExpr::Node>;
using Node = CoefficientExpr::Node;

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

template <class T> NodePtr make(T value) { return std::make_shared<const Node>(Node{std::move(value)}); }

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) error({"expression"}, "empty expression");
    NodePtr e = expr();
    skip_ws();
    if (pos_ < text_.size()) error({"operator", "end of input"}, "unexpected trailing input");
    return e;
  }

private:
  [[noreturn]] void error(std::vector<std::string> expected, const std::string& what) {
    std::string msg = "parse error at offset " + std::to_string(pos_) + ": " + what + " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? " | " : "") + expected[i];
    msg += ")";
    throw ParseError(pos_, std::move(expected), msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make(Node::Binary{BinaryOp::Add, lhs, term()});
      else if (accept('-'))
        lhs = make(Node::Binary{BinaryOp::Sub, lhs, term()});
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make(Node::Binary{BinaryOp::Mul, lhs, unary()});
      else if (accept('/'))
        lhs = make(Node::Binary{BinaryOp::Div, lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      NodePtr arg = unary();
      if (const auto* num = std::get_if<Node::Number>(&arg->v)) return make(Node::Number{-num->value});
      return make(Node::Negate{arg});
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr b = base();
    if (accept('^')) {
      skip_ws();
      double sign = 1.0;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        sign = text_[pos_] == '-' ? -1.0 : 1.0;
        ++pos_;
        skip_ws();
      }
      if (pos_ >= text_.size() || !(std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
        error({"number", "-", "+"}, "exponent must be a signed number");
      b = make(Node::Power{b, sign * number()});
    }
    return b;
  }

  double number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
      pos_ = start;
      error({"number"}, "malformed number");
    }
    return value;
  }

  NodePtr base() {
    skip_ws();
    if (pos_ >= text_.size()) error({"number", "identifier", "("}, "unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return make(Node::Number{number()});
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) error({")"}, "unbalanced parenthesis");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      std::string_view id = text_.substr(start, pos_ - start);
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        std::size_t call_pos = start;
        Func f;
        std::size_t arity;
        if (id == "min") { f = Func::Min; arity = 2; }
        else if (id == "max") { f = Func::Max; arity = 2; }
        else if (id == "abs") { f = Func::Abs; arity = 1; }
        else if (id == "pos") { f = Func::Pos; arity = 1; }
        else if (id == "neg") { f = Func::Neg; arity = 1; }
        else {
          pos_ = call_pos;
          error({"min", "max", "abs", "pos", "neg"}, "unknown function '" + std::string(id) + "'");
        }
        ++pos_;
        std::vector<NodePtr> args;
        args.push_back(expr());
        while (accept(',')) args.push_back(expr());
        if (!accept(')')) error({")", ","}, "unterminated argument list");
        if (args.size() != arity) {
          pos_ = call_pos;
          error({std::to_string(arity) + " argument(s)"}, "wrong number of arguments to '" + std::string(id) + "'");
        }
        return make(Node::Call{f, std::move(args)});
      }
      if (id == "x1" || id == "x") return make(Node::Variable{Symbol::X1});
      if (id == "x2" || id == "y") return make(Node::Variable{Symbol::X2});
      if (id == "x3") return make(Node::Variable{Symbol::X3});
      if (id == "r") return make(Node::Variable{Symbol::R});
      if (id == "z") return make(Node::Variable{Symbol::Z});
      if (id == "d") return make(Node::Variable{Symbol::D});
      if (id == "pi") return make(Node::Number{std::numbers::pi});
      pos_ = start;
      error({"x1", "x2", "x3", "r", "z", "d", "pi"}, "unknown identifier '" + std::string(id) + "'");
    }
    error({"number", "identifier", "("}, std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double evaluate(const Node& n, const EvalContext& ctx) {
  return std::visit(
      overloaded{
          [](const Node::Number& x) { return x.value; },
          [&](const Node::Variable& x) {
            switch (x.symbol) {
            case Symbol::X1: return ctx.x1;
            case Symbol::X2: return ctx.x2;
            case Symbol::X3: return ctx.x3;
            case Symbol::R: return ctx.r;
            case Symbol::Z: return ctx.z;
            case Symbol::D: return ctx.d;
            }
            return 0.0;
          },
          [&](const Node::Negate& x) { return -evaluate(*x.arg, ctx); },
          [&](const Node::Binary& x) {
            double a = evaluate(*x.lhs, ctx);
            double b = evaluate(*x.rhs, ctx);
            switch (x.op) {
            case BinaryOp::Add: return a + b;
            case BinaryOp::Sub: return a - b;
            case BinaryOp::Mul: return a * b;
            case BinaryOp::Div: return a / b;
            }
            return 0.0;
          },
          [&](const Node::Power& x) {
            double b = evaluate(*x.base, ctx);
            if (x.exponent == 1.0) return b;
            if (x.exponent == 2.0) return b * b;
            if (x.exponent == -2.0) return 1.0 / (b * b);
            return std::pow(b, x.exponent);
          },
          [&](const Node::Call& x) {
            double a = evaluate(*x.args[0], ctx);
            switch (x.func) {
            case Func::Min: return std::min(a, evaluate(*x.args[1], ctx));
            case Func::Max: return std::max(a, evaluate(*x.args[1], ctx));
            case Func::Abs: return std::abs(a);
            case Func::Pos: return std::max(a, 0.0);
            case Func::Neg: return std::max(-a, 0.0);
            }
            return 0.0;
          },
      },
      n.v);
}

std::string structure_of(const Node& n) {
  return std::visit(
      overloaded{
          [](const Node::Number& x) { return format_number(x.value); },
          [](const Node::Variable& x) {
            switch (x.symbol) {
            case Symbol::X1: return std::string("x1");
            case Symbol::X2: return std::string("x2");
            case Symbol::X3: return std::string("x3");
            case Symbol::R: return std::string("r");
            case Symbol::Z: return std::string("z");
            case Symbol::D: return std::string("d");
            }
            return std::string("?");
          },
          [](const Node::Negate& x) { return "(neg- " + structure_of(*x.arg) + ")"; },
          [](const Node::Binary& x) {
            const char* op = x.op == BinaryOp::Add ? "+" : x.op == BinaryOp::Sub ? "-" : x.op == BinaryOp::Mul ? "*" : "/";
            return std::string("(") + op + " " + structure_of(*x.lhs) + " " + structure_of(*x.rhs) + ")";
          },
          [](const Node::Power& x) { return "(^ " + structure_of(*x.base) + " " + format_number(x.exponent) + ")"; },
          [](const Node::Call& x) {
            static const char* names[] = {"min", "max", "abs", "pos", "neg"};
            std::string s = std::string("(") + names[static_cast<int>(x.func)];
            for (const auto& a : x.args) s += " " + structure_of(*a);
            return s + ")";
          },
      },
      n.v);
}

bool uses_symbol(const Node& n, Symbol s) {
  return std::visit(overloaded{
                        [](const Node::Number&) { return false; },
                        [&](const Node::Variable& x) { return x.symbol == s; },
                        [&](const Node::Negate& x) { return uses_symbol(*x.arg, s); },
                        [&](const Node::Binary& x) { return uses_symbol(*x.lhs, s) || uses_symbol(*x.rhs, s); },
                        [&](const Node::Power& x) { return uses_symbol(*x.base, s); },
                        [&](const Node::Call& x) {
                          return std::any_of(x.args.begin(), x.args.end(),
                                             [&](const NodePtr& a) { return uses_symbol(*a, s); });
                        },
                    },
                    n.v);
}

} // namespace

CoefficientExpr::CoefficientExpr() : CoefficientExpr(make(Node::Number{0.0}), "0") {}

CoefficientExpr::CoefficientExpr(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

CoefficientExpr CoefficientExpr::parse(std::string_view text) {
  Parser p(text);
  return CoefficientExpr(p.parse(), std::string(text));
}

CoefficientExpr CoefficientExpr::constant(double value) {
  return CoefficientExpr(make(Node::Number{value}), format_number(value));
}

CoefficientExpr CoefficientExpr::distance_power(double exponent) {
  return CoefficientExpr(make(Node::Power{make(Node::Variable{Symbol::D}), exponent}), "d^" + format_number(exponent));
}

double CoefficientExpr::eval(const EvalContext& ctx) const { return evaluate(*root_, ctx); }

std::string CoefficientExpr::structure() const { return structure_of(*root_); }

bool CoefficientExpr::is_constant() const {
  for (Symbol s : {Symbol::X1, Symbol::X2, Symbol::X3, Symbol::R, Symbol::Z, Symbol::D})
    if (uses_symbol(*root_, s)) return false;
  return true;
}

bool CoefficientExpr::depends_on_distance() const { return uses_symbol(*root_, Symbol::D); }

CoefficientExpr CoefficientExpr::positive_part() const {
  return CoefficientExpr(make(Node::Call{Func::Pos, {root_}}), "pos(" + source_ + ")");
}

CoefficientExpr CoefficientExpr::negative_part() const {
  return CoefficientExpr(make(Node::Call{Func::Neg, {root_}}), "neg(" + source_ + ")");
}

CoefficientExpr CoefficientExpr::scaled(double scale) const {
  return CoefficientExpr(make(Node::Binary{BinaryOp::Mul, make(Node::Number{scale}), root_}),
                         format_number(scale) + "*(" + source_ + ")");
}

CoefficientExpr operator+(const CoefficientExpr& a, const CoefficientExpr& b) {
  return CoefficientExpr(make(Node::Binary{BinaryOp::Add, a.root_, b.root_}), "(" + a.source_ + ")+(" + b.source_ + ")");
}

CoefficientExpr operator*(const CoefficientExpr& a, const CoefficientExpr& b) {
  return CoefficientExpr(make(Node::Binary{BinaryOp::Mul, a.root_, b.root_}), "(" + a.source_ + ")*(" + b.source_ + ")");
}

} // namespace hardylab::forms
