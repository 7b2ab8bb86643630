#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace hardylab::forms {

/// Values of the free symbols at one evaluation point.
struct EvalContext {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;
  double r = 0.0;
  double z = 0.0;
  double d = 0.0;
};

/// Immutable scalar expression in x1..x3, r, z and the boundary distance d.
///
/// Grammar (whitespace ignored):
///
///     expr   := term (('+' | '-') term)*
///     term   := unary (('*' | '/') unary)*
///     unary  := ('-' | '+') unary | power
///     power  := base ('^' signed-number)?
///     base   := number | ident | '(' expr ')' | func '(' expr (',' expr)* ')'
///
/// Identifiers: x1 x2 x3 (x, y aliases for x1 x2), r, z, d, pi.
/// Functions: min(a, b), max(a, b), abs(a), pos(a) = max(a, 0),
/// neg(a) = max(-a, 0). So -d^2 is -(d^2), and '^' binds tighter than '*'.
class CoefficientExpr {
public:
  struct Node;

  /// Parses text; throws ParseError with the byte offset of the failure.
  static CoefficientExpr parse(std::string_view text);
  static CoefficientExpr constant(double value);
  /// d^exponent.
  static CoefficientExpr distance_power(double exponent);

  /// The constant 0.
  CoefficientExpr();

  double eval(const EvalContext& ctx) const;
  /// Prefix form, e.g. "(+ (* -0.125 (^ d -2)) 5)".
  std::string structure() const;
  const std::string& source() const noexcept { return source_; }

  bool is_constant() const;
  bool depends_on_distance() const;

  /// pos(e) and neg(e) wrappers; e == pos(e) - neg(e) pointwise.
  CoefficientExpr positive_part() const;
  CoefficientExpr negative_part() const;
  /// Builds (scale * e) without reparsing.
  CoefficientExpr scaled(double scale) const;

  friend CoefficientExpr operator+(const CoefficientExpr& a, const CoefficientExpr& b);
  friend CoefficientExpr operator*(const CoefficientExpr& a, const CoefficientExpr& b);

private:
  CoefficientExpr(std::shared_ptr<const Node> root, std::string source);

  std::shared_ptr<const Node> root_;
  std::string source_;
};

} // namespace hardylab::forms
