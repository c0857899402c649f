// Copyright 2026 The cvlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Scalar expressions in the real parameter g with complex constants.
//
// Grammar (whitespace insignificant):
//
//   expr    := term  (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 'g' | 'i' | ('sqrt' | 'exp') '(' expr ')'
//            | '(' expr ')'
//   number  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//            | '.' digits [exponent]

#include <complex>
#include <memory>
#include <string>
#include <string_view>

namespace cvlab {

enum class ExprKind {
    number,
    imaginary_unit,
    variable,
    negate,
    add,
    subtract,
    multiply,
    divide,
    power,
    sqrt,
    exp,
};

/// How sqrt treats a negative real argument.
enum class SqrtDomain {
    principal,        ///< principal complex root, cut on the negative axis
    nonnegative_real, ///< DomainError for negative real arguments
};

/// Immutable expression tree. Copies share structure.
class ParamExpr {
  public:
    /// The literal 0.
    ParamExpr();

    /// Nonnegative values become a literal; negative ones negate(literal).
    static ParamExpr number(double value);
    static ParamExpr constant(std::complex<double> value);
    static ParamExpr imaginary_unit();
    static ParamExpr variable();
    static ParamExpr unary(ExprKind kind, ParamExpr operand);
    static ParamExpr binary(ExprKind kind, ParamExpr lhs, ParamExpr rhs);

    [[nodiscard]] ExprKind kind() const;
    /// Literal value; only meaningful for ExprKind::number.
    [[nodiscard]] double value() const;
    /// Operand 0 (unary) or 0/1 (binary).
    [[nodiscard]] ParamExpr operand(int index) const;
    [[nodiscard]] int arity() const;
    [[nodiscard]] bool depends_on_g() const;

    friend bool operator==(const ParamExpr &a, const ParamExpr &b);

  private:
    struct Node;
    explicit ParamExpr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

ParamExpr operator+(const ParamExpr &a, const ParamExpr &b);
ParamExpr operator-(const ParamExpr &a, const ParamExpr &b);
ParamExpr operator*(const ParamExpr &a, const ParamExpr &b);
ParamExpr operator/(const ParamExpr &a, const ParamExpr &b);
ParamExpr operator-(const ParamExpr &a);
ParamExpr pow(const ParamExpr &base, const ParamExpr &exponent);
ParamExpr sqrt(const ParamExpr &a);
ParamExpr exp(const ParamExpr &a);

/// Throws ParseError (with position) or ParseError for unknown identifiers.
ParamExpr parse_expression(std::string_view text);

/// Minimal-parenthesis rendering; parse_expression(to_string(e)) == e.
std::string to_string(const ParamExpr &e);

/// Throws EvalError on division by zero (naming the subexpression) and
/// DomainError for negative sqrt arguments under SqrtDomain::nonnegative_real.
std::complex<double> evaluate(const ParamExpr &e, double g,
                              SqrtDomain sqrt_domain = SqrtDomain::principal);

} // namespace cvlab
