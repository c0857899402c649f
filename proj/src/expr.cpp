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

#include "cvlab/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <system_error>

#include "cvlab/errors.hpp"

namespace cvlab {

struct ParamExpr::Node {
    ExprKind kind = ExprKind::number;
    double value = 0.0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

bool is_unary(ExprKind k) {
    return k == ExprKind::negate || k == ExprKind::sqrt || k == ExprKind::exp;
}

bool is_binary(ExprKind k) {
    return k == ExprKind::add || k == ExprKind::subtract ||
           k == ExprKind::multiply || k == ExprKind::divide ||
           k == ExprKind::power;
}

} // namespace

ParamExpr::ParamExpr() : node_(std::make_shared<Node>()) {}

ParamExpr::ParamExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

ParamExpr ParamExpr::number(double value) {
    if (!std::isfinite(value)) {
        throw DomainError("expression literal must be finite");
    }
    if (std::signbit(value) && value != 0.0) {
        return unary(ExprKind::negate, number(-value));
    }
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::number;
    n->value = value == 0.0 ? 0.0 : value;
    return ParamExpr(std::move(n));
}

ParamExpr ParamExpr::constant(std::complex<double> value) {
    if (value.imag() == 0.0) {
        return number(value.real());
    }
    ParamExpr im = number(std::abs(value.imag())) * imaginary_unit();
    if (value.real() == 0.0) {
        return value.imag() < 0 ? -im : im;
    }
    return value.imag() < 0 ? number(value.real()) - im
                            : number(value.real()) + im;
}

ParamExpr ParamExpr::imaginary_unit() {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::imaginary_unit;
    return ParamExpr(std::move(n));
}

ParamExpr ParamExpr::variable() {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::variable;
    return ParamExpr(std::move(n));
}

ParamExpr ParamExpr::unary(ExprKind kind, ParamExpr operand) {
    if (!is_unary(kind)) {
        throw std::invalid_argument("ParamExpr::unary: not a unary kind");
    }
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(operand.node_);
    return ParamExpr(std::move(n));
}

ParamExpr ParamExpr::binary(ExprKind kind, ParamExpr lhs, ParamExpr rhs) {
    if (!is_binary(kind)) {
        throw std::invalid_argument("ParamExpr::binary: not a binary kind");
    }
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs.node_);
    n->rhs = std::move(rhs.node_);
    return ParamExpr(std::move(n));
}

ExprKind ParamExpr::kind() const { return node_->kind; }

double ParamExpr::value() const { return node_->value; }

int ParamExpr::arity() const {
    if (is_unary(node_->kind)) {
        return 1;
    }
    return is_binary(node_->kind) ? 2 : 0;
}

ParamExpr ParamExpr::operand(int index) const {
    if (index < 0 || index >= arity()) {
        throw std::out_of_range("ParamExpr::operand: index out of range");
    }
    return ParamExpr(index == 0 ? node_->lhs : node_->rhs);
}

bool ParamExpr::depends_on_g() const {
    if (node_->kind == ExprKind::variable) {
        return true;
    }
    if (node_->lhs && ParamExpr(node_->lhs).depends_on_g()) {
        return true;
    }
    return node_->rhs && ParamExpr(node_->rhs).depends_on_g();
}

bool operator==(const ParamExpr &a, const ParamExpr &b) {
    const auto *x = a.node_.get();
    const auto *y = b.node_.get();
    if (x == y) {
        return true;
    }
    if (x->kind != y->kind) {
        return false;
    }
    if (x->kind == ExprKind::number) {
        return x->value == y->value;
    }
    if (x->lhs && !(ParamExpr(x->lhs) == ParamExpr(y->lhs))) {
        return false;
    }
    return !x->rhs || ParamExpr(x->rhs) == ParamExpr(y->rhs);
}

ParamExpr operator+(const ParamExpr &a, const ParamExpr &b) {
    return ParamExpr::binary(ExprKind::add, a, b);
}
ParamExpr operator-(const ParamExpr &a, const ParamExpr &b) {
    return ParamExpr::binary(ExprKind::subtract, a, b);
}
ParamExpr operator*(const ParamExpr &a, const ParamExpr &b) {
    return ParamExpr::binary(ExprKind::multiply, a, b);
}
ParamExpr operator/(const ParamExpr &a, const ParamExpr &b) {
    return ParamExpr::binary(ExprKind::divide, a, b);
}
ParamExpr operator-(const ParamExpr &a) {
    return ParamExpr::unary(ExprKind::negate, a);
}
ParamExpr pow(const ParamExpr &base, const ParamExpr &exponent) {
    return ParamExpr::binary(ExprKind::power, base, exponent);
}
ParamExpr sqrt(const ParamExpr &a) {
    return ParamExpr::unary(ExprKind::sqrt, a);
}
ParamExpr exp(const ParamExpr &a) { return ParamExpr::unary(ExprKind::exp, a); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
  public:
    explicit Parser(std::string_view text) : text_(text) {}

    ParamExpr parse() {
        ParamExpr e = expr();
        skip_space();
        if (pos_ != text_.size()) {
            throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'",
                             pos_);
        }
        return e;
    }

  private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_space() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                text_[pos_] == '\n' || text_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    ParamExpr expr() {
        ParamExpr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = lhs + term();
            } else if (accept('-')) {
                lhs = lhs - term();
            } else {
                return lhs;
            }
        }
    }

    ParamExpr term() {
        ParamExpr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = lhs * unary();
            } else if (accept('/')) {
                lhs = lhs / unary();
            } else {
                return lhs;
            }
        }
    }

    ParamExpr unary() {
        if (accept('-')) {
            return -unary();
        }
        return power();
    }

    ParamExpr power() {
        ParamExpr base = primary();
        if (accept('^')) {
            return pow(base, unary());
        }
        return base;
    }

    ParamExpr primary() {
        skip_space();
        if (pos_ >= text_.size()) {
            throw ParseError("unexpected end of expression", pos_);
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            ParamExpr inner = expr();
            expect(')');
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                    text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string_view name = text_.substr(start, pos_ - start);
            if (name == "g") {
                return ParamExpr::variable();
            }
            if (name == "i") {
                return ParamExpr::imaginary_unit();
            }
            if (name == "sqrt" || name == "exp") {
                expect('(');
                ParamExpr arg = expr();
                expect(')');
                return name == "sqrt" ? cvlab::sqrt(arg) : cvlab::exp(arg);
            }
            throw ParseError("unknown identifier '" + std::string(name) + "'",
                             start);
        }
        throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
    }

    ParamExpr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            const std::size_t from = pos_;
            while (pos_ < text_.size() && text_[pos_] >= '0' &&
                   text_[pos_] <= '9') {
                ++pos_;
            }
            return pos_ - from;
        };
        std::size_t count = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            count += digits();
        }
        if (count == 0) {
            throw ParseError("malformed number", start);
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
                ++pos_;
            }
            if (digits() == 0) {
                throw ParseError("malformed exponent", start);
            }
        }
        std::string literal(text_.substr(start, pos_ - start));
        if (literal.front() == '.') {
            literal.insert(literal.begin(), '0');
        }
        double value = 0.0;
        const auto [end, ec] =
            std::from_chars(literal.data(), literal.data() + literal.size(), value);
        if (ec != std::errc() || end != literal.data() + literal.size() ||
            !std::isfinite(value)) {
            throw ParseError("number out of range", start);
        }
        // imaginary literal such as "0.5i" in "a+bi"
        if (pos_ < text_.size() && text_[pos_] == 'i' &&
            (pos_ + 1 == text_.size() ||
             !(std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])) ||
               text_[pos_ + 1] == '_'))) {
            ++pos_;
            return ParamExpr::number(value) * ParamExpr::imaginary_unit();
        }
        return ParamExpr::number(value);
    }
};

} // namespace

ParamExpr parse_expression(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(ExprKind k) {
    switch (k) {
    case ExprKind::add:
    case ExprKind::subtract:
        return 1;
    case ExprKind::multiply:
    case ExprKind::divide:
        return 2;
    case ExprKind::negate:
        return 3;
    case ExprKind::power:
        return 4;
    default:
        return 5;
    }
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), end);
}

void print(const ParamExpr &e, std::string &out);

void print_wrapped(const ParamExpr &e, bool parens, std::string &out) {
    if (parens) {
        out += '(';
    }
    print(e, out);
    if (parens) {
        out += ')';
    }
}

void print(const ParamExpr &e, std::string &out) {
    const ExprKind k = e.kind();
    switch (k) {
    case ExprKind::number:
        out += format_number(e.value());
        return;
    case ExprKind::imaginary_unit:
        out += 'i';
        return;
    case ExprKind::variable:
        out += 'g';
        return;
    case ExprKind::sqrt:
    case ExprKind::exp: {
        const ParamExpr arg = e.operand(0);
        out += k == ExprKind::sqrt ? "sqrt(" : "exp(";
        print(arg, out);
        out += ')';
        return;
    }
    case ExprKind::negate: {
        const ParamExpr arg = e.operand(0);
        out += '-';
        print_wrapped(arg, precedence(arg.kind()) < 3, out);
        return;
    }
    default:
        break;
    }
    const ParamExpr lhs = e.operand(0);
    const ParamExpr rhs = e.operand(1);
    const int p = precedence(k);
    char op = '+';
    switch (k) {
    case ExprKind::subtract: op = '-'; break;
    case ExprKind::multiply: op = '*'; break;
    case ExprKind::divide: op = '/'; break;
    case ExprKind::power: op = '^'; break;
    default: break;
    }
    if (k == ExprKind::power) {
        // base is a primary; exponent is a unary
        print_wrapped(lhs, precedence(lhs.kind()) <= 4, out);
        out += op;
        print_wrapped(rhs, precedence(rhs.kind()) < 3, out);
        return;
    }
    // left associative: the left operand may sit at the same level
    print_wrapped(lhs, precedence(lhs.kind()) < p, out);
    out += op;
    print_wrapped(rhs, precedence(rhs.kind()) <= p, out);
}

} // namespace

std::string to_string(const ParamExpr &e) {
    std::string out;
    print(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

using C = std::complex<double>;

bool is_real(C z) { return z.imag() == 0.0; }

std::string at_g(double g) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), g);
    (void)ec;
    return std::string(buf.data(), end);
}

C integer_power(C base, long long n) {
    const bool invert = n < 0;
    unsigned long long m = invert ? static_cast<unsigned long long>(-n)
                                  : static_cast<unsigned long long>(n);
    C result(1.0, 0.0);
    while (m != 0) {
        if ((m & 1ULL) != 0) {
            result = is_real(result) && is_real(base)
                         ? C(result.real() * base.real(), 0.0)
                         : result * base;
        }
        base = is_real(base) ? C(base.real() * base.real(), 0.0) : base * base;
        m >>= 1ULL;
    }
    if (invert) {
        return is_real(result) ? C(1.0 / result.real(), 0.0) : C(1.0) / result;
    }
    return result;
}

C eval(const ParamExpr &e, double g, SqrtDomain domain) {
    switch (e.kind()) {
    case ExprKind::number:
        return {e.value(), 0.0};
    case ExprKind::imaginary_unit:
        return {0.0, 1.0};
    case ExprKind::variable:
        return {g, 0.0};
    case ExprKind::negate:
        return -eval(e.operand(0), g, domain);
    case ExprKind::sqrt: {
        C arg = eval(e.operand(0), g, domain);
        if (is_real(arg)) {
            if (arg.real() >= 0.0) {
                return {std::sqrt(arg.real()), 0.0};
            }
            if (domain == SqrtDomain::nonnegative_real) {
                throw DomainError("negative argument to " + to_string(e) +
                                  " at g=" + at_g(g));
            }
            return {0.0, std::sqrt(-arg.real())};
        }
        return std::sqrt(arg);
    }
    case ExprKind::exp: {
        const C arg = eval(e.operand(0), g, domain);
        if (is_real(arg)) {
            return {std::exp(arg.real()), 0.0};
        }
        return std::exp(arg);
    }
    default:
        break;
    }
    const C a = eval(e.operand(0), g, domain);
    const C b = eval(e.operand(1), g, domain);
    const bool real = is_real(a) && is_real(b);
    switch (e.kind()) {
    case ExprKind::add:
        return real ? C(a.real() + b.real(), 0.0) : a + b;
    case ExprKind::subtract:
        return real ? C(a.real() - b.real(), 0.0) : a - b;
    case ExprKind::multiply:
        return real ? C(a.real() * b.real(), 0.0) : a * b;
    case ExprKind::divide:
        if (b == C(0.0, 0.0)) {
            throw EvalError("division by zero in " + to_string(e) + " at g=" +
                            at_g(g));
        }
        return real ? C(a.real() / b.real(), 0.0) : a / b;
    case ExprKind::power: {
        if (is_real(b) && std::trunc(b.real()) == b.real() &&
            std::abs(b.real()) <= 1024.0) {
            const auto n = static_cast<long long>(b.real());
            if (n < 0 && a == C(0.0, 0.0)) {
                throw EvalError("division by zero in " + to_string(e) +
                                " at g=" + at_g(g));
            }
            return integer_power(a, n);
        }
        if (real && a.real() >= 0.0) {
            return {std::pow(a.real(), b.real()), 0.0};
        }
        if (a == C(0.0, 0.0)) {
            if (b.real() > 0.0) {
                return {0.0, 0.0};
            }
            throw EvalError("division by zero in " + to_string(e) + " at g=" +
                            at_g(g));
        }
        return std::pow(a, b);
    }
    default:
        break;
    }
    throw std::logic_error("unhandled expression kind");
}

} // namespace

std::complex<double> evaluate(const ParamExpr &e, double g, SqrtDomain sqrt_domain) {
    if (!std::isfinite(g)) {
        throw DomainError("g must be finite");
    }
    return eval(e, g, sqrt_domain);
}

} // namespace cvlab
