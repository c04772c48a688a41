#include "toolgap/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace toolgap {

namespace {

// Recursive-descent grammar:
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | primary
//   primary := number | '(' expr ')'
class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    double parse() {
        const double v = parse_expr();
        skip_ws();
        if (pos_ != src_.size())
            throw ExprParseError("unexpected trailing input at position " + std::to_string(pos_));
        return v;
    }

private:
    double parse_expr() {
        double v = parse_term();
        for (;;) {
            skip_ws();
            if (accept('+')) {
                v += parse_term();
            } else if (accept('-')) {
                v -= parse_term();
            } else {
                return v;
            }
        }
    }

    double parse_term() {
        double v = parse_factor();
        for (;;) {
            skip_ws();
            if (accept('*')) {
                v *= parse_factor();
            } else if (accept('/')) {
                const double rhs = parse_factor();
                if (rhs == 0.0) throw DivZeroError("division by zero");
                v /= rhs;
            } else {
                return v;
            }
        }
    }

    double parse_factor() {
        skip_ws();
        if (accept('-')) return -parse_factor();
        return parse_primary();
    }

    double parse_primary() {
        skip_ws();
        if (accept('(')) {
            const double v = parse_expr();
            skip_ws();
            if (!accept(')')) throw ExprParseError("missing closing parenthesis");
            return v;
        }
        return parse_number();
    }

    double parse_number() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
        }
        if (pos_ == start || (pos_ == start + 1 && src_[start] == '.'))
            throw ExprParseError("expected a number at position " + std::to_string(start));
        const std::string literal(src_.substr(start, pos_ - start));
        return std::strtod(literal.c_str(), nullptr);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace

double eval_expression(std::string_view expr) {
    Parser parser(expr);
    const double v = parser.parse();
    if (!std::isfinite(v)) throw ExprParseError("non-finite result");
    return v;
}

std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // fold -0
    const double rounded = std::round(v);
    if (std::fabs(v - rounded) < 1e-9 && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", rounded);
        return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace toolgap
