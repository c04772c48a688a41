#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toolgap {

struct ExprParseError : std::runtime_error {
    explicit ExprParseError(const std::string& what) : std::runtime_error(what) {}
};

struct DivZeroError : std::runtime_error {
    explicit DivZeroError(const std::string& what) : std::runtime_error(what) {}
};

// Evaluates arithmetic over decimal literals with + - * / unary minus and
// parentheses. Left-associative, standard precedence. Throws ExprParseError
// on malformed input and DivZeroError on division by zero.
double eval_expression(std::string_view expr);

// Renders a result the way the calculator tool reports it: integral values
// without a decimal point, otherwise shortest round-trip form.
std::string format_number(double v);

}  // namespace toolgap
