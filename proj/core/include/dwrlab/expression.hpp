#pragma once

#include <functional>
#include <memory>
#include <string>

#include "dwrlab/errors.hpp"

namespace dwrlab {

/// Parsed arithmetic expression over the variables {x, t}, the operators
/// + - * / ^ (with unary minus), and the functions sin, cos, exp, abs.
/// Precedence: ^ (right-assoc) > unary minus > * / > + - (left-assoc).
class Expression {
public:
    struct Node;

    Expression() = default;

    double eval(double x, double t = 0.0) const;
    bool uses_time() const;
    /// Canonical parenthesized form; re-parsing yields an equivalent tree.
    std::string to_string() const;
    bool valid() const { return root_ != nullptr; }

    /// Two-argument callable view (x, t).
    std::function<double(double, double)> evaluator() const;

    friend Expression parse_expression(const std::string& text);

private:
    std::shared_ptr<const Node> root_;
};

/// Throws SyntaxError (with position and the expected-token set in the
/// message) or UnknownIdentifier.
Expression parse_expression(const std::string& text);

} // namespace dwrlab
