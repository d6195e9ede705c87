#pragma once

#include <vector>

#include "dwrlab/errors.hpp"

namespace dwrlab {

/// Points and weights on the reference interval [-1, 1].
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;
    int size() const { return static_cast<int>(points.size()); }
};

/// Gauss-Legendre rule, exact for polynomials up to degree 2n-1.
/// Public contract covers 1 <= n_points <= 16; UnsupportedOrder otherwise.
QuadratureRule gauss_rule(int n_points);

/// Internal helper without the order cap (assembly may need larger rules).
QuadratureRule gauss_legendre(int n_points);

/// Gauss-Lobatto points on [-1, 1] (n >= 2 includes both endpoints; n == 1
/// returns the single point 0 used by piecewise-constant bases).
std::vector<double> lobatto_points(int n);

/// Integrates f over [a, b] with a composite Gauss rule fine enough for
/// smooth integrands to reach near machine precision. Oracle-grade helper.
template <typename F>
double integrate(F&& f, double a, double b, int panels = 32, int points_per_panel = 12) {
    const QuadratureRule rule = gauss_legendre(points_per_panel);
    double total = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double xl = a + p * h;
        double s = 0.0;
        for (int q = 0; q < rule.size(); ++q) {
            const double x = xl + 0.5 * h * (rule.points[q] + 1.0);
            s += rule.weights[q] * f(x);
        }
        total += 0.5 * h * s;
    }
    return total;
}

} // namespace dwrlab
