#include "dwrlab/basis.hpp"

#include <cstddef>

namespace dwrlab {

double lagrange_value(const std::vector<double>& nodes, int j, double xi) {
    double v = 1.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (static_cast<int>(k) == j) continue;
        v *= (xi - nodes[k]) / (nodes[j] - nodes[k]);
    }
    return v;
}

double lagrange_derivative(const std::vector<double>& nodes, int j, double xi) {
    // d/dxi prod_k (xi - x_k)/(x_j - x_k) = sum_m [1/(x_j - x_m)] prod_{k != m} ...
    double sum = 0.0;
    for (std::size_t m = 0; m < nodes.size(); ++m) {
        if (static_cast<int>(m) == j) continue;
        double term = 1.0 / (nodes[j] - nodes[m]);
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (static_cast<int>(k) == j || k == m) continue;
            term *= (xi - nodes[k]) / (nodes[j] - nodes[k]);
        }
        sum += term;
    }
    return sum;
}

std::vector<double> lagrange_values(const std::vector<double>& nodes, double xi) {
    std::vector<double> v(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j)
        v[j] = lagrange_value(nodes, static_cast<int>(j), xi);
    return v;
}

std::vector<double> lagrange_derivatives(const std::vector<double>& nodes, double xi) {
    std::vector<double> v(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j)
        v[j] = lagrange_derivative(nodes, static_cast<int>(j), xi);
    return v;
}

} // namespace dwrlab
