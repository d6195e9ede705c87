#pragma once

#include <vector>

namespace dwrlab {

/// Lagrange nodal basis on given reference nodes in [-1, 1].
/// Value of the j-th cardinal function at xi.
double lagrange_value(const std::vector<double>& nodes, int j, double xi);

/// Derivative of the j-th cardinal function at xi.
double lagrange_derivative(const std::vector<double>& nodes, int j, double xi);

/// All basis values at xi (size nodes.size()).
std::vector<double> lagrange_values(const std::vector<double>& nodes, double xi);
std::vector<double> lagrange_derivatives(const std::vector<double>& nodes, double xi);

} // namespace dwrlab
