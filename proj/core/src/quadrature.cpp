#include "dwrlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace dwrlab {

namespace {

// Legendre polynomial value and derivative at x.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

QuadratureRule compute_gauss(int n) {
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev initial guess, then Newton on P_n.
        double x = -std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            auto [p, dp] = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        auto [p, dp] = legendre(n, x);
        (void)p;
        rule.points[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    if (n == 1) {
        rule.points[0] = 0.0;
        rule.weights[0] = 2.0;
    }
    return rule;
}

std::vector<double> compute_lobatto(int n) {
    std::vector<double> pts(n);
    if (n == 1) {
        pts[0] = 0.0;
        return pts;
    }
    pts.front() = -1.0;
    pts.back() = 1.0;
    // Interior points are the roots of P'_{n-1}.
    const int m = n - 1;
    for (int i = 1; i < m; ++i) {
        double x = -std::cos(M_PI * i / m);
        for (int it = 0; it < 100; ++it) {
            auto [p, dp] = legendre(m, x);
            // Newton on P'_m using P''_m from the Legendre ODE:
            // (1-x^2) P'' = 2x P' - m(m+1) P
            const double ddp = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
            const double dx = dp / ddp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        pts[i] = x;
    }
    return pts;
}

} // namespace

QuadratureRule gauss_legendre(int n_points) {
    if (n_points < 1)
        throw UnsupportedOrder("gauss_legendre: n_points must be >= 1");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n_points);
    if (it == cache.end())
        it = cache.emplace(n_points, compute_gauss(n_points)).first;
    return it->second;
}

QuadratureRule gauss_rule(int n_points) {
    if (n_points < 1 || n_points > 16)
        throw UnsupportedOrder("gauss_rule: n_points must be in [1, 16]");
    return gauss_legendre(n_points);
}

std::vector<double> lobatto_points(int n) {
    if (n < 1)
        throw UnsupportedOrder("lobatto_points: n must be >= 1");
    static std::map<int, std::vector<double>> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, compute_lobatto(n)).first;
    return it->second;
}

} // namespace dwrlab
