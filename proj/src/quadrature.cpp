#include "qrsm/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qrsm {

QuadratureRule QuadratureRule::on(double a, double b) const
{
    QuadratureRule out;
    out.lo = a;
    out.hi = b;
    out.nodes.resize(nodes.size());
    out.weights.resize(weights.size());
    const double scale = (b - a) / (hi - lo);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out.nodes[i] = a + (nodes[i] - lo) * scale;
        out.weights[i] = weights[i] * scale;
    }
    return out;
}

QuadratureRule gauss_legendre(std::size_t n, double a, double b)
{
    if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
    QuadratureRule rule;
    rule.lo = a;
    rule.hi = b;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * static_cast<double>(j) - 1.0) * z * p2 - (static_cast<double>(j) - 1.0) * p3) /
                     static_cast<double>(j);
            }
            dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
            const double z_old = z;
            z = z_old - p1 / dp;
            if (std::abs(z - z_old) <= 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p1 = 1.0, p2 = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * static_cast<double>(j) - 1.0) * z * p2 - (static_cast<double>(j) - 1.0) * p3) /
                 static_cast<double>(j);
        }
        dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = mid - half * z;
        rule.nodes[n - 1 - i] = mid + half * z;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = mid;
    return rule;
}

}  // namespace qrsm
