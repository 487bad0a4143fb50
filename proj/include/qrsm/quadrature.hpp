#pragma once

#include <type_traits>
#include <vector>

namespace qrsm {

/// Gauss-Legendre rule. Nodes are ascending; the rule is exact for
/// polynomials of degree <= 2n - 1 on its interval.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double lo = -1.0;
    double hi = 1.0;

    std::size_t size() const { return nodes.size(); }

    /// The same rule affinely mapped onto [a, b].
    QuadratureRule on(double a, double b) const;

    template <class F>
    auto integrate(F&& f) const
    {
        using Result = std::decay_t<decltype(f(nodes[0]))>;
        Result acc = weights[0] * f(nodes[0]);
        for (std::size_t i = 1; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

/// n-point Gauss-Legendre rule on [a, b] (Newton iteration on P_n).
QuadratureRule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0);

/// Default rule on the symmetric interval [-1/2, 1/2] used by the operator calculus.
inline QuadratureRule centered_rule(std::size_t n) { return gauss_legendre(n, -0.5, 0.5); }

}  // namespace qrsm
