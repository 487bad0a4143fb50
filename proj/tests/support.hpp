#pragma once

// Shared fixtures and independent reference computations for the tests.
// Nothing here calls into the spectral calculus it is meant to check.

#include <cmath>
#include <functional>
#include <random>

#include "qrsm/model.hpp"
#include "qrsm/types.hpp"

namespace qrsm::test {

inline RMat theta2() { return standard_ccr_matrix(2); }

inline SystemSpec single_mode(const RMat& m_matrix = RMat::Identity(2, 2), const RMat& r = RMat::Identity(2, 2))
{
    return make_system(theta2(), r, m_matrix, vacuum_ito_matrix(m_matrix.rows()), RMat(), {});
}

inline SystemSpec decoupled(const RMat& r = RMat::Identity(2, 2))
{
    return make_system(theta2(), r, RMat::Zero(2, 2), vacuum_ito_matrix(2), RMat(), {});
}

inline SystemSpec quadratic_demo(double gamma = 0.05)
{
    RMat c(2, 1);
    c << 1.0, 0.0;
    return make_system(theta2(), RMat::Identity(2, 2), RMat::Identity(2, 2), vacuum_ito_matrix(2), c,
                       {PerturbationFn::quadratic(gamma)});
}

inline RMat random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> nd;
    RMat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = nd(rng);
    return m;
}

inline CMat random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols)
{
    return random_matrix(rng, rows, cols).cast<cplx>() + kI * random_matrix(rng, rows, cols).cast<cplx>();
}

/// Nonsingular antisymmetric: a random symplectic-like congruence of J.
inline RMat random_theta(std::mt19937_64& rng, Eigen::Index n)
{
    const RMat g = RMat::Identity(n, n) + 0.3 * random_matrix(rng, n, n);
    return g * standard_ccr_matrix(n) * g.transpose();
}

inline RMat random_spd(std::mt19937_64& rng, Eigen::Index n, double floor = 0.2)
{
    const RMat g = random_matrix(rng, n, n);
    return g * g.transpose() / static_cast<double>(n) + floor * RMat::Identity(n, n);
}

inline SystemSpec random_system(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m = 2)
{
    const RMat r = random_spd(rng, n, 0.5);
    const RMat mm = random_matrix(rng, m, n);
    const CMat z = random_complex(rng, m, m);
    const CMat omega = z * z.adjoint() / static_cast<double>(m) + vacuum_ito_matrix(m);
    return make_system(random_theta(rng, n), r, mm, omega, RMat(), {});
}

/// exp(M) by Taylor series with scaling and squaring (reference only).
inline CMat taylor_expm(const CMat& m)
{
    int squarings = 0;
    double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.25) {
        norm /= 2.0;
        ++squarings;
    }
    const CMat a = m / std::pow(2.0, squarings);
    CMat term = CMat::Identity(m.rows(), m.cols());
    CMat sum = term;
    for (int k = 1; k < 30; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

inline RMat taylor_expm(const RMat& m) { return taylor_expm(CMat(m.cast<cplx>())).real(); }

/// Composite Simpson rule with `panels` (even) subintervals; independent of the
/// Gauss-Legendre engine.
template <class F>
auto simpson(F&& f, double a, double b, int panels = 2000)
{
    const double h = (b - a) / panels;
    using R = std::decay_t<decltype(f(a))>;
    R acc = f(a) + f(b);
    for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return R(acc * (h / 3.0));
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m)
{
    return m.size() ? static_cast<double>(m.cwiseAbs().maxCoeff()) : 0.0;
}

}  // namespace qrsm::test
