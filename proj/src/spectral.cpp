#include "qrsm/spectral.hpp"

#include <cmath>

#include "qrsm/error.hpp"

namespace qrsm {

namespace {

constexpr double kSeriesThreshold = 1e-8;

struct SymmetricRoots {
    RMat sqrt;
    RMat inv_sqrt;
};

SymmetricRoots symmetric_roots(const RMat& pi)
{
    Eigen::SelfAdjointEigenSolver<RMat> es(pi);
    const RVec mu = es.eigenvalues();
    const RMat& q = es.eigenvectors();
    return {q * mu.cwiseSqrt().asDiagonal() * q.transpose(),
            q * mu.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose()};
}

}  // namespace

double centered_exp_integral(double x)
{
    if (std::abs(x) > kSeriesThreshold) return 2.0 * std::sinh(0.5 * x) / x;
    const double x2 = x * x;
    return 1.0 + x2 / 24.0 + x2 * x2 / 1920.0;
}

SpectralFactorization spectral_factorize(const RMat& theta, const RMat& pi)
{
    const auto cond = validate_conditions(theta, pi);
    if (!cond.ok()) {
        std::string msg = "cannot factorize:";
        for (const auto& f : cond.failures) msg += " " + f + ";";
        throw InvariantError("spectral", msg);
    }
    const RMat pi_sym = symmetrized(pi);
    const auto roots = symmetric_roots(pi_sym);

    const CMat h = kI * (roots.sqrt * theta * roots.sqrt).cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(h));
    const auto n = theta.rows();

    SpectralFactorization f;
    f.exponents.resize(n);
    CMat u(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        f.exponents(j) = es.eigenvalues()(n - 1 - j);
        u.col(j) = es.eigenvectors().col(n - 1 - j);
    }
    f.psi = roots.inv_sqrt.cast<cplx>() * u;
    f.psi_inv = u.adjoint() * roots.sqrt.cast<cplx>();
    f.s_matrix = compute_s_matrix(f.exponents);
    f.s_recip = f.s_matrix.cwiseInverse();
    f.d_integrals = f.exponents.unaryExpr([](double a) { return centered_exp_integral(a); });

    const CMat target = kI * (theta * pi_sym).cast<cplx>();
    const CMat rebuilt = f.psi * f.exponents.cast<cplx>().asDiagonal() * f.psi_inv;
    f.reconstruction_residual = (rebuilt - target).norm() / std::max(target.norm(), 1e-300);
    return f;
}

CMat k_lambda(const SpectralFactorization& fact, double lambda)
{
    const CVec d = (lambda * fact.exponents).array().exp().cast<cplx>();
    return fact.psi * d.asDiagonal() * fact.psi_inv;
}

RMat compute_s_matrix(const RVec& exponents)
{
    const auto n = exponents.size();
    RMat s(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) s(j, k) = centered_exp_integral(exponents(j) + exponents(k));
    return s;
}

CMat apply_K(const SpectralFactorization& fact, const CMat& p)
{
    const CMat inner = fact.psi_inv * p * fact.psi_inv.transpose();
    const CMat weighted = fact.s_matrix.cast<cplx>().cwiseProduct(inner);
    return fact.psi * weighted * fact.psi.transpose();
}

CMat apply_K_inverse(const SpectralFactorization& fact, const CMat& p)
{
    const CMat inner = fact.psi_inv * p * fact.psi_inv.transpose();
    const CMat weighted = fact.s_recip.cast<cplx>().cwiseProduct(inner);
    return fact.psi * weighted * fact.psi.transpose();
}

CMat apply_K_inv_adjoint(const SpectralFactorization& fact, const CMat& p)
{
    const CMat inner = fact.psi.adjoint() * p * fact.psi.conjugate();
    const CMat weighted = fact.s_recip.cast<cplx>().cwiseProduct(inner);
    return fact.psi_inv.adjoint() * weighted * fact.psi_inv.conjugate();
}

CMat apply_K_quadrature(const SpectralFactorization& fact, const CMat& p, const QuadratureRule& rule)
{
    return rule.integrate([&](double lambda) -> CMat {
        const CMat k = k_lambda(fact, lambda);
        return k * p * k.transpose();
    });
}

CMat gamma_matrix(const SpectralFactorization& fact, const RMat& pi, const RMat& b_matrix, const CMat& omega,
                  const RMat& m_matrix)
{
    const auto n = fact.n();
    if (pi.rows() != n || b_matrix.rows() != n || b_matrix.cols() != omega.rows() || omega.cols() != m_matrix.rows() ||
        m_matrix.cols() != n)
        throw InvariantError("spectral", "gamma_matrix: dimension mismatch");

    const CMat q0 = (pi * b_matrix).cast<cplx>() * omega * m_matrix.cast<cplx>();
    const CMat psi_inv_t = fact.psi_inv.transpose();
    const CMat quadratic = psi_inv_t *
                           fact.s_matrix.cast<cplx>().cwiseProduct(fact.psi.transpose() * q0 * fact.psi) *
                           fact.psi_inv;
    const CMat linear = psi_inv_t * fact.d_integrals.cast<cplx>().asDiagonal() * fact.psi.transpose() * q0 *
                        k_lambda(fact, -0.5);
    return kI * (quadratic - linear);
}

CMat gamma_matrix_quadrature(const SpectralFactorization& fact, const RMat& pi, const RMat& b_matrix,
                             const CMat& omega, const RMat& m_matrix, const QuadratureRule& rule)
{
    const CMat q0 = (pi * b_matrix).cast<cplx>() * omega * m_matrix.cast<cplx>();
    const CMat k_start = k_lambda(fact, -0.5);
    const CMat integral = rule.integrate([&](double lambda) -> CMat {
        const CMat k = k_lambda(fact, lambda);
        return k.transpose() * q0 * (k - k_start);
    });
    return kI * integral;
}

DriftCorrection drift_correction(const SpectralFactorization& fact, const CMat& gamma)
{
    DriftCorrection out;
    out.gamma = gamma;
    out.gamma_hermitian_residual = relative_hermitian_residual(gamma);
    if (out.gamma_hermitian_residual > kGammaHermitianLimit)
        throw InvariantError("spectral", "Gamma not Hermitian (relative residual " +
                                             std::to_string(out.gamma_hermitian_residual) + ")");
    const CMat z = apply_K_inv_adjoint(fact, gamma.conjugate());
    out.y_matrix = z.real();
    out.u_matrix = z.imag();
    out.y_symmetry_residual = (out.y_matrix - out.y_matrix.transpose()).norm();
    out.u_antisymmetry_residual = (out.u_matrix + out.u_matrix.transpose()).norm();
    return out;
}

DriftAtPi drift_at(const SystemSpec& spec, const DerivedMatrices& derived, const RMat& pi)
{
    DriftAtPi out{spectral_factorize(spec.theta, pi), {}};
    const CMat gamma = gamma_matrix(out.fact, pi, derived.b_matrix, spec.omega, spec.m_matrix);
    out.drift = drift_correction(out.fact, gamma);
    return out;
}

}  // namespace qrsm
