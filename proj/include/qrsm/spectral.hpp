#pragma once

#include "qrsm/model.hpp"
#include "qrsm/quadrature.hpp"
#include "qrsm/types.hpp"

namespace qrsm {

/// Eigen-data of i Theta Pi. With exponents a_j (real, sorted descending) and
/// eigenvector matrix psi,
///
///     K_lambda = exp(i lambda Theta Pi) = psi diag(exp(a_j lambda)) psi^{-1}.
///
/// The eigensolve runs on the Hermitian matrix i sqrt(Pi) Theta sqrt(Pi) and
/// the eigenvectors are mapped back through Pi^{-1/2}, so the spectrum is real
/// by construction and repeated exponents are harmless.
struct SpectralFactorization {
    CMat psi;
    CMat psi_inv;
    RVec exponents;
    RMat s_matrix;     ///< s_jk = int_{-1/2}^{1/2} exp((a_j + a_k) lambda) d lambda
    RMat s_recip;      ///< entrywise reciprocal of s_matrix
    RVec d_integrals;  ///< int_{-1/2}^{1/2} exp(a_j lambda) d lambda

    double reconstruction_residual = 0.0;  ///< ||psi diag(a) psi^{-1} - i Theta Pi|| / ||Theta Pi||

    Eigen::Index n() const { return exponents.size(); }
};

/// 2 sinh(x/2) / x, continued by its even Taylor series for |x| <= 1e-8.
double centered_exp_integral(double x);

SpectralFactorization spectral_factorize(const RMat& theta, const RMat& pi);

CMat k_lambda(const SpectralFactorization& fact, double lambda);

RMat compute_s_matrix(const RVec& exponents);

/// P -> int K_lambda P K_lambda^T d lambda via the Hadamard representation.
CMat apply_K(const SpectralFactorization& fact, const CMat& p);
CMat apply_K_inverse(const SpectralFactorization& fact, const CMat& p);
/// Adjoint of apply_K_inverse with respect to the Frobenius inner product.
CMat apply_K_inv_adjoint(const SpectralFactorization& fact, const CMat& p);

/// Direct quadrature of int K_lambda P K_lambda^T d lambda (cross-check route).
CMat apply_K_quadrature(const SpectralFactorization& fact, const CMat& p, const QuadratureRule& rule);

/// Ito correction matrix
///     Gamma = i int_{-1/2}^{1/2} K_lambda^T Pi B Omega M (K_lambda - K_{-1/2}) d lambda
/// evaluated in the eigenbasis of i Theta Pi.
CMat gamma_matrix(const SpectralFactorization& fact, const RMat& pi, const RMat& b_matrix, const CMat& omega,
                  const RMat& m_matrix);

/// The same integral by Gauss-Legendre quadrature (cross-check route).
CMat gamma_matrix_quadrature(const SpectralFactorization& fact, const RMat& pi, const RMat& b_matrix,
                             const CMat& omega, const RMat& m_matrix, const QuadratureRule& rule);

struct DriftCorrection {
    CMat gamma;
    RMat y_matrix;  ///< Re K^{-dagger}(conj(Gamma))
    RMat u_matrix;  ///< Im K^{-dagger}(conj(Gamma))

    double gamma_hermitian_residual = 0.0;  ///< relative
    double y_symmetry_residual = 0.0;       ///< ||Y - Y^T||
    double u_antisymmetry_residual = 0.0;   ///< ||U + U^T||
};

/// Gamma above this relative Hermiticity residual signals an upstream fault.
inline constexpr double kGammaHermitianLimit = 1e-6;

DriftCorrection drift_correction(const SpectralFactorization& fact, const CMat& gamma);

/// Factorize at Pi and evaluate Gamma, Y and U for a system in one call.
struct DriftAtPi {
    SpectralFactorization fact;
    DriftCorrection drift;
};
DriftAtPi drift_at(const SystemSpec& spec, const DerivedMatrices& derived, const RMat& pi);

}  // namespace qrsm
