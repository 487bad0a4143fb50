#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qrsm/types.hpp"

namespace qrsm {

/// Scalar perturbation phi_k of a channel variable y = c_k^T X, together with
/// its derivative. All kinds are smooth; the derivative is also available as an
/// analytic matrix function so it can act on non-Hermitian operators.
class PerturbationFn {
public:
    enum class Kind { zero, quadratic, polynomial, sinusoid };

    static PerturbationFn zero();
    /// phi(y) = gamma y^2 / 2
    static PerturbationFn quadratic(double gamma);
    /// phi(y) = sum_k coeffs[k] y^k (ascending powers)
    static PerturbationFn polynomial(std::vector<double> coeffs);
    /// phi(y) = epsilon sin(omega0 y)
    static PerturbationFn sinusoid(double epsilon, double omega0);

    Kind kind() const noexcept { return kind_; }
    std::string kind_name() const;

    double gamma() const noexcept { return gamma_; }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    double epsilon() const noexcept { return epsilon_; }
    double omega0() const noexcept { return omega0_; }

    double value(double y) const;
    double derivative(double y) const;

    /// phi'(Y) for a square complex matrix Y, evaluated through the power
    /// series of phi' (exact for the polynomial kinds, matrix exponentials for
    /// the sinusoid). Y need not be Hermitian.
    CMat derivative_of(const CMat& y) const;

    bool is_zero() const;

private:
    PerturbationFn() = default;

    Kind kind_ = Kind::zero;
    double gamma_ = 0.0;
    std::vector<double> coeffs_;
    double epsilon_ = 0.0;
    double omega0_ = 0.0;
};

/// Constant data of the open oscillator: CCR matrix, nominal energy matrix,
/// field coupling, Ito matrix and Lur'e perturbation channels. Construct
/// through `make_system` or `load_system`; both validate and symmetrize.
struct SystemSpec {
    RMat theta;      ///< n x n, antisymmetric
    RMat r_matrix;   ///< n x n, symmetric
    RMat m_matrix;   ///< m x n
    CMat omega;      ///< m x m, Hermitian PSD
    RMat c_matrix;   ///< n x s
    std::vector<PerturbationFn> perturbations;

    Eigen::Index n() const { return theta.rows(); }
    Eigen::Index m() const { return m_matrix.rows(); }
    Eigen::Index s() const { return c_matrix.cols(); }
    bool unperturbed() const;
};

struct DerivedMatrices {
    RMat v_matrix;  ///< Re Omega
    RMat j_matrix;  ///< 2 Im Omega
    RMat b_matrix;  ///< Theta M^T
    RMat a_matrix;  ///< Theta R + B J M / 2
};

/// Relative tolerance used for every structural check on inputs.
inline constexpr double kStructureTol = 1e-12;

/// Validate dimensions and structure, then symmetrize the inputs so that
/// downstream code sees exact (anti)symmetry. Throws ConfigError.
SystemSpec make_system(RMat theta, RMat r_matrix, RMat m_matrix, CMat omega, RMat c_matrix,
                       std::vector<PerturbationFn> perturbations);

/// Parse a JSON configuration file. Throws ConfigError on parse failure,
/// dimension mismatch or invariant violation.
SystemSpec load_system(const std::filesystem::path& path);

/// Split a Hermitian Ito matrix into V = Re Omega and J = 2 Im Omega.
std::pair<RMat, RMat> ito_decompose(const CMat& omega);

DerivedMatrices derive_structure(const SystemSpec& spec);

struct ConditionReport {
    bool n_even = false;
    bool theta_nonsingular = false;
    bool pi_positive_definite = false;
    double det_theta = 0.0;
    double min_eig_pi = 0.0;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

/// Diagnose the standing assumptions of the exponential-moment machinery:
/// n even, det Theta != 0, Pi > 0. Never throws for well-shaped input.
ConditionReport validate_conditions(const RMat& theta, const RMat& pi);
ConditionReport validate_conditions(const SystemSpec& spec, const RMat& pi);

/// Vacuum-field Ito matrix I_m + i J/2 with J = I_{m/2} (x) [[0,1],[-1,0]].
CMat vacuum_ito_matrix(Eigen::Index m);

/// Standard symplectic form blockdiag([[0,1],[-1,0]], ...) of order n.
RMat standard_ccr_matrix(Eigen::Index n);

}  // namespace qrsm
