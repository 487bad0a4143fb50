#pragma once

#include <vector>

#include "qrsm/model.hpp"
#include "qrsm/types.hpp"

namespace qrsm {

/// Finite Fock representation of n = 2 * n_modes system variables with a
/// per-mode level cutoff. Basis index digits are the mode occupation numbers,
/// mode 0 most significant.
struct TruncatedSpace {
    int n_modes = 0;
    int cutoff = 0;
    Eigen::Index dim = 0;
    RMat theta;
    RMat transform;             ///< X = transform * (q_1, p_1, q_2, p_2, ...)
    std::vector<CMat> x_ops;    ///< Hermitian system variables
    OpMatrix xx;                ///< xx[j][k] = X_j X_k
    std::vector<Eigen::Index> low_energy;  ///< basis indices with every occupation < low_level_count
    int low_level_count = 0;
    double ccr_defect = 0.0;    ///< max |P([X_j, X_k] - i theta_jk)P| on the low-energy block

    Eigen::Index n() const { return static_cast<Eigen::Index>(x_ops.size()); }
};

/// Truncated annihilation operator on `cutoff` levels.
CMat ladder(int cutoff);

/// Build X with [X, X^T] = i theta below the truncation edge. The standard
/// canonical pairs are mapped to theta by a symplectic Gram-Schmidt
/// congruence, which is the identity for theta = blockdiag([[0,1],[-1,0]]).
TruncatedSpace build_space(int n_modes, int cutoff, const RMat& theta);

/// The block of `op` on the low-energy subspace.
CMat restrict_low(const TruncatedSpace& space, const CMat& op);

/// sum_jk p_jk X_j X_k
CMat quadratic_form(const TruncatedSpace& space, const CMat& p);
CMat quadratic_form(const TruncatedSpace& space, const RMat& p);
/// sum_j u_j X_j
CMat linear_form(const TruncatedSpace& space, const CVec& u);

/// X^T R X / 2 + sum_k phi_k(c_k^T X), each phi_k applied on the spectrum of
/// the Hermitian channel operator.
CMat build_hamiltonian(const TruncatedSpace& space, const RMat& r_matrix, const RMat& c_matrix,
                       const std::vector<PerturbationFn>& perturbations);

CMat vacuum_state(const TruncatedSpace& space);
/// Pure number state with the given occupation per mode.
CMat fock_state(const TruncatedSpace& space, const std::vector<int>& levels);
/// Product of coherent states, renormalized after truncation.
CMat coherent_state(const TruncatedSpace& space, const std::vector<cplx>& amplitudes);

inline cplx expectation(const CMat& rho, const CMat& op) { return (rho.transpose().array() * op.array()).sum(); }

/// Eigenbasis of a Hermitian xi. In that basis the similarity transformation
/// E_lambda(eta) = exp(-lambda xi) eta exp(lambda xi) is the Hadamard product
/// with exp(-lambda (d_a - d_b)).
class Conjugator {
public:
    explicit Conjugator(const CMat& xi);

    const RVec& eigenvalues() const { return evals_; }
    const CMat& eigenvectors() const { return evecs_; }
    Eigen::Index dim() const { return evals_.size(); }

    CMat to_eigenbasis(const CMat& op) const { return evecs_.adjoint() * op * evecs_; }
    CMat from_eigenbasis(const CMat& op) const { return evecs_ * op * evecs_.adjoint(); }

    /// exp(-lambda (d_a - d_b)); throws if the exponent would overflow.
    RMat weights(double lambda) const;
    CMat apply(double lambda, const CMat& eta) const;
    /// exp(s xi)
    CMat exp_scaled(double s) const;

private:
    RVec evals_;
    CMat evecs_;
};

/// exp(-lambda xi) eta exp(lambda xi)
CMat superop_E(const CMat& xi, double lambda, const CMat& eta);

struct RsmValue {
    double value = 0.0;
    double imag_residual = 0.0;
};

/// Tr(rho exp(X^T Pi X / 2)).
RsmValue rsm_detail(const TruncatedSpace& space, const CMat& rho, const RMat& pi);
double rsm(const TruncatedSpace& space, const CMat& rho, const RMat& pi);

/// xi = X^T Pi X / 2
CMat xi_operator(const TruncatedSpace& space, const RMat& pi);

struct Moments {
    RVec mean;            ///< Re E X
    RMat second;          ///< Re E(X X^T)
};
Moments moments(const TruncatedSpace& space, const CMat& rho);

struct StateDiagnostics {
    double hermitian_residual = 0.0;
    double trace_error = 0.0;
    double min_eigenvalue = 0.0;
};
StateDiagnostics diagnose_state(const CMat& rho);

}  // namespace qrsm
