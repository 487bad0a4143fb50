#pragma once

#include <cstdint>
#include <vector>

#include "qrsm/fock_space.hpp"
#include "qrsm/kernels.hpp"
#include "qrsm/model.hpp"
#include "qrsm/spectral.hpp"

namespace qrsm {

/// Drift f and dispersion g of xi = X^T Pi X / 2, written out from the
/// structure matrices (not from the generator), plus the constant tau.
struct XiDrift {
    CMat f;
    std::vector<CMat> g;
    double tau_const = 0.0;
};
XiDrift xi_drift_dispersion(const TruncatedSpace& space, const SystemSpec& spec, const DerivedMatrices& derived,
                            const RMat& pi);

/// Rate process alpha and the noise coefficients beta of the exponential
/// exp(xi), by Gauss-Legendre quadrature (outer x inner nodes for the nested
/// Ito term).
struct RateProcessResult {
    CMat alpha;
    CMat ito_part;  ///< the nested double integral alone
    std::vector<CMat> beta;
    std::size_t outer_nodes = 0;
    std::size_t inner_nodes = 0;
    double alpha_hermitian_residual = 0.0;  ///< relative
    double beta_hermitian_residual = 0.0;   ///< relative, worst entry
};
RateProcessResult rate_process(const TruncatedSpace& space, const CMat& xi_op, const CMat& f,
                               const std::vector<CMat>& g, const CMat& omega, std::size_t quad_nodes,
                               Exec exec = Exec::parallel);

/// E(exp(xi/2) A exp(xi/2)) for every entry of an operator matrix.
CMat sandwiched_expectation(const TruncatedSpace& space, const CMat& rho, const RMat& pi, const OpMatrix& ops);

/// N = E(exp(xi/2) int E_l(X X^T) dl exp(xi/2)).
CMat matrix_N(const TruncatedSpace& space, const CMat& rho, const RMat& pi, std::size_t quad_nodes);

/// Central differences of the RSM along (E_jk + E_kj)/2.
RMat rsm_gradient_fd(const TruncatedSpace& space, const CMat& rho, const RMat& pi, double step = 1e-4);

/// int E_l(X_j X_k) dl by quadrature.
OpMatrix k_xxt_quadrature(const TruncatedSpace& space, const RMat& pi, std::size_t quad_nodes,
                          Exec exec = Exec::parallel);
/// The same through the Hadamard representation of the spectral calculus.
OpMatrix k_xxt_spectral(const TruncatedSpace& space, const SpectralFactorization& fact);

/// Q_kj = int phi_k'(c_k^T K_l X) (K_l X)_j dl  (s x n operators)
OpMatrix perturbation_Q(const TruncatedSpace& space, const SystemSpec& spec, const SpectralFactorization& fact,
                        std::size_t quad_nodes, Exec exec = Exec::parallel);
/// T = Theta C Q - Q^dagger C^T Theta
OpMatrix perturbation_T(const TruncatedSpace& space, const SystemSpec& spec, const OpMatrix& q);
OpMatrix perturbation_T(const TruncatedSpace& space, const SystemSpec& spec, const DerivedMatrices& derived,
                        const RMat& pi, std::size_t quad_nodes, Exec exec = Exec::parallel);
/// Quadratic kinds only: Q = diag(gamma) C^T K(X X^T), hence T = L K + K L^T
/// with L = Theta C diag(gamma) C^T.
OpMatrix quadratic_Q(const SystemSpec& spec, const OpMatrix& k_xxt);
RMat quadratic_L(const SystemSpec& spec);

/// Transpose of the entrywise adjoint.
OpMatrix dagger(const OpMatrix& ops);
/// max over entries of the max-abs difference on the low-energy block.
double low_energy_distance(const TruncatedSpace& space, const OpMatrix& a, const OpMatrix& b);

/// Sampled test of T <= sigma K(X X^T): min over random unit u of the smallest
/// eigenvalue of u^*(sigma K - T)u on the low-energy block. The sample set is
/// drawn once from the seed, so margins for different sigma are comparable.
class SuperpositivitySampler {
public:
    SuperpositivitySampler(const TruncatedSpace& space, const OpMatrix& t_matrix, const OpMatrix& k_xxt,
                           std::size_t n_samples, std::uint64_t seed);

    double margin(double sigma, Exec exec = Exec::parallel) const;
    std::size_t samples() const { return k_u_.size(); }

private:
    std::vector<CMat> k_u_;
    std::vector<CMat> t_u_;
};

double superpositivity_margin(const TruncatedSpace& space, const OpMatrix& t_matrix, const OpMatrix& k_xxt,
                              double sigma, std::size_t n_samples, std::uint64_t seed, Exec exec = Exec::parallel);

/// Smallest sigma with sampled margin >= -tol: scanned on a uniform grid
/// over [0, sigma_max], then bisected. If no grid point qualifies, the grid
/// point with the largest margin is returned with certified = false.
struct SigmaEstimate {
    double sigma = 0.0;
    double margin = 0.0;
    bool certified = false;
};
SigmaEstimate estimate_sigma(const SuperpositivitySampler& sampler, double tol = 1e-8, double sigma_max = 4.0,
                             std::size_t grid_intervals = 80);

}  // namespace qrsm
