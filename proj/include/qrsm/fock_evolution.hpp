#pragma once

#include <vector>

#include "qrsm/fock_space.hpp"
#include "qrsm/model.hpp"
#include "qrsm/ode.hpp"

namespace qrsm {

/// Generator of the open dynamics with coupling h = M X and Ito matrix Omega.
///
/// Heisenberg form, for a system operator zeta:
///     F(zeta) = i[H, zeta] + sum_jk omega_jk (h_j zeta h_k - {h_j h_k, zeta}/2)
/// Its predual with respect to Tr(rho .) acts on density matrices:
///     rho' = -i[H, rho] + sum_jk omega_jk (h_k rho h_j - {h_j h_k, rho}/2)
/// Both are evaluated as K rho + rho K^* + sum_j L_j rho h_j with
/// K = -(iH + G/2), G = sum_jk omega_jk h_j h_k, L_j = sum_k omega_jk h_k.
class LindbladGenerator {
public:
    LindbladGenerator(const TruncatedSpace& space, const SystemSpec& spec, const CMat& hamiltonian);

    CMat predual(const CMat& rho) const;
    CMat heisenberg(const CMat& zeta) const;

    /// -i[zeta, h_k], the dispersion coefficient of zeta along dW_k.
    std::vector<CMat> dispersion(const CMat& zeta) const;

    const CMat& hamiltonian() const { return h_; }

private:
    CMat h_;
    CMat k_;
    std::vector<CMat> coupling_;  ///< h_j
    std::vector<CMat> mixed_;     ///< L_j
};

struct EvolutionOptions {
    StepControl step{1e-10, 1e-12, 1e-3, 1e-12, 10'000'000};
};

/// States at every point of t_grid (increasing, starting at 0).
std::vector<CMat> evolve_state(const LindbladGenerator& gen, const CMat& rho0, const std::vector<double>& t_grid,
                               const EvolutionOptions& options = {});

/// Same, with the generator built from the system's full Hamiltonian.
std::vector<CMat> evolve_state(const TruncatedSpace& space, const SystemSpec& spec, const CMat& rho0,
                               const std::vector<double>& t_grid, const EvolutionOptions& options = {});

}  // namespace qrsm
