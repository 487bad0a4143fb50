#include "qrsm/fock_evolution.hpp"

#include "qrsm/error.hpp"

namespace qrsm {

LindbladGenerator::LindbladGenerator(const TruncatedSpace& space, const SystemSpec& spec, const CMat& hamiltonian)
    : h_(hermitized(hamiltonian))
{
    if (spec.n() != space.n() || h_.rows() != space.dim)
        throw InvariantError("fock_oracle", "generator: dimension mismatch");
    const auto m = spec.m();
    for (Eigen::Index j = 0; j < m; ++j)
        coupling_.push_back(hermitized(linear_form(space, spec.m_matrix.row(j).transpose().cast<cplx>())));
    CMat g = CMat::Zero(space.dim, space.dim);
    for (Eigen::Index j = 0; j < m; ++j) {
        CMat l = CMat::Zero(space.dim, space.dim);
        for (Eigen::Index k = 0; k < m; ++k) l += spec.omega(j, k) * coupling_[static_cast<std::size_t>(k)];
        g += coupling_[static_cast<std::size_t>(j)] * l;
        mixed_.push_back(std::move(l));
    }
    k_ = -(kI * h_ + 0.5 * g);
}

CMat LindbladGenerator::predual(const CMat& rho) const
{
    CMat out = k_ * rho + rho * k_.adjoint();
    for (std::size_t j = 0; j < coupling_.size(); ++j) out += mixed_[j] * rho * coupling_[j];
    return out;
}

CMat LindbladGenerator::heisenberg(const CMat& zeta) const
{
    CMat out = k_.adjoint() * zeta + zeta * k_;
    for (std::size_t j = 0; j < coupling_.size(); ++j) out += coupling_[j] * zeta * mixed_[j];
    return out;
}

std::vector<CMat> LindbladGenerator::dispersion(const CMat& zeta) const
{
    std::vector<CMat> out;
    for (const auto& h : coupling_) out.push_back(-kI * (zeta * h - h * zeta));
    return out;
}

std::vector<CMat> evolve_state(const LindbladGenerator& gen, const CMat& rho0, const std::vector<double>& t_grid,
                               const EvolutionOptions& options)
{
    if (t_grid.empty() || t_grid.front() != 0.0) throw InvariantError("fock_oracle", "t_grid must start at 0");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1])) throw InvariantError("fock_oracle", "t_grid must be increasing");

    DormandPrince<CMat> stepper(options.step);
    auto rhs = [&](double, const CMat& rho) -> CMat { return gen.predual(rho); };
    std::vector<CMat> out{rho0};
    CMat rho = rho0;
    double t = 0.0;
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        try {
            stepper.advance(rho, t, t_grid[k], rhs);
        } catch (const StepUnderflow& e) {
            throw InvariantError("fock_oracle", std::string("master equation integration failed: ") + e.what());
        }
        out.push_back(rho);
    }
    return out;
}

std::vector<CMat> evolve_state(const TruncatedSpace& space, const SystemSpec& spec, const CMat& rho0,
                               const std::vector<double>& t_grid, const EvolutionOptions& options)
{
    const LindbladGenerator gen(space, spec,
                                build_hamiltonian(space, spec.r_matrix, spec.c_matrix, spec.perturbations));
    return evolve_state(gen, rho0, t_grid, options);
}

}  // namespace qrsm
