#include "qrsm/verify.hpp"

#include <cmath>
#include <map>
#include <set>

#include "qrsm/error.hpp"
#include "qrsm/fock_evolution.hpp"
#include "qrsm/fock_space.hpp"
#include "qrsm/quadrature.hpp"
#include "qrsm/spectral.hpp"

namespace qrsm {

namespace {

constexpr double kFdTime = 1e-3;

double low_max(const TruncatedSpace& space, const CMat& op) { return restrict_low(space, op).cwiseAbs().maxCoeff(); }

/// max |a - b| on the low-energy block, relative to max(1, max |b|) there.
double low_relative(const TruncatedSpace& space, const CMat& a, const CMat& b)
{
    return low_max(space, a - b) / std::max(1.0, low_max(space, b));
}

double relative_gap(double l, double r, double floor = 1e-300)
{
    return std::abs(l - r) / std::max({std::abs(l), std::abs(r), floor});
}

CheckResult check(std::string name, std::string description, double residual, double tolerance)
{
    CheckResult c{std::move(name), std::move(description), residual, tolerance, false, false, {}};
    c.passed = std::isfinite(residual) && residual <= tolerance;
    return c;
}

CheckResult skipped(std::string name, std::string description, std::string note)
{
    return {std::move(name), std::move(description), 0.0, 0.0, true, true, std::move(note)};
}

double max_beta_identity_error()
{
    const QuadratureRule rule = gauss_legendre(16, 0.0, 1.0);
    double worst = 0.0;
    for (int j = 0; j <= 4; ++j)
        for (int k = 0; k <= 4; ++k) {
            const double got = rule.integrate([&](double x) { return std::pow(1.0 - x, j) * std::pow(x, k); });
            const double exact = std::tgamma(j + 1.0) * std::tgamma(k + 1.0) / std::tgamma(j + k + 2.0);
            worst = std::max(worst, std::abs(got - exact));
        }
    return worst;
}

}  // namespace

bool VerifyReport::all_passed() const
{
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::vector<std::string> VerifyReport::failed() const
{
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (!c.passed) out.push_back(c.name);
    return out;
}

const CheckResult* VerifyReport::find(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

int default_cutoff(int n_modes) { return n_modes == 1 ? 30 : 12; }

VerifyReport run_verification(const SystemSpec& spec, const VerifyOptions& options)
{
    const auto n = spec.n();
    const int n_modes = static_cast<int>(n / 2);
    const RMat pi0 = options.pi0.size() ? symmetrized(options.pi0) : RMat(0.2 * RMat::Identity(n, n));
    if (!(options.horizon > 0.0)) throw InvariantError("verify", "horizon must be positive");
    if (options.bound_points < 2) throw InvariantError("verify", "need at least two bound points");

    VerifyReport report;
    report.cutoff = options.cutoff > 0 ? options.cutoff : default_cutoff(n_modes);
    const DerivedMatrices derived = derive_structure(spec);
    const TruncatedSpace space = build_space(n_modes, report.cutoff, spec.theta);
    report.dim = space.dim;
    auto& out = report.checks;

    out.push_back(check("quadrature_beta", "Gauss-Legendre reproduces Euler Beta integrals, j, k <= 4",
                        max_beta_identity_error(), 1e-12));
    out.push_back(check("ccr", "[X, X^T] = i Theta on the low-energy block", space.ccr_defect, 1e-10));

    // Spectral side at Pi_0.
    const SpectralFactorization fact = spectral_factorize(spec.theta, pi0);
    const CMat gamma = gamma_matrix(fact, pi0, derived.b_matrix, spec.omega, spec.m_matrix);
    out.push_back(check("spectral_reconstruction", "eigen-data of Theta Pi reproduce i Theta Pi",
                        fact.reconstruction_residual, 1e-10));
    out.push_back(check("gamma_hermitian", "Gamma is Hermitian", relative_hermitian_residual(gamma), 1e-10));
    const CMat gamma_q = gamma_matrix_quadrature(fact, pi0, derived.b_matrix, spec.omega, spec.m_matrix,
                                                 centered_rule(64));
    out.push_back(check("gamma_quadrature", "closed-form Gamma against 64-node quadrature",
                        (gamma - gamma_q).norm() / std::max(1.0, gamma_q.norm()), 1e-8));

    // Conjugation by exp(xi) acts linearly on X.
    const CMat xi = xi_operator(space, pi0);
    const Conjugator conj(xi);
    {
        double worst = 0.0;
        for (double lambda : {-0.5, -0.25, 0.25, 0.5}) {
            const CMat k = k_lambda(fact, lambda);
            for (Eigen::Index j = 0; j < n; ++j)
                worst = std::max(worst, low_relative(space, conj.apply(lambda, space.x_ops[static_cast<std::size_t>(j)]),
                                                     linear_form(space, k.row(j).transpose())));
        }
        out.push_back(check("conjugation_linear", "exp(-l xi) X exp(l xi) = K_l X on the low-energy block", worst, 1e-6));
    }

    // Drift and dispersion of xi against the generator.
    const CMat hamiltonian = build_hamiltonian(space, spec.r_matrix, spec.c_matrix, spec.perturbations);
    const LindbladGenerator gen(space, spec, hamiltonian);
    const XiDrift drift = xi_drift_dispersion(space, spec, derived, pi0);
    {
        double worst = low_relative(space, gen.heisenberg(xi), drift.f);
        const auto disp = gen.dispersion(xi);
        for (std::size_t k = 0; k < disp.size(); ++k) worst = std::max(worst, low_relative(space, disp[k], drift.g[k]));
        // Commutators with a non-quadratic phi(c^T X) are only exact away from
        // the truncation edge, so those systems get a truncation-limited tolerance.
        bool quadratic_hamiltonian = true;
        for (const auto& phi : spec.perturbations)
            if (!phi.is_zero() && phi.kind() != PerturbationFn::Kind::quadratic) quadratic_hamiltonian = false;
        auto c = check("xi_drift_dispersion", "drift f and dispersion g of xi match the generator", worst,
                       quadratic_hamiltonian ? 1e-8 : 1e-5);
        if (!quadratic_hamiltonian) c.note = "non-quadratic perturbation: tolerance limited by truncation";
        out.push_back(c);
    }

    // Rate process and its Ito quadratic form.
    const RateProcessResult rate = rate_process(space, xi, drift.f, drift.g, spec.omega, options.quad_nodes, options.exec);
    out.push_back(check("rate_self_adjoint", "rate process alpha and beta are self-adjoint",
                        std::max(rate.alpha_hermitian_residual, rate.beta_hermitian_residual), 1e-8));
    out.push_back(check("ito_quadratic_form", "nested Ito integral equals X^T Gamma X",
                        low_relative(space, rate.ito_part, quadratic_form(space, gamma)), 1e-6));

    const OpMatrix k_quad = k_xxt_quadrature(space, pi0, options.quad_nodes, options.exec);
    const OpMatrix k_spec = k_xxt_spectral(space, fact);
    {
        double scale = 1.0;
        for (const auto& row : k_spec)
            for (const auto& e : row) scale = std::max(scale, low_max(space, e));
        out.push_back(check("k_xxt_quadrature", "int E_l(X X^T) dl equals K(X X^T)",
                            low_energy_distance(space, k_quad, k_spec) / scale, 1e-6));
    }

    // Perturbation terms.
    const OpMatrix q = perturbation_Q(space, spec, fact, options.quad_nodes, options.exec);
    const OpMatrix t_matrix = perturbation_T(space, spec, q);
    {
        double worst = 0.0;
        const OpMatrix td = dagger(t_matrix);
        for (std::size_t j = 0; j < td.size(); ++j)
            for (std::size_t l = 0; l < td.size(); ++l) {
                const CMat& ref = t_matrix[j][l];
                worst = std::max(worst, (td[j][l] - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff()));
            }
        out.push_back(check("T_hermitian", "T^dagger = T", worst, 1e-8));
    }
    bool quadratic_only = !spec.unperturbed();
    for (const auto& phi : spec.perturbations)
        if (!phi.is_zero() && phi.kind() != PerturbationFn::Kind::quadratic) quadratic_only = false;
    if (quadratic_only) {
        const OpMatrix q_closed = quadratic_Q(spec, k_spec);
        double scale = 1.0;
        for (const auto& row : q_closed)
            for (const auto& e : row) scale = std::max(scale, low_max(space, e));
        out.push_back(check("quadratic_q_closed_form", "Q = diag(gamma) C^T K(X X^T) for quadratic perturbations",
                            low_energy_distance(space, q, q_closed) / scale, 1e-8));
    } else {
        out.push_back(skipped("quadratic_q_closed_form", "Q = diag(gamma) C^T K(X X^T) for quadratic perturbations",
                              "needs nonzero quadratic perturbations only"));
    }

    // Class condition T <= sigma K(X X^T) by sampling.
    const SuperpositivitySampler sampler(space, t_matrix, k_spec, options.samples, options.seed);
    report.sigma = estimate_sigma(sampler);
    {
        auto c = check("superpositivity_class", "sampled T <= sigma K(X X^T) certified for some sigma in [0, 4]",
                       std::max(0.0, -report.sigma.margin), 1e-8);
        c.note = "sigma = " + std::to_string(report.sigma.sigma) + (report.sigma.certified ? " (certified)" : " (best margin, not certified)");
        out.push_back(c);
    }

    // Time evolution: one master-equation run on the union of all grids.
    CharacteristicOptions copt;
    copt.output_intervals = 10 * (options.bound_points - 1);
    CharacteristicTrajectory traj = integrate_characteristic(spec, derived, pi0, report.sigma.sigma, options.horizon, copt);

    const CMat rho0 = options.coherent_amplitude != 0.0
                          ? coherent_state(space, std::vector<cplx>(static_cast<std::size_t>(n_modes), options.coherent_amplitude))
                          : vacuum_state(space);
    std::vector<double> bound_times;
    for (std::size_t k = 0; k < traj.size(); k += 10) bound_times.push_back(traj.times[k]);
    const std::vector<double> rate_times{0.25 * options.horizon, 0.5 * options.horizon, 0.75 * options.horizon};
    std::set<double> grid(bound_times.begin(), bound_times.end());
    grid.insert(0.0);
    for (double t : rate_times) grid.insert({t - kFdTime, t, t + kFdTime});
    const std::vector<double> t_grid(grid.begin(), grid.end());
    const auto states = evolve_state(gen, rho0, t_grid);
    std::map<double, CMat> state_at;
    for (std::size_t k = 0; k < t_grid.size(); ++k) state_at.emplace(t_grid[k], states[k]);

    {
        double worst = 0.0;
        for (std::size_t k = 0; k < t_grid.size(); ++k) {
            const auto d = diagnose_state(states[k]);
            const double allowed = 1e-9 * std::max(1.0, t_grid[k]);
            worst = std::max({worst, d.hermitian_residual / allowed, d.trace_error / allowed,
                              std::max(0.0, -d.min_eigenvalue) / 1e-10});
        }
        out.push_back(check("state_validity", "evolved states stay Hermitian, unit-trace and positive (scaled)", worst, 1.0));
    }

    // Rate process against dXi/dt at three times.
    {
        const CMat e_half = conj.exp_scaled(0.5);
        const CMat sandwich = e_half * rate.alpha * e_half;
        double worst = 0.0;
        for (double t : rate_times) {
            const double fd = (rsm(space, state_at.at(t + kFdTime), pi0) - rsm(space, state_at.at(t - kFdTime), pi0)) /
                              (2.0 * kFdTime);
            const double rate_value = expectation(state_at.at(t), sandwich).real();
            worst = std::max(worst, relative_gap(fd, rate_value));
        }
        out.push_back(check("rate_expectation", "dXi/dt equals E(exp(xi/2) alpha exp(xi/2))", worst, 1e-2));
    }

    // N against Xi and its Pi-gradient, initial state and one evolved state.
    {
        double worst_im = 0.0, worst_re = 0.0, worst_herm = 0.0;
        for (const CMat* rho : {&state_at.at(0.0), &state_at.at(rate_times[1])}) {
            const CMat nm = matrix_N(space, *rho, pi0, options.quad_nodes);
            const double xi_val = rsm(space, *rho, pi0);
            const RMat grad = rsm_gradient_fd(space, *rho, pi0);
            worst_im = std::max(worst_im, (nm.imag() - 0.5 * xi_val * spec.theta).cwiseAbs().maxCoeff() / std::max(1.0, xi_val));
            worst_re = std::max(worst_re, (nm.real() - 2.0 * grad).norm() / std::max(1e-300, (2.0 * grad).norm()));
            worst_herm = std::max(worst_herm, relative_hermitian_residual(nm));
        }
        out.push_back(check("n_matrix_imag", "Im N = Xi Theta / 2", worst_im, 1e-6));
        out.push_back(check("n_matrix_real", "Re N = 2 dXi/dPi (central differences)", worst_re, 1e-3));
        out.push_back(check("n_matrix_hermitian", "N is Hermitian", worst_herm, 1e-10));
    }

    // First-order PDE for Xi at t = 0.
    {
        const DriftCorrection dc = drift_correction(fact, options.gamma_scale * gamma);
        const CMat& rho = state_at.at(0.0);
        const CMat e_xi = conj.exp_scaled(1.0);
        const double lhs = expectation(gen.predual(rho), e_xi).real();
        const double xi_val = rsm(space, rho, pi0);
        const RMat grad = rsm_gradient_fd(space, rho, pi0);
        const RMat a = derived.a_matrix;
        double rhs = frob(RMat(a.transpose() * pi0 + pi0 * a + 2.0 * dc.y_matrix), grad) +
                     (drift.tau_const + 0.5 * frob(dc.u_matrix, spec.theta)) * xi_val;
        if (!spec.unperturbed()) rhs += 0.5 * frob(pi0, RMat(sandwiched_expectation(space, rho, pi0, t_matrix).real()));
        out.push_back(check("rsm_pde_residual", "Lindblad dXi/dt against the first-order PDE at t = 0", relative_gap(lhs, rhs), 2e-2));
    }

    // Section V bounds on every produced state.
    {
        double worst43 = 0.0, worst_mom = 0.0;
        for (const auto& rho : states) {
            const double xi_val = rsm(space, rho, pi0);
            const double lower = small_pi_expansion(pi0, moments(space, rho).second);
            worst43 = std::max(worst43, (lower - xi_val) / xi_val);
            const CMat rho_eig = conj.to_eigenbasis(rho);
            double fact_r = 1.0;
            for (int r = 1; r <= 4; ++r) {
                fact_r *= r;
                double moment = 0.0;
                for (Eigen::Index a = 0; a < conj.dim(); ++a)
                    moment += std::pow(conj.eigenvalues()(a), r) * rho_eig(a, a).real();
                worst_mom = std::max(worst_mom, (moment - fact_r * xi_val) / xi_val);
            }
        }
        out.push_back(check("small_pi_lower_bound", "Xi >= 1 + <Pi, Re E(X X^T)>/2 (relative excess)", std::max(0.0, worst43), 1e-12));
        out.push_back(check("moment_bounds", "E(xi^r) <= r! Xi, r <= 4 (relative excess)", std::max(0.0, worst_mom), 1e-12));
    }

    // Oracle RSM along the characteristic against the Gronwall bound.
    {
        std::string note = "sigma = " + std::to_string(report.sigma.sigma) + ", characteristic " + to_string(traj.status);
        double worst = std::numeric_limits<double>::infinity();
        if (traj.status == CharacteristicTrajectory::Status::completed) {
            traj = gronwall_bound(std::move(traj), rsm(space, rho0, pi0));
            worst = 0.0;
            for (std::size_t k = 0; k < traj.size(); k += 10) {
                const double oracle = rsm(space, state_at.at(traj.times[k]), traj.pi_path[k]);
                worst = std::max(worst, oracle / traj.bound_path[k]);
            }
        }
        auto c = check("gronwall_bound", "oracle Xi(t) <= 1.05 x Gronwall bound on the output grid", worst, 1.05);
        c.note = note;
        out.push_back(c);
    }
    return report;
}

}  // namespace qrsm
