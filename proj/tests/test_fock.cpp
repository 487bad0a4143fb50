#include <algorithm>

#include "doctest.h"
#include "support.hpp"

#include "qrsm/fock_evolution.hpp"
#include "qrsm/fock_space.hpp"
#include "qrsm/spectral.hpp"

using namespace qrsm;
using namespace qrsm::test;

namespace {

double low_max(const TruncatedSpace& space, const CMat& op) { return max_abs(restrict_low(space, op)); }

/// Re E(X X^T) along P' = A P + P A^T + B V B^T, classical RK4 with a fixed step.
RMat lyapunov_reference(const RMat& a, const RMat& q, RMat p, double t, int steps = 2000)
{
    const double h = t / steps;
    auto f = [&](const RMat& x) -> RMat { return a * x + x * a.transpose() + q; };
    for (int s = 0; s < steps; ++s) {
        const RMat k1 = f(p), k2 = f(p + 0.5 * h * k1), k3 = f(p + 0.5 * h * k2), k4 = f(p + h * k3);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return p;
}

}  // namespace

TEST_CASE("ladder commutator at the smallest cutoff")
{
    const CMat a = ladder(2);
    CHECK(a(0, 1) == cplx(1.0));
    const CMat comm = a * a.adjoint() - a.adjoint() * a;
    CHECK(max_abs(comm - CMat((CVec(2) << 1.0, -1.0).finished().asDiagonal())) == 0.0);
    const CMat a5 = ladder(5);
    CHECK(std::abs(a5(3, 4) - 2.0) < 1e-15);
}

TEST_CASE("standard CCR needs no congruence")
{
    const auto space = build_space(1, 30, theta2());
    CHECK(space.dim == 30);
    CHECK(space.low_level_count == 18);
    CHECK(space.low_energy.size() == 18);
    CHECK(max_abs(space.transform - RMat::Identity(2, 2)) == 0.0);
    CHECK(space.ccr_defect < 1e-12);

    const auto two = build_space(2, 6, standard_ccr_matrix(4));
    CHECK(two.dim == 36);
    CHECK(two.low_energy.size() == 9);
    CHECK(max_abs(two.transform - RMat::Identity(4, 4)) == 0.0);
}

TEST_CASE("projected CCR for a non-standard Theta")
{
    std::mt19937_64 rng(43);
    const RMat theta = random_theta(rng, 4);
    const auto space = build_space(2, 8, theta);
    CHECK(space.ccr_defect < 1e-10);
    for (Eigen::Index j = 0; j < 4; ++j)
        for (Eigen::Index k = 0; k < 4; ++k) {
            const auto& xj = space.x_ops[static_cast<std::size_t>(j)];
            const auto& xk = space.x_ops[static_cast<std::size_t>(k)];
            const CMat comm = xj * xk - xk * xj - kI * theta(j, k) * CMat::Identity(space.dim, space.dim);
            CHECK(low_max(space, comm) < 1e-10);
            CHECK(max_abs(space.xx[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] - xj * xk) == 0.0);
        }
    for (const auto& x : space.x_ops) CHECK(hermitian_residual(x) == 0.0);
}

TEST_CASE("oscillator Hamiltonian has levels k + 1/2")
{
    const auto space = build_space(1, 30, theta2());
    const CMat h = build_hamiltonian(space, RMat::Identity(2, 2), RMat(2, 0), {});
    for (Eigen::Index k = 0; k < 29; ++k) CHECK(std::abs(h(k, k) - (k + 0.5)) < 1e-12);
    CHECK(low_max(space, h - CMat(h.diagonal().asDiagonal())) < 1e-12);
}

TEST_CASE("quadratic perturbation equals the shifted energy matrix")
{
    const auto space = build_space(1, 20, theta2());
    const RMat c = (RMat(2, 1) << 0.8, -0.3).finished();
    const double gamma = 0.4;
    const CMat h = build_hamiltonian(space, RMat::Identity(2, 2), c, {PerturbationFn::quadratic(gamma)});
    const CMat expected = 0.5 * quadratic_form(space, RMat(RMat::Identity(2, 2) + gamma * c * c.transpose()));
    CHECK(max_abs(h - expected) < 1e-11);

    const CMat hs = build_hamiltonian(space, RMat::Identity(2, 2), c, {PerturbationFn::sinusoid(0.1, 1.0)});
    CHECK(hermitian_residual(hs) < 1e-12);
}

TEST_CASE("vacuum and number-state RSM")
{
    const auto space = build_space(1, 30, theta2());
    const RMat pi = 0.2 * RMat::Identity(2, 2);
    CHECK(std::abs(rsm(space, vacuum_state(space), pi) - std::exp(0.1)) < 1e-12);
    CHECK(std::abs(rsm(space, fock_state(space, {1}), pi) - std::exp(0.3)) < 1e-12);
    CHECK(rsm_detail(space, vacuum_state(space), pi).imag_residual < 1e-15);

    const auto two = build_space(2, 8, standard_ccr_matrix(4));
    CHECK(std::abs(rsm(two, vacuum_state(two), 0.2 * RMat::Identity(4, 4)) - std::exp(0.2)) < 1e-12);
    CHECK(std::abs(rsm(two, fock_state(two, {0, 2}), 0.2 * RMat::Identity(4, 4)) - std::exp(0.6)) < 1e-12);
}

TEST_CASE("coherent state moments")
{
    const auto space = build_space(1, 40, theta2());
    const cplx alpha(0.6, -0.3);
    const CMat rho = coherent_state(space, {alpha});
    const auto d = diagnose_state(rho);
    CHECK(d.trace_error < 1e-14);
    CHECK(d.min_eigenvalue > -1e-14);
    const Moments m = moments(space, rho);
    CHECK(m.mean(0) == doctest::Approx(std::sqrt(2.0) * alpha.real()).epsilon(1e-10));
    CHECK(m.mean(1) == doctest::Approx(std::sqrt(2.0) * alpha.imag()).epsilon(1e-10));
    const RMat cov = m.second - m.mean * m.mean.transpose();
    CHECK(max_abs(cov - 0.5 * RMat::Identity(2, 2)) < 1e-10);
}

TEST_CASE("similarity transformation by exp(xi)")
{
    const auto space = build_space(1, 12, theta2());
    const CMat xi = xi_operator(space, 0.2 * RMat::Identity(2, 2));
    const Conjugator conj(xi);
    std::mt19937_64 rng(47);
    const CMat eta = random_complex(rng, 12, 12), zeta = random_complex(rng, 12, 12);

    for (double l : {-0.5, 0.3}) {
        const CMat ref = taylor_expm(CMat(-l * xi)) * eta * taylor_expm(CMat(l * xi));
        CHECK(max_abs(conj.apply(l, eta) - ref) < 1e-10 * max_abs(ref));
        CHECK(max_abs(superop_E(xi, l, eta) - ref) < 1e-10 * max_abs(ref));
    }
    CHECK(max_abs(conj.apply(0.2, conj.apply(0.1, eta)) - conj.apply(0.3, eta)) < 1e-10 * max_abs(eta));
    const CMat prod = conj.apply(0.4, eta) * conj.apply(0.4, zeta);
    CHECK(max_abs(conj.apply(0.4, eta * zeta) - prod) < 1e-10 * max_abs(prod));
    CHECK(max_abs(conj.exp_scaled(1.0) - taylor_expm(xi)) < 1e-10 * max_abs(taylor_expm(xi)));
}

TEST_CASE("conjugation acts linearly on X through K_lambda")
{
    const auto space = build_space(1, 30, theta2());
    const RMat pi = 0.2 * RMat::Identity(2, 2);
    const Conjugator conj(xi_operator(space, pi));
    const auto fact = spectral_factorize(theta2(), pi);
    for (double l : {-0.5, 0.25, 0.5}) {
        const CMat k = k_lambda(fact, l);
        for (Eigen::Index j = 0; j < 2; ++j) {
            const CMat lhs = conj.apply(l, space.x_ops[static_cast<std::size_t>(j)]);
            CHECK(low_max(space, lhs - linear_form(space, k.row(j).transpose())) < 1e-6);
        }
    }
}

TEST_CASE("decoupled oscillator leaves its ground state alone")
{
    const auto space = build_space(1, 20, theta2());
    const SystemSpec spec = decoupled();
    const auto states = evolve_state(space, spec, vacuum_state(space), {0.0, 0.5, 1.0});
    for (const auto& rho : states) CHECK(max_abs(rho - vacuum_state(space)) < 1e-10);
}

TEST_CASE("coherent mean follows exp(A t)")
{
    const auto space = build_space(1, 30, theta2());
    const SystemSpec spec = single_mode();
    const DerivedMatrices d = derive_structure(spec);
    const CMat rho0 = coherent_state(space, {cplx(1.0, 0.0)});
    const std::vector<double> grid{0.0, 0.25, 0.5, 1.0};
    const auto states = evolve_state(space, spec, rho0, grid);
    const RVec mean0 = moments(space, rho0).mean;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const RVec expected = taylor_expm(RMat(grid[k] * d.a_matrix)) * mean0;
        CHECK((moments(space, states[k]).mean - expected).cwiseAbs().maxCoeff() < 1e-3);
        const auto diag = diagnose_state(states[k]);
        CHECK(diag.trace_error < 1e-9);
        CHECK(diag.hermitian_residual < 1e-9);
    }
}

TEST_CASE("second moments obey the Lyapunov equation")
{
    const auto space = build_space(1, 30, theta2());
    const SystemSpec spec = single_mode();
    const DerivedMatrices d = derive_structure(spec);
    const CMat rho0 = vacuum_state(space);
    const RMat p0 = moments(space, rho0).second;
    CHECK(max_abs(p0 - 0.5 * RMat::Identity(2, 2)) < 1e-14);
    const RMat q = d.b_matrix * d.v_matrix * d.b_matrix.transpose();
    const auto states = evolve_state(space, spec, rho0, {0.0, 0.5, 1.0});
    CHECK(max_abs(moments(space, states[1]).second - lyapunov_reference(d.a_matrix, q, p0, 0.5)) < 1e-6);
    CHECK(max_abs(moments(space, states[2]).second - lyapunov_reference(d.a_matrix, q, p0, 1.0)) < 1e-6);
}

TEST_CASE("predual and Heisenberg forms are dual")
{
    std::mt19937_64 rng(53);
    const auto space = build_space(1, 10, theta2());
    const SystemSpec spec = quadratic_demo(0.3);
    const LindbladGenerator gen(space, spec, build_hamiltonian(space, spec.r_matrix, spec.c_matrix, spec.perturbations));
    const CMat z = random_complex(rng, 10, 10);
    const CMat rho = z * z.adjoint() / (z * z.adjoint()).trace();
    const CMat zeta = random_complex(rng, 10, 10);
    CHECK(std::abs(expectation(gen.predual(rho), zeta) - expectation(rho, gen.heisenberg(zeta))) < 1e-10);
    CHECK(std::abs(gen.predual(rho).trace()) < 1e-12);
    CHECK(max_abs(gen.heisenberg(CMat::Identity(10, 10))) < 1e-12);
}
