#include "doctest.h"
#include "support.hpp"

#include "qrsm/fock_evolution.hpp"
#include "qrsm/fock_rate.hpp"

using namespace qrsm;
using namespace qrsm::test;

namespace {

double low_max(const TruncatedSpace& space, const CMat& op) { return max_abs(restrict_low(space, op)); }

std::size_t u(Eigen::Index i) { return static_cast<std::size_t>(i); }

OpMatrix zero_t(const TruncatedSpace& space)
{
    const auto n = u(space.n());
    return OpMatrix(n, std::vector<CMat>(n, CMat::Zero(space.dim, space.dim)));
}

}  // namespace

TEST_CASE("dispersion of xi for the single-mode demo at Pi = I")
{
    const auto space = build_space(1, 20, theta2());
    const SystemSpec spec = single_mode();
    const XiDrift d = xi_drift_dispersion(space, spec, derive_structure(spec), RMat::Identity(2, 2));
    REQUIRE(d.g.size() == 2);
    CHECK(low_max(space, d.g[0] + space.x_ops[1]) < 1e-12);
    CHECK(low_max(space, d.g[1] - space.x_ops[0]) < 1e-12);
    CHECK(d.tau_const == doctest::Approx(1.0));
}

TEST_CASE("drift and dispersion of xi agree with the generator")
{
    std::mt19937_64 rng(59);
    const SystemSpec spec = random_system(rng, 4, 2);
    const auto space = build_space(2, 10, spec.theta);
    const RMat pi = random_spd(rng, 4);
    const CMat xi = xi_operator(space, pi);
    const LindbladGenerator gen(space, spec, build_hamiltonian(space, spec.r_matrix, spec.c_matrix, spec.perturbations));
    const XiDrift d = xi_drift_dispersion(space, spec, derive_structure(spec), pi);
    const CMat f_gen = gen.heisenberg(xi);
    CHECK(low_max(space, f_gen - d.f) < 1e-8 * low_max(space, f_gen));
    const auto g_gen = gen.dispersion(xi);
    for (std::size_t k = 0; k < g_gen.size(); ++k) CHECK(low_max(space, g_gen[k] - d.g[k]) < 1e-8 * low_max(space, g_gen[k]));
}

TEST_CASE("rate process vanishes with zero drift and dispersion")
{
    const auto space = build_space(1, 12, theta2());
    const CMat xi = xi_operator(space, 0.2 * RMat::Identity(2, 2));
    const CMat zero = CMat::Zero(12, 12);
    const auto r = rate_process(space, xi, zero, {zero, zero}, vacuum_ito_matrix(2), 16);
    CHECK(max_abs(r.alpha) == 0.0);
    for (const auto& b : r.beta) CHECK(max_abs(b) == 0.0);
    CHECK_THROWS(rate_process(space, xi, zero, {zero, zero}, vacuum_ito_matrix(2), 8));
}

TEST_CASE("rate process of the single-mode demo is self-adjoint")
{
    const auto space = build_space(1, 30, theta2());
    const SystemSpec spec = single_mode();
    const RMat pi = 0.2 * RMat::Identity(2, 2);
    const XiDrift d = xi_drift_dispersion(space, spec, derive_structure(spec), pi);
    const auto r = rate_process(space, xi_operator(space, pi), d.f, d.g, spec.omega, 32, Exec::serial);
    CHECK(r.alpha_hermitian_residual < 1e-8);
    CHECK(r.beta_hermitian_residual < 1e-8);
    CHECK(r.outer_nodes == 32);
}

TEST_CASE("N is Hermitian with imaginary part Xi Theta / 2")
{
    const auto space = build_space(1, 30, theta2());
    const RMat pi = 0.2 * RMat::Identity(2, 2);
    for (const CMat& rho : {vacuum_state(space), coherent_state(space, {cplx(0.5, 0.2)})}) {
        const CMat nm = matrix_N(space, rho, pi, 32);
        const double xi = rsm(space, rho, pi);
        CHECK(relative_hermitian_residual(nm) < 1e-10);
        CHECK(max_abs(RMat(nm.imag() - 0.5 * xi * theta2())) < 1e-6);
        const RMat grad = rsm_gradient_fd(space, rho, pi);
        CHECK((nm.real() - 2.0 * grad).norm() < 1e-3 * (2.0 * grad).norm());
    }
}

TEST_CASE("K(X X^T): quadrature and spectral routes agree")
{
    std::mt19937_64 rng(61);
    const RMat theta = random_theta(rng, 4);
    const auto space = build_space(2, 12, theta);
    // A generic Pi squeezes and mixes the modes, so the truncated xi leaks out
    // of the low-energy block; keep Pi small enough for that to stay negligible.
    const RMat pi = random_spd(rng, 4, 0.05) * 0.03;
    const OpMatrix quad = k_xxt_quadrature(space, pi, 32, Exec::serial);
    const OpMatrix spec_route = k_xxt_spectral(space, spectral_factorize(theta, pi));
    CHECK(low_energy_distance(space, quad, spec_route) < 1e-7);
}

TEST_CASE("K(X X^T) of one mode has diagonal c q^2 - s p^2")
{
    // exp(-l xi) q exp(l xi) = cosh(l/5) q + i sinh(l/5) p for xi = (q^2 + p^2)/10,
    // so the diagonal entry integrates to c q^2 - s p^2 with the constants below.
    const auto space = build_space(1, 30, theta2());
    const RMat pi = 0.2 * RMat::Identity(2, 2);
    const OpMatrix k = k_xxt_spectral(space, spectral_factorize(theta2(), pi));
    const double c = 0.5 * (1.0 + std::sinh(0.2) / 0.2);
    const double s = 0.5 * (std::sinh(0.2) / 0.2 - 1.0);
    const CMat q2 = space.xx[0][0], p2 = space.xx[1][1];
    CHECK(low_max(space, k[0][0] - (c * q2 - s * p2)) < 1e-10);
    CHECK(low_max(space, k[1][1] - (c * p2 - s * q2)) < 1e-10);
}

TEST_CASE("superpositivity margin with T = 0")
{
    const auto space = build_space(1, 30, theta2());
    const RMat pi = 0.2 * RMat::Identity(2, 2);
    const OpMatrix k = k_xxt_spectral(space, spectral_factorize(theta2(), pi));
    const SuperpositivitySampler sampler(space, zero_t(space), k, 50, 3);
    CHECK(sampler.samples() == 50);
    CHECK(sampler.margin(0.0) == 0.0);
    const double m1 = sampler.margin(1.0);
    CHECK(m1 < 0.0);
    for (double sigma : {0.5, 2.0, 3.5}) CHECK(sampler.margin(sigma) == doctest::Approx(sigma * m1).epsilon(1e-12));
    const SigmaEstimate est = estimate_sigma(sampler);
    CHECK(est.certified);
    CHECK(est.sigma == 0.0);
    CHECK(superpositivity_margin(space, zero_t(space), k, 1.0, 50, 3) == m1);
}

TEST_CASE("quadratic perturbation: Q closed form and Hermitian T")
{
    const SystemSpec spec = quadratic_demo(0.05);
    const auto space = build_space(1, 30, theta2());
    const RMat pi = 0.2 * RMat::Identity(2, 2);
    const auto fact = spectral_factorize(spec.theta, pi);
    const OpMatrix k = k_xxt_spectral(space, fact);
    const OpMatrix q = perturbation_Q(space, spec, fact, 32);
    CHECK(low_energy_distance(space, q, quadratic_Q(spec, k)) < 1e-10);

    const OpMatrix t = perturbation_T(space, spec, q);
    CHECK(low_energy_distance(space, t, dagger(t)) < 1e-10);

    const RMat l = quadratic_L(spec);
    OpMatrix lk = zero_t(space);
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
            for (Eigen::Index m = 0; m < 2; ++m)
                lk[u(i)][u(j)] += l(i, m) * k[u(m)][u(j)] + l(j, m) * k[u(i)][u(m)];
    CHECK(low_energy_distance(space, t, lk) < 1e-10);
}

TEST_CASE("quadratic demo is not certified superpositive")
{
    const SystemSpec spec = quadratic_demo(0.05);
    const auto space = build_space(1, 30, theta2());
    const RMat pi = 0.2 * RMat::Identity(2, 2);
    const OpMatrix k = k_xxt_spectral(space, spectral_factorize(spec.theta, pi));
    const OpMatrix t = perturbation_T(space, spec, derive_structure(spec), pi, 32);
    const SuperpositivitySampler sampler(space, t, k, 200, 7);
    const SigmaEstimate est = estimate_sigma(sampler);
    CHECK_FALSE(est.certified);
    CHECK(est.margin < 0.0);
    CHECK(est.sigma == doctest::Approx(0.95));
    CHECK(est.margin == doctest::Approx(-0.01405).epsilon(1e-2));
}

TEST_CASE("dagger transposes and takes adjoints")
{
    std::mt19937_64 rng(67);
    OpMatrix a(2, std::vector<CMat>(2));
    for (auto& row : a)
        for (auto& op : row) op = random_complex(rng, 3, 3);
    const OpMatrix d = dagger(a);
    CHECK(max_abs(d[0][1] - a[1][0].adjoint()) == 0.0);
    CHECK(max_abs(dagger(d)[1][0] - a[1][0]) == 0.0);
}
