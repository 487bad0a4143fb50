#include "qrsm/fock_rate.hpp"

#include <cmath>
#include <random>

#include "qrsm/dynamics.hpp"
#include "qrsm/error.hpp"

namespace qrsm {

namespace {

constexpr double kExpLimit = 700.0;

std::size_t idx(Eigen::Index i) { return static_cast<std::size_t>(i); }

OpMatrix zero_ops(std::size_t rows, std::size_t cols, Eigen::Index dim)
{
    return OpMatrix(rows, std::vector<CMat>(cols, CMat::Zero(dim, dim)));
}

// exp(xi/2) rho exp(xi/2) expressed in the eigenbasis of xi.
CMat sandwiched_state(const Conjugator& conj, const CMat& rho)
{
    const RVec& d = conj.eigenvalues();
    if (d.size() && d.maxCoeff() > kExpLimit)
        throw InvariantError("fock_oracle", "RSM numerically divergent at this truncation");
    const RVec half = (0.5 * d).array().exp();
    return conj.to_eigenbasis(rho).cwiseProduct((half * half.transpose()).cast<cplx>());
}

CMat spectral_apply(const CMat& hermitian, const std::function<double(double)>& fn)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(hermitian));
    const RVec v = es.eigenvalues().unaryExpr(fn);
    return es.eigenvectors() * v.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

XiDrift xi_drift_dispersion(const TruncatedSpace& space, const SystemSpec& spec, const DerivedMatrices& derived,
                            const RMat& pi)
{
    const auto n = space.n();
    if (pi.rows() != n || spec.n() != n) throw InvariantError("fock_oracle", "xi_drift_dispersion: dimension mismatch");
    XiDrift out;
    out.tau_const = tau(derived.b_matrix, derived.v_matrix, pi);
    const RMat& a = derived.a_matrix;
    CMat quad = quadratic_form(space, RMat(a.transpose() * pi + pi * a));

    if (!spec.unperturbed()) {
        const RMat left = pi * spec.theta * spec.c_matrix;   // n x s
        const RMat right = spec.c_matrix.transpose() * spec.theta * pi;  // s x n
        for (Eigen::Index k = 0; k < spec.s(); ++k) {
            const auto& phi = spec.perturbations[idx(k)];
            if (phi.is_zero()) continue;
            const CMat y = linear_form(space, spec.c_matrix.col(k).cast<cplx>());
            const CMat z = spectral_apply(y, [&](double v) { return phi.derivative(v); });
            const CMat lx = linear_form(space, left.col(k).cast<cplx>());
            const CMat rx = linear_form(space, right.row(k).transpose().cast<cplx>());
            quad += lx * z - z * rx;
        }
    }
    out.f = out.tau_const * CMat::Identity(space.dim, space.dim) + 0.5 * quad;

    const RMat bt_pi = derived.b_matrix.transpose() * pi;  // m x n
    for (Eigen::Index k = 0; k < bt_pi.rows(); ++k)
        out.g.push_back(linear_form(space, bt_pi.row(k).transpose().cast<cplx>()));
    return out;
}

RateProcessResult rate_process(const TruncatedSpace& space, const CMat& xi_op, const CMat& f,
                               const std::vector<CMat>& g, const CMat& omega, std::size_t quad_nodes, Exec exec)
{
    if (quad_nodes < 16) throw InvariantError("fock_oracle", "rate_process needs at least 16 quadrature nodes");
    if (omega.rows() != static_cast<Eigen::Index>(g.size()))
        throw InvariantError("fock_oracle", "rate_process: omega does not match g");
    const Conjugator conj(xi_op);
    const QuadratureRule rule = centered_rule(quad_nodes);
    const CMat w = conjugation_weights(conj.eigenvalues(), rule, exec).cast<cplx>();

    std::vector<CMat> g_eig;
    for (const auto& gk : g) g_eig.push_back(conj.to_eigenbasis(gk));

    RateProcessResult out;
    out.outer_nodes = quad_nodes;
    out.inner_nodes = quad_nodes;
    const CMat ito_eig = ito_double_integral(conj.eigenvalues(), g_eig, omega, rule, quad_nodes, exec);
    out.ito_part = conj.from_eigenbasis(ito_eig);
    out.alpha = conj.from_eigenbasis(conj.to_eigenbasis(f).cwiseProduct(w) + ito_eig);
    out.alpha_hermitian_residual = relative_hermitian_residual(out.alpha);
    for (const auto& ge : g_eig) {
        out.beta.push_back(conj.from_eigenbasis(ge.cwiseProduct(w)));
        out.beta_hermitian_residual = std::max(out.beta_hermitian_residual, relative_hermitian_residual(out.beta.back()));
    }
    (void)space;
    return out;
}

CMat sandwiched_expectation(const TruncatedSpace& space, const CMat& rho, const RMat& pi, const OpMatrix& ops)
{
    const Conjugator conj(xi_operator(space, pi));
    const CMat sigma = sandwiched_state(conj, rho);
    const auto rows = static_cast<Eigen::Index>(ops.size());
    const auto cols = rows ? static_cast<Eigen::Index>(ops[0].size()) : 0;
    CMat out(rows, cols);
    for (Eigen::Index j = 0; j < rows; ++j)
        for (Eigen::Index k = 0; k < cols; ++k) out(j, k) = expectation(sigma, conj.to_eigenbasis(ops[idx(j)][idx(k)]));
    return out;
}

CMat matrix_N(const TruncatedSpace& space, const CMat& rho, const RMat& pi, std::size_t quad_nodes)
{
    const Conjugator conj(xi_operator(space, pi));
    const CMat sigma = sandwiched_state(conj, rho);
    const CMat w = conjugation_weights(conj.eigenvalues(), centered_rule(quad_nodes), Exec::serial).cast<cplx>();
    const auto n = space.n();
    CMat out(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
            out(j, k) = expectation(sigma, conj.to_eigenbasis(space.xx[idx(j)][idx(k)]).cwiseProduct(w));
    return out;
}

RMat rsm_gradient_fd(const TruncatedSpace& space, const CMat& rho, const RMat& pi, double step)
{
    const auto n = space.n();
    RMat grad(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = j; k < n; ++k) {
            RMat d = RMat::Zero(n, n);
            d(j, k) += 0.5;
            d(k, j) += 0.5;
            grad(j, k) = (rsm(space, rho, pi + step * d) - rsm(space, rho, pi - step * d)) / (2.0 * step);
            grad(k, j) = grad(j, k);
        }
    return grad;
}

OpMatrix k_xxt_quadrature(const TruncatedSpace& space, const RMat& pi, std::size_t quad_nodes, Exec exec)
{
    const Conjugator conj(xi_operator(space, pi));
    const CMat w = conjugation_weights(conj.eigenvalues(), centered_rule(quad_nodes), exec).cast<cplx>();
    const auto n = space.n();
    OpMatrix out = zero_ops(idx(n), idx(n), space.dim);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
            out[idx(j)][idx(k)] = conj.from_eigenbasis(conj.to_eigenbasis(space.xx[idx(j)][idx(k)]).cwiseProduct(w));
    return out;
}

OpMatrix k_xxt_spectral(const TruncatedSpace& space, const SpectralFactorization& fact)
{
    const auto n = space.n();
    OpMatrix out = zero_ops(idx(n), idx(n), space.dim);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            CMat unit = CMat::Zero(n, n);
            unit(a, b) = 1.0;
            const CMat coeff = apply_K(fact, unit);
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index k = 0; k < n; ++k)
                    if (coeff(j, k) != 0.0) out[idx(j)][idx(k)] += coeff(j, k) * space.xx[idx(a)][idx(b)];
        }
    return out;
}

OpMatrix perturbation_Q(const TruncatedSpace& space, const SystemSpec& spec, const SpectralFactorization& fact,
                        std::size_t quad_nodes, Exec exec)
{
    const auto n = space.n();
    const auto s = spec.s();
    const auto dim = space.dim;
    OpMatrix out = zero_ops(idx(s), idx(n), dim);
    if (spec.unperturbed()) return out;

    const QuadratureRule rule = centered_rule(quad_nodes);
    // Each node contributes an s x n block row of operators, stacked horizontally.
    const CMat stacked = sum_indices(
        rule.size(),
        [&](std::size_t i) -> CMat {
            const CMat k = k_lambda(fact, rule.nodes[i]);
            std::vector<CMat> kx;
            for (Eigen::Index j = 0; j < n; ++j) kx.push_back(linear_form(space, k.row(j).transpose()));
            CMat block = CMat::Zero(dim, dim * s * n);
            for (Eigen::Index c = 0; c < s; ++c) {
                const auto& phi = spec.perturbations[idx(c)];
                if (phi.is_zero()) continue;
                const CVec u = k.transpose() * spec.c_matrix.col(c).cast<cplx>();
                const CMat z = phi.derivative_of(linear_form(space, u));
                for (Eigen::Index j = 0; j < n; ++j) block.middleCols((c * n + j) * dim, dim) = z * kx[idx(j)];
            }
            return rule.weights[i] * block;
        },
        exec);
    for (Eigen::Index c = 0; c < s; ++c)
        for (Eigen::Index j = 0; j < n; ++j) out[idx(c)][idx(j)] = stacked.middleCols((c * n + j) * dim, dim);
    return out;
}

OpMatrix perturbation_T(const TruncatedSpace& space, const SystemSpec& spec, const OpMatrix& q)
{
    const auto n = space.n();
    const auto s = spec.s();
    const RMat tc = spec.theta * spec.c_matrix;  // n x s
    OpMatrix out = zero_ops(idx(n), idx(n), space.dim);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l) {
            CMat& t = out[idx(j)][idx(l)];
            for (Eigen::Index k = 0; k < s; ++k) {
                // (C^T Theta)_kl = -(Theta C)_lk
                if (tc(j, k) != 0.0) t += tc(j, k) * q[idx(k)][idx(l)];
                if (tc(l, k) != 0.0) t += tc(l, k) * q[idx(k)][idx(j)].adjoint();
            }
        }
    return out;
}

OpMatrix perturbation_T(const TruncatedSpace& space, const SystemSpec& spec, const DerivedMatrices&,
                        const RMat& pi, std::size_t quad_nodes, Exec exec)
{
    const auto fact = spectral_factorize(spec.theta, pi);
    return perturbation_T(space, spec, perturbation_Q(space, spec, fact, quad_nodes, exec));
}

RMat quadratic_L(const SystemSpec& spec)
{
    RVec gamma(spec.s());
    for (Eigen::Index k = 0; k < spec.s(); ++k) {
        const auto& phi = spec.perturbations[idx(k)];
        if (phi.kind() == PerturbationFn::Kind::quadratic)
            gamma(k) = phi.gamma();
        else if (phi.is_zero())
            gamma(k) = 0.0;
        else
            throw InvariantError("fock_oracle", "quadratic_L needs quadratic perturbations");
    }
    return spec.theta * spec.c_matrix * gamma.asDiagonal() * spec.c_matrix.transpose();
}

OpMatrix quadratic_Q(const SystemSpec& spec, const OpMatrix& k_xxt)
{
    const auto n = static_cast<Eigen::Index>(k_xxt.size());
    const Eigen::Index dim = n ? k_xxt[0][0].rows() : 0;
    OpMatrix out = zero_ops(idx(spec.s()), idx(n), dim);
    for (Eigen::Index c = 0; c < spec.s(); ++c) {
        const auto& phi = spec.perturbations[idx(c)];
        if (phi.is_zero()) continue;
        if (phi.kind() != PerturbationFn::Kind::quadratic)
            throw InvariantError("fock_oracle", "quadratic_Q needs quadratic perturbations");
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (spec.c_matrix(i, c) != 0.0)
                    out[idx(c)][idx(j)] += phi.gamma() * spec.c_matrix(i, c) * k_xxt[idx(i)][idx(j)];
    }
    return out;
}

OpMatrix dagger(const OpMatrix& ops)
{
    if (ops.empty()) return {};
    OpMatrix out(ops[0].size(), std::vector<CMat>(ops.size()));
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = 0; j < ops[i].size(); ++j) out[j][i] = ops[i][j].adjoint();
    return out;
}

double low_energy_distance(const TruncatedSpace& space, const OpMatrix& a, const OpMatrix& b)
{
    if (a.size() != b.size()) throw InvariantError("fock_oracle", "operator matrix shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) throw InvariantError("fock_oracle", "operator matrix shape mismatch");
        for (std::size_t j = 0; j < a[i].size(); ++j)
            worst = std::max(worst, restrict_low(space, a[i][j] - b[i][j]).cwiseAbs().maxCoeff());
    }
    return worst;
}

SuperpositivitySampler::SuperpositivitySampler(const TruncatedSpace& space, const OpMatrix& t_matrix,
                                               const OpMatrix& k_xxt, std::size_t n_samples, std::uint64_t seed)
{
    const auto n = space.n();
    OpMatrix k_low = zero_ops(idx(n), idx(n), 0), t_low = zero_ops(idx(n), idx(n), 0);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            k_low[idx(j)][idx(k)] = restrict_low(space, k_xxt[idx(j)][idx(k)]);
            t_low[idx(j)][idx(k)] = restrict_low(space, t_matrix[idx(j)][idx(k)]);
        }
    const auto low = static_cast<Eigen::Index>(space.low_energy.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (std::size_t s = 0; s < n_samples; ++s) {
        CVec u(n);
        for (Eigen::Index j = 0; j < n; ++j) u(j) = cplx(normal(rng), normal(rng));
        u /= u.norm();
        CMat ku = CMat::Zero(low, low), tu = CMat::Zero(low, low);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k) {
                const cplx w = std::conj(u(j)) * u(k);
                ku += w * k_low[idx(j)][idx(k)];
                tu += w * t_low[idx(j)][idx(k)];
            }
        k_u_.push_back(std::move(ku));
        t_u_.push_back(std::move(tu));
    }
}

double SuperpositivitySampler::margin(double sigma, Exec exec) const
{
    std::vector<CMat> ops(k_u_.size());
    for (std::size_t i = 0; i < ops.size(); ++i) ops[i] = sigma * k_u_[i] - t_u_[i];
    return sampled_min_eigenvalue(ops, exec);
}

double superpositivity_margin(const TruncatedSpace& space, const OpMatrix& t_matrix, const OpMatrix& k_xxt,
                              double sigma, std::size_t n_samples, std::uint64_t seed, Exec exec)
{
    return SuperpositivitySampler(space, t_matrix, k_xxt, n_samples, seed).margin(sigma, exec);
}

SigmaEstimate estimate_sigma(const SuperpositivitySampler& sampler, double tol, double sigma_max,
                             std::size_t grid_intervals)
{
    if (grid_intervals == 0 || !(sigma_max > 0.0)) throw InvariantError("fock_oracle", "bad sigma grid");
    SigmaEstimate best{0.0, sampler.margin(0.0), false};
    if (best.margin >= -tol) return {0.0, best.margin, true};
    double prev = 0.0;
    for (std::size_t k = 1; k <= grid_intervals; ++k) {
        const double sigma = sigma_max * static_cast<double>(k) / static_cast<double>(grid_intervals);
        const double m = sampler.margin(sigma);
        if (m >= -tol) {
            double lo = prev, hi = sigma, m_hi = m;
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double mm = sampler.margin(mid);
                if (mm >= -tol)
                    hi = mid, m_hi = mm;
                else
                    lo = mid;
            }
            return {hi, m_hi, true};
        }
        if (m > best.margin) best = {sigma, m, false};
        prev = sigma;
    }
    return best;
}

}  // namespace qrsm
