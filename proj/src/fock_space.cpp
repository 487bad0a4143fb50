#include "qrsm/fock_space.hpp"

#include <cmath>
#include <limits>

#include "qrsm/error.hpp"

namespace qrsm {

namespace {

constexpr double kExpLimit = 700.0;

// S with S theta S^T = J (standard form); rows come in pairs (u_k, v_k) with
// u_k^T theta v_k = 1 and every other pairing zero.
RMat symplectic_basis(const RMat& theta)
{
    const auto n = theta.rows();
    std::vector<RVec> pool;
    for (Eigen::Index j = 0; j < n; ++j) pool.push_back(RVec::Unit(n, j));
    auto omega = [&](const RVec& x, const RVec& y) { return x.dot(theta * y); };
    const double scale = std::max(1.0, theta.norm());

    RMat s(n, n);
    for (Eigen::Index pair = 0; pair < n / 2; ++pair) {
        std::size_t iu = 0, iv = 0;
        double best = 0.0;
        for (std::size_t a = 0; a < pool.size(); ++a)
            for (std::size_t b = a + 1; b < pool.size(); ++b) {
                const double w = std::abs(omega(pool[a], pool[b]));
                if (w > best) best = w, iu = a, iv = b;
            }
        if (best <= 1e-12 * scale) throw InvariantError("fock_oracle", "theta not congruent to the standard form");
        RVec u = pool[iu];
        RVec v = pool[iv] / omega(pool[iu], pool[iv]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(iv));
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(iu));
        for (auto& w : pool) w = w - omega(w, v) * u + omega(w, u) * v;
        s.row(2 * pair) = u.transpose();
        s.row(2 * pair + 1) = v.transpose();
    }
    return s;
}

CMat kron_identity(const CMat& op, int mode, int n_modes, int cutoff)
{
    CMat out = CMat::Identity(1, 1);
    for (int k = 0; k < n_modes; ++k) {
        const CMat factor = k == mode ? op : CMat::Identity(cutoff, cutoff);
        CMat next(out.rows() * factor.rows(), out.cols() * factor.cols());
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            for (Eigen::Index j = 0; j < out.cols(); ++j)
                next.block(i * factor.rows(), j * factor.cols(), factor.rows(), factor.cols()) = out(i, j) * factor;
        out = std::move(next);
    }
    return out;
}

CMat pure(const CVec& psi)
{
    const CVec unit = psi / psi.norm();
    return unit * unit.adjoint();
}

}  // namespace

CMat ladder(int cutoff)
{
    CMat a = CMat::Zero(cutoff, cutoff);
    for (int k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

TruncatedSpace build_space(int n_modes, int cutoff, const RMat& theta)
{
    if (n_modes < 1) throw InvariantError("fock_oracle", "need at least one mode");
    if (cutoff < 2) throw InvariantError("fock_oracle", "cutoff must be at least 2");
    if (theta.rows() != 2 * n_modes || theta.cols() != 2 * n_modes)
        throw InvariantError("fock_oracle", "theta must be of order 2 * n_modes");

    TruncatedSpace sp;
    sp.n_modes = n_modes;
    sp.cutoff = cutoff;
    sp.theta = theta;
    sp.dim = 1;
    for (int k = 0; k < n_modes; ++k) sp.dim *= cutoff;
    sp.transform = symplectic_basis(theta).inverse();

    const CMat a = ladder(cutoff);
    const double r2 = std::sqrt(2.0);
    std::vector<CMat> standard;
    for (int k = 0; k < n_modes; ++k) {
        const CMat q = (a + a.adjoint()) / r2;
        const CMat p = kI * (a.adjoint() - a) / r2;
        standard.push_back(kron_identity(q, k, n_modes, cutoff));
        standard.push_back(kron_identity(p, k, n_modes, cutoff));
    }
    const auto n = theta.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        CMat x = CMat::Zero(sp.dim, sp.dim);
        for (Eigen::Index k = 0; k < n; ++k)
            if (sp.transform(j, k) != 0.0) x += sp.transform(j, k) * standard[static_cast<std::size_t>(k)];
        sp.x_ops.push_back(hermitized(x));
    }
    sp.xx.assign(static_cast<std::size_t>(n), std::vector<CMat>(static_cast<std::size_t>(n)));
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
            sp.xx[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
                sp.x_ops[static_cast<std::size_t>(j)] * sp.x_ops[static_cast<std::size_t>(k)];

    sp.low_level_count = std::max(1, static_cast<int>(std::floor(0.6 * cutoff)));
    for (Eigen::Index idx = 0; idx < sp.dim; ++idx) {
        Eigen::Index rest = idx;
        bool low = true;
        for (int k = 0; k < n_modes; ++k) {
            if (rest % cutoff >= sp.low_level_count) low = false;
            rest /= cutoff;
        }
        if (low) sp.low_energy.push_back(idx);
    }

    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto uj = static_cast<std::size_t>(j), uk = static_cast<std::size_t>(k);
            const CMat defect = sp.xx[uj][uk] - sp.xx[uk][uj] - kI * theta(j, k) * CMat::Identity(sp.dim, sp.dim);
            sp.ccr_defect = std::max(sp.ccr_defect, restrict_low(sp, defect).cwiseAbs().maxCoeff());
        }
    return sp;
}

CMat restrict_low(const TruncatedSpace& space, const CMat& op) { return op(space.low_energy, space.low_energy); }

CMat quadratic_form(const TruncatedSpace& space, const CMat& p)
{
    CMat out = CMat::Zero(space.dim, space.dim);
    for (Eigen::Index j = 0; j < space.n(); ++j)
        for (Eigen::Index k = 0; k < space.n(); ++k)
            if (p(j, k) != 0.0) out += p(j, k) * space.xx[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    return out;
}

CMat quadratic_form(const TruncatedSpace& space, const RMat& p) { return quadratic_form(space, CMat(p.cast<cplx>())); }

CMat linear_form(const TruncatedSpace& space, const CVec& u)
{
    CMat out = CMat::Zero(space.dim, space.dim);
    for (Eigen::Index j = 0; j < space.n(); ++j)
        if (u(j) != 0.0) out += u(j) * space.x_ops[static_cast<std::size_t>(j)];
    return out;
}

CMat build_hamiltonian(const TruncatedSpace& space, const RMat& r_matrix, const RMat& c_matrix,
                       const std::vector<PerturbationFn>& perturbations)
{
    if (r_matrix.rows() != space.n() || c_matrix.rows() != space.n() ||
        c_matrix.cols() != static_cast<Eigen::Index>(perturbations.size()))
        throw InvariantError("fock_oracle", "build_hamiltonian: dimension mismatch");
    CMat h = 0.5 * quadratic_form(space, r_matrix);
    for (std::size_t k = 0; k < perturbations.size(); ++k) {
        if (perturbations[k].is_zero()) continue;
        const CMat y = hermitized(linear_form(space, c_matrix.col(static_cast<Eigen::Index>(k)).cast<cplx>()));
        Eigen::SelfAdjointEigenSolver<CMat> es(y);
        const RVec phi = es.eigenvalues().unaryExpr([&](double v) { return perturbations[k].value(v); });
        h += es.eigenvectors() * phi.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    }
    return hermitized(h);
}

CMat vacuum_state(const TruncatedSpace& space) { return fock_state(space, std::vector<int>(space.n_modes, 0)); }

CMat fock_state(const TruncatedSpace& space, const std::vector<int>& levels)
{
    if (static_cast<int>(levels.size()) != space.n_modes) throw InvariantError("fock_oracle", "one level per mode");
    Eigen::Index idx = 0;
    for (int level : levels) {
        if (level < 0 || level >= space.cutoff) throw InvariantError("fock_oracle", "level beyond cutoff");
        idx = idx * space.cutoff + level;
    }
    CMat rho = CMat::Zero(space.dim, space.dim);
    rho(idx, idx) = 1.0;
    return rho;
}

CMat coherent_state(const TruncatedSpace& space, const std::vector<cplx>& amplitudes)
{
    if (static_cast<int>(amplitudes.size()) != space.n_modes)
        throw InvariantError("fock_oracle", "one amplitude per mode");
    CVec psi = CVec::Ones(1);
    for (const cplx alpha : amplitudes) {
        CVec mode(space.cutoff);
        mode(0) = std::exp(-0.5 * std::norm(alpha));
        for (int k = 1; k < space.cutoff; ++k) mode(k) = mode(k - 1) * alpha / std::sqrt(static_cast<double>(k));
        CVec next(psi.size() * mode.size());
        for (Eigen::Index i = 0; i < psi.size(); ++i) next.segment(i * mode.size(), mode.size()) = psi(i) * mode;
        psi = std::move(next);
    }
    return pure(psi);
}

Conjugator::Conjugator(const CMat& xi)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(xi));
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
}

RMat Conjugator::weights(double lambda) const
{
    const double spread = evals_.size() ? evals_(evals_.size() - 1) - evals_(0) : 0.0;
    if (std::abs(lambda) * spread > kExpLimit)
        throw InvariantError("fock_oracle", "conjugation exp(-lambda xi) overflows at this truncation");
    const auto d = evals_.size();
    RMat w(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) w(a, b) = std::exp(-lambda * (evals_(a) - evals_(b)));
    return w;
}

CMat Conjugator::apply(double lambda, const CMat& eta) const
{
    return from_eigenbasis(to_eigenbasis(eta).cwiseProduct(weights(lambda).cast<cplx>()));
}

CMat Conjugator::exp_scaled(double s) const
{
    if (evals_.size() && std::abs(s) * evals_.cwiseAbs().maxCoeff() > kExpLimit)
        throw InvariantError("fock_oracle", "RSM numerically divergent at this truncation");
    const RVec e = (s * evals_).array().exp();
    return evecs_ * e.cast<cplx>().asDiagonal() * evecs_.adjoint();
}

CMat superop_E(const CMat& xi, double lambda, const CMat& eta) { return Conjugator(xi).apply(lambda, eta); }

CMat xi_operator(const TruncatedSpace& space, const RMat& pi)
{
    return hermitized(0.5 * quadratic_form(space, symmetrized(pi)));
}

RsmValue rsm_detail(const TruncatedSpace& space, const CMat& rho, const RMat& pi)
{
    if (pi.rows() != space.n() || pi.cols() != space.n()) throw InvariantError("fock_oracle", "pi dimension mismatch");
    const Conjugator conj(xi_operator(space, pi));
    if (conj.dim() && conj.eigenvalues().maxCoeff() > kExpLimit)
        throw InvariantError("fock_oracle", "RSM numerically divergent at this truncation");
    const CMat rho_eig = conj.to_eigenbasis(rho);
    cplx acc = 0.0;
    for (Eigen::Index a = 0; a < conj.dim(); ++a) acc += std::exp(conj.eigenvalues()(a)) * rho_eig(a, a);
    if (!std::isfinite(acc.real())) throw InvariantError("fock_oracle", "RSM numerically divergent at this truncation");
    return {acc.real(), std::abs(acc.imag())};
}

double rsm(const TruncatedSpace& space, const CMat& rho, const RMat& pi) { return rsm_detail(space, rho, pi).value; }

Moments moments(const TruncatedSpace& space, const CMat& rho)
{
    const auto n = space.n();
    Moments m{RVec(n), RMat(n, n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        m.mean(j) = expectation(rho, space.x_ops[static_cast<std::size_t>(j)]).real();
        for (Eigen::Index k = 0; k < n; ++k)
            m.second(j, k) =
                expectation(rho, space.xx[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]).real();
    }
    return m;
}

StateDiagnostics diagnose_state(const CMat& rho)
{
    StateDiagnostics d;
    d.hermitian_residual = hermitian_residual(rho);
    d.trace_error = std::abs(rho.trace() - 1.0);
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(rho), Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues()(0);
    return d;
}

}  // namespace qrsm
