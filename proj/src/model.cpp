#include "qrsm/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "qrsm/error.hpp"
#include "qrsm/json_io.hpp"

namespace qrsm {

// ---------------------------------------------------------------------------
// PerturbationFn

PerturbationFn PerturbationFn::zero() { return PerturbationFn{}; }

PerturbationFn PerturbationFn::quadratic(double gamma)
{
    PerturbationFn f;
    f.kind_ = Kind::quadratic;
    f.gamma_ = gamma;
    return f;
}

PerturbationFn PerturbationFn::polynomial(std::vector<double> coeffs)
{
    PerturbationFn f;
    f.kind_ = Kind::polynomial;
    f.coeffs_ = std::move(coeffs);
    return f;
}

PerturbationFn PerturbationFn::sinusoid(double epsilon, double omega0)
{
    PerturbationFn f;
    f.kind_ = Kind::sinusoid;
    f.epsilon_ = epsilon;
    f.omega0_ = omega0;
    return f;
}

std::string PerturbationFn::kind_name() const
{
    switch (kind_) {
    case Kind::zero: return "zero";
    case Kind::quadratic: return "quadratic";
    case Kind::polynomial: return "polynomial";
    case Kind::sinusoid: return "sinusoid";
    }
    return "unknown";
}

double PerturbationFn::value(double y) const
{
    switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::quadratic: return 0.5 * gamma_ * y * y;
    case Kind::polynomial: {
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * y + *it;
        return acc;
    }
    case Kind::sinusoid: return epsilon_ * std::sin(omega0_ * y);
    }
    return 0.0;
}

double PerturbationFn::derivative(double y) const
{
    switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::quadratic: return gamma_ * y;
    case Kind::polynomial: {
        double acc = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 1;) acc = acc * y + static_cast<double>(k) * coeffs_[k];
        return acc;
    }
    case Kind::sinusoid: return epsilon_ * omega0_ * std::cos(omega0_ * y);
    }
    return 0.0;
}

CMat PerturbationFn::derivative_of(const CMat& y) const
{
    const auto d = y.rows();
    switch (kind_) {
    case Kind::zero: return CMat::Zero(d, d);
    case Kind::quadratic: return gamma_ * y;
    case Kind::polynomial: {
        CMat acc = CMat::Zero(d, d);
        for (std::size_t k = coeffs_.size(); k-- > 1;) {
            acc = acc * y;
            acc.diagonal().array() += static_cast<double>(k) * coeffs_[k];
        }
        return acc;
    }
    case Kind::sinusoid: {
        const CMat arg = (kI * omega0_) * y;
        const CMat plus = arg.exp();
        const CMat minus = (-arg).exp();
        return (0.5 * epsilon_ * omega0_) * (plus + minus);
    }
    }
    return CMat::Zero(d, d);
}

bool PerturbationFn::is_zero() const
{
    switch (kind_) {
    case Kind::zero: return true;
    case Kind::quadratic: return gamma_ == 0.0;
    case Kind::polynomial:
        for (std::size_t k = 1; k < coeffs_.size(); ++k)
            if (coeffs_[k] != 0.0) return false;
        return true;
    case Kind::sinusoid: return epsilon_ == 0.0 || omega0_ == 0.0;
    }
    return true;
}

bool SystemSpec::unperturbed() const
{
    for (Eigen::Index k = 0; k < s(); ++k)
        if (c_matrix.col(k).norm() > 0.0 && !perturbations[static_cast<std::size_t>(k)].is_zero()) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Construction and validation

namespace {

std::string dims(const auto& m)
{
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

double scale_of(double norm) { return std::max(1.0, norm); }

void require(bool cond, const std::string& msg)
{
    if (!cond) throw ConfigError(msg);
}

}  // namespace

SystemSpec make_system(RMat theta, RMat r_matrix, RMat m_matrix, CMat omega, RMat c_matrix,
                       std::vector<PerturbationFn> perturbations)
{
    const auto n = theta.rows();
    require(n > 0 && theta.cols() == n, "theta must be square and non-empty, got " + dims(theta));
    require(n % 2 == 0, "n odd (n = " + std::to_string(n) + ")");
    require(r_matrix.rows() == n && r_matrix.cols() == n,
            "dimension mismatch: r is " + dims(r_matrix) + ", expected " + std::to_string(n) + "x" + std::to_string(n));
    require(m_matrix.cols() == n, "dimension mismatch: m is " + dims(m_matrix) + ", expected ?x" + std::to_string(n));
    const auto m = m_matrix.rows();
    require(omega.rows() == m && omega.cols() == m,
            "dimension mismatch: omega is " + dims(omega) + ", expected " + std::to_string(m) + "x" + std::to_string(m));
    if (c_matrix.size() == 0) c_matrix = RMat::Zero(n, static_cast<Eigen::Index>(perturbations.size()));
    require(c_matrix.rows() == n, "dimension mismatch: c is " + dims(c_matrix) + ", expected " + std::to_string(n) + "x?");
    require(static_cast<std::size_t>(c_matrix.cols()) == perturbations.size(),
            "dimension mismatch: c has " + std::to_string(c_matrix.cols()) + " columns but " +
                std::to_string(perturbations.size()) + " perturbations are listed");
    require(theta.allFinite() && r_matrix.allFinite() && m_matrix.allFinite() && omega.allFinite() &&
                c_matrix.allFinite(),
            "non-finite matrix entry");

    const double theta_res = (theta + theta.transpose()).norm();
    require(theta_res <= kStructureTol * scale_of(theta.norm()),
            "theta not antisymmetric (residual " + std::to_string(theta_res) + ")");
    const double r_res = (r_matrix - r_matrix.transpose()).norm();
    require(r_res <= kStructureTol * scale_of(r_matrix.norm()),
            "r not symmetric (residual " + std::to_string(r_res) + ")");
    const double omega_res = hermitian_residual(omega);
    require(omega_res <= kStructureTol * scale_of(omega.norm()),
            "omega not Hermitian (residual " + std::to_string(omega_res) + ")");

    SystemSpec spec;
    spec.theta = 0.5 * (theta - theta.transpose());
    spec.r_matrix = symmetrized(r_matrix);
    spec.m_matrix = std::move(m_matrix);
    spec.omega = hermitized(omega);
    spec.c_matrix = std::move(c_matrix);
    spec.perturbations = std::move(perturbations);

    if (m > 0) {
        Eigen::SelfAdjointEigenSolver<CMat> es(spec.omega, Eigen::EigenvaluesOnly);
        const double min_eig = es.eigenvalues().minCoeff();
        require(min_eig >= -kStructureTol * scale_of(spec.omega.norm()),
                "omega not PSD (min eigenvalue " + std::to_string(min_eig) + ")");
    }
    return spec;
}

SystemSpec load_system(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("parse failure in '" + path.string() + "': " + e.what());
    }
    return system_from_json(doc);
}

std::pair<RMat, RMat> ito_decompose(const CMat& omega)
{
    if (omega.rows() != omega.cols()) throw ConfigError("omega must be square, got " + dims(omega));
    const double res = hermitian_residual(omega);
    if (res > kStructureTol * scale_of(omega.norm()))
        throw ConfigError("omega not Hermitian (residual " + std::to_string(res) + ")");
    const CMat h = hermitized(omega);
    return {h.real(), 2.0 * h.imag()};
}

DerivedMatrices derive_structure(const SystemSpec& spec)
{
    DerivedMatrices d;
    std::tie(d.v_matrix, d.j_matrix) = ito_decompose(spec.omega);
    d.b_matrix = spec.theta * spec.m_matrix.transpose();
    d.a_matrix = spec.theta * spec.r_matrix + 0.5 * d.b_matrix * d.j_matrix * spec.m_matrix;
    return d;
}

ConditionReport validate_conditions(const RMat& theta, const RMat& pi)
{
    ConditionReport rep;
    const auto n = theta.rows();
    rep.n_even = n % 2 == 0;
    if (!rep.n_even) rep.failures.push_back("n odd");

    rep.det_theta = theta.rows() == theta.cols() && n > 0 ? theta.determinant() : 0.0;
    const double scale = std::pow(scale_of(theta.norm()), static_cast<double>(n));
    rep.theta_nonsingular = std::abs(rep.det_theta) > 1e-12 * scale;
    if (!rep.theta_nonsingular) rep.failures.push_back("theta singular");

    if (pi.rows() != n || pi.cols() != n) {
        rep.failures.push_back("pi dimension mismatch");
        return rep;
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(symmetrized(pi), Eigen::EigenvaluesOnly);
    rep.min_eig_pi = es.eigenvalues().minCoeff();
    rep.pi_positive_definite = rep.min_eig_pi > 0.0;
    if (!rep.pi_positive_definite) rep.failures.push_back("pi not positive definite");
    return rep;
}

ConditionReport validate_conditions(const SystemSpec& spec, const RMat& pi)
{
    return validate_conditions(spec.theta, pi);
}

CMat vacuum_ito_matrix(Eigen::Index m)
{
    CMat omega = CMat::Identity(m, m);
    for (Eigen::Index k = 0; k + 1 < m; k += 2) {
        omega(k, k + 1) = 0.5 * kI;
        omega(k + 1, k) = -0.5 * kI;
    }
    return omega;
}

RMat standard_ccr_matrix(Eigen::Index n)
{
    RMat theta = RMat::Zero(n, n);
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        theta(k, k + 1) = 1.0;
        theta(k + 1, k) = -1.0;
    }
    return theta;
}

}  // namespace qrsm
