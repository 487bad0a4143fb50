#include "qrsm/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "qrsm/error.hpp"
#include "qrsm/spectral.hpp"

namespace qrsm {

double tau(const RMat& b_matrix, const RMat& v_matrix, const RMat& pi)
{
    return 0.5 * frob(b_matrix * v_matrix * b_matrix.transpose(), pi);
}

namespace {

double min_eigenvalue(const RMat& sym)
{
    Eigen::SelfAdjointEigenSolver<RMat> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

CharacteristicTrajectory integrate_characteristic(const SystemSpec& spec, const DerivedMatrices& derived,
                                                  const RMat& pi0, double sigma, double horizon,
                                                  const CharacteristicOptions& options)
{
    if (!(horizon > 0.0)) throw InvariantError("dynamics", "horizon must be positive");
    if (!(sigma >= 0.0)) throw InvariantError("dynamics", "sigma must be non-negative");
    if (options.output_intervals == 0) throw InvariantError("dynamics", "output grid needs at least one interval");
    const auto n = spec.n();
    if (pi0.rows() != n || pi0.cols() != n) throw InvariantError("dynamics", "pi0 dimension mismatch");
    RMat pi = symmetrized(pi0);
    if (!validate_conditions(spec, pi).pi_positive_definite)
        throw InvariantError("dynamics", "pi0 not positive definite");

    const double pd_floor = options.pd_floor_factor * pi.norm();
    const RMat& a = derived.a_matrix;

    CharacteristicTrajectory traj;
    traj.sigma = sigma;

    auto record = [&](double t, const RMat& p, bool pd) {
        traj.times.push_back(t);
        traj.pi_path.push_back(p);
        traj.pd_ok.push_back(pd);
        traj.tau_path.push_back(tau(derived.b_matrix, derived.v_matrix, p));
        double exponent = std::numeric_limits<double>::quiet_NaN();
        if (pd) {
            const auto at = drift_at(spec, derived, p);
            exponent = traj.tau_path.back() + 0.5 * frob(at.drift.u_matrix, spec.theta);
        }
        traj.exponent_path.push_back(exponent);
        const double orth = std::abs(frob(p, spec.theta));
        traj.max_orthogonality_residual = std::max(traj.max_orthogonality_residual, orth);
        if (orth > 1e-12 * std::max(1.0, p.norm() * spec.theta.norm()))
            throw InvariantError("dynamics", "<Pi, Theta> != 0 along the characteristic");
    };

    // Y(Pi) needs a fresh factorization; outside the PD cone the stage is NaN
    // and the integrator rejects the step.
    auto rhs = [&](double, const RMat& p) -> RMat {
        const RMat ps = symmetrized(p);
        if (!(min_eigenvalue(ps) > pd_floor)) return RMat::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
        const auto at = drift_at(spec, derived, ps);
        return -(a.transpose() * ps + ps * a + 2.0 * at.drift.y_matrix + sigma * ps);
    };
    auto project = [](RMat& p) { p = symmetrized(p); };

    DormandPrince<RMat> stepper(options.step);
    stepper.set_projection_changes_state(true);
    double t = 0.0;
    record(t, pi, true);
    const double dt = horizon / static_cast<double>(options.output_intervals);
    for (std::size_t k = 1; k <= options.output_intervals; ++k) {
        const double t_next = k == options.output_intervals ? horizon : dt * static_cast<double>(k);
        try {
            stepper.advance(pi, t, t_next, rhs, project);
        } catch (const StepUnderflow& e) {
            traj.status = CharacteristicTrajectory::Status::step_underflow;
            traj.message = e.what();
            break;
        }
        const bool pd = min_eigenvalue(pi) > pd_floor;
        record(t, pi, pd);
        if (!pd) {
            traj.status = CharacteristicTrajectory::Status::left_cone;
            traj.message = "Pi left the positive definite cone at t = " + std::to_string(t);
            break;
        }
    }
    traj.stats = stepper.stats();
    return traj;
}

CharacteristicTrajectory gronwall_bound(CharacteristicTrajectory traj, double xi0)
{
    if (!(xi0 > 0.0)) throw InvariantError("dynamics", "xi0 must be positive");
    traj.bound_path.assign(traj.size(), std::numeric_limits<double>::quiet_NaN());
    if (traj.size() == 0) return traj;
    double cumulative = 0.0;
    traj.bound_path[0] = xi0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        if (!traj.pd_ok[k]) break;
        cumulative += 0.5 * (traj.exponent_path[k] + traj.exponent_path[k - 1]) * (traj.times[k] - traj.times[k - 1]);
        traj.bound_path[k] = xi0 * std::exp(cumulative);
    }
    return traj;
}

double small_pi_expansion(const RMat& pi, const RMat& second_moments) { return 1.0 + 0.5 * frob(pi, second_moments); }

void write_trajectory_csv(std::ostream& os, const CharacteristicTrajectory& traj)
{
    const auto n = traj.pi_path.empty() ? 0 : traj.pi_path.front().rows();
    os << "t";
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) os << ",pi_" << i + 1 << "_" << j + 1;
    os << ",tau,exponent,bound,pd_ok\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (std::size_t k = 0; k < traj.size(); ++k) {
        put(traj.times[k]);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                os << ',';
                put(traj.pi_path[k](i, j));
            }
        os << ',';
        put(traj.tau_path[k]);
        os << ',';
        put(traj.exponent_path[k]);
        os << ',';
        put(k < traj.bound_path.size() ? traj.bound_path[k] : std::numeric_limits<double>::quiet_NaN());
        os << ',' << (traj.pd_ok[k] ? 1 : 0) << '\n';
    }
}

std::string to_string(CharacteristicTrajectory::Status status)
{
    switch (status) {
    case CharacteristicTrajectory::Status::completed: return "completed";
    case CharacteristicTrajectory::Status::left_cone: return "left_cone";
    case CharacteristicTrajectory::Status::step_underflow: return "step_underflow";
    }
    return "unknown";
}

}  // namespace qrsm
