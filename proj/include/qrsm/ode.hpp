#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qrsm/error.hpp"

namespace qrsm {

struct StepControl {
    double rtol = 1e-8;
    double atol = 1e-12;
    double initial_step = 1e-3;
    double min_step = 1e-12;
    std::size_t max_steps = 1'000'000;
};

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

class StepUnderflow : public Error {
public:
    StepUnderflow(double t, double h)
        : Error("ode", "step size underflow at t = " + std::to_string(t) + " (h = " + std::to_string(h) + ")"), t_(t)
    {
    }
    double time() const noexcept { return t_; }

private:
    double t_;
};

/// Dormand-Prince 5(4) with FSAL and an elementwise mixed error norm.
/// `State` is any Eigen dense matrix; a non-finite stage is treated as a
/// rejected step, so right-hand sides may signal "outside the domain" by
/// returning NaN.
template <class State>
class DormandPrince {
public:
    explicit DormandPrince(StepControl ctl = {}) : ctl_(ctl), h_(ctl.initial_step) {}

    const IntegrationStats& stats() const { return stats_; }
    double step_size() const { return h_; }

    /// Advance y from t to t_end exactly. `project` is applied to every
    /// accepted state (e.g. re-symmetrization).
    template <class Rhs, class Project>
    void advance(State& y, double& t, double t_end, Rhs&& rhs, Project&& project)
    {
        if (t_end <= t) return;
        State k1 = rhs(t, y);
        ++stats_.rhs_evals;
        std::size_t steps = 0;
        while (t < t_end) {
            if (++steps > ctl_.max_steps) throw StepUnderflow(t, h_);
            bool last = false;
            double h = std::min(h_, t_end - t);
            if (t + h >= t_end || t_end - (t + h) < 1e-12 * std::max(1.0, std::abs(t_end))) {
                h = t_end - t;
                last = true;
            }

            const State k2 = rhs(t + c2 * h, y + h * (a21 * k1));
            const State k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
            const State k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const State k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const State k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            State y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const State k7 = rhs(t + h, y_new);
            stats_.rhs_evals += 6;

            const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double err_norm = error_norm(err, y, y_new);

            if (err_norm <= 1.0) {
                project(y_new);
                y = std::move(y_new);
                t = last ? t_end : t + h;
                k1 = project_changed_ ? rhs(t, y) : k7;
                if (project_changed_) ++stats_.rhs_evals;
                ++stats_.accepted;
                const double fac = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
                // Do not let the clipped final step shrink the carried step size.
                if (!last || h >= h_) h_ = h * fac;
            } else {
                ++stats_.rejected;
                const double fac =
                    std::isfinite(err_norm) ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 1.0) : 0.25;
                h_ = h * fac;
                if (h_ < ctl_.min_step) throw StepUnderflow(t, h_);
            }
        }
    }

    template <class Rhs>
    void advance(State& y, double& t, double t_end, Rhs&& rhs)
    {
        advance(y, t, t_end, std::forward<Rhs>(rhs), [](State&) {});
    }

    /// Set when the projection may alter the state, forcing a fresh first
    /// stage after every accepted step instead of reusing k7.
    void set_projection_changes_state(bool v) { project_changed_ = v; }

private:
    double error_norm(const State& err, const State& y0, const State& y1) const
    {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            const double scale = ctl_.atol + ctl_.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
            const double e = std::abs(err(i)) / scale;
            if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
            worst = std::max(worst, e);
        }
        return worst;
    }

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    StepControl ctl_;
    double h_;
    bool project_changed_ = false;
    IntegrationStats stats_;
};

}  // namespace qrsm
