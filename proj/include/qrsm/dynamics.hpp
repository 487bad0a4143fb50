#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qrsm/model.hpp"
#include "qrsm/ode.hpp"
#include "qrsm/types.hpp"

namespace qrsm {

/// tau = <B V B^T, Pi> / 2
double tau(const RMat& b_matrix, const RMat& v_matrix, const RMat& pi);

/// Time-continuation of the risk-sensitivity parameter along
///     dPi/dt = -(A^T Pi + Pi A + 2 Y(Pi) + sigma Pi)
/// sampled on a uniform output grid, with the Gronwall exponent
/// tau + <U, Theta>/2 at every sample.
struct CharacteristicTrajectory {
    enum class Status { completed, left_cone, step_underflow };

    std::vector<double> times;
    std::vector<RMat> pi_path;
    std::vector<double> tau_path;
    std::vector<double> exponent_path;
    std::vector<double> bound_path;  ///< filled by gronwall_bound
    std::vector<bool> pd_ok;

    Status status = Status::completed;
    std::string message;
    double sigma = 0.0;
    double max_orthogonality_residual = 0.0;  ///< max |<Pi, Theta>| seen
    IntegrationStats stats;

    std::size_t size() const { return times.size(); }
};

struct CharacteristicOptions {
    StepControl step{1e-8, 1e-12, 1e-2, 1e-12, 1'000'000};
    std::size_t output_intervals = 100;
    /// pd floor = pd_floor_factor * ||Pi_0||
    double pd_floor_factor = 1e-10;
};

CharacteristicTrajectory integrate_characteristic(const SystemSpec& spec, const DerivedMatrices& derived,
                                                  const RMat& pi0, double sigma, double horizon,
                                                  const CharacteristicOptions& options = {});

/// Fill bound_path with xi0 * exp(int_0^t exponent ds), trapezoid rule on the
/// trajectory grid. Throws for xi0 <= 0.
CharacteristicTrajectory gronwall_bound(CharacteristicTrajectory traj, double xi0);

/// 1 + <Pi, second_moments>/2: a lower bound on the risk-sensitive moment.
double small_pi_expansion(const RMat& pi, const RMat& second_moments);

/// CSV with columns t, pi_<i><j> (row-major, 1-based), tau, exponent, bound, pd_ok.
void write_trajectory_csv(std::ostream& os, const CharacteristicTrajectory& traj);

std::string to_string(CharacteristicTrajectory::Status status);

}  // namespace qrsm
