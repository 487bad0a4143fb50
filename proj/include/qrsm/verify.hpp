#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrsm/dynamics.hpp"
#include "qrsm/fock_rate.hpp"
#include "qrsm/model.hpp"

namespace qrsm {

struct CheckResult {
    std::string name;
    std::string description;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    bool skipped = false;
    std::string note;
};

struct VerifyOptions {
    int cutoff = 0;  ///< 0 picks 30 for one mode, 12 per mode otherwise
    std::size_t quad_nodes = 32;
    std::size_t samples = 200;
    std::uint64_t seed = 7;
    RMat pi0;          ///< empty means 0.2 I
    double horizon = 1.0;
    std::size_t bound_points = 11;
    /// Initial state: product of coherent states with this amplitude (0 is vacuum).
    double coherent_amplitude = 0.0;
    /// Fault injection: Gamma is multiplied by this factor before Y and U are
    /// formed in the PDE residual check.
    double gamma_scale = 1.0;
    Exec exec = Exec::parallel;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    SigmaEstimate sigma;
    int cutoff = 0;
    Eigen::Index dim = 0;

    bool all_passed() const;
    std::vector<std::string> failed() const;
    const CheckResult* find(const std::string& name) const;
};

int default_cutoff(int n_modes);

/// Run every oracle check on one system.
VerifyReport run_verification(const SystemSpec& spec, const VerifyOptions& options = {});

}  // namespace qrsm
