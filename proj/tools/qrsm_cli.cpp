// qrsm: analyze a system, propagate Gronwall bounds, run the oracle checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "qrsm/dynamics.hpp"
#include "qrsm/error.hpp"
#include "qrsm/fock_space.hpp"
#include "qrsm/json_io.hpp"
#include "qrsm/model.hpp"
#include "qrsm/spectral.hpp"
#include "qrsm/verify.hpp"

namespace fs = std::filesystem;
using namespace qrsm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

struct RunConfig {
    std::string system_path;
    std::string pi0 = "0.2";
    double sigma = 0.0;
    double horizon = 1.0;
    std::string output_dir = ".";
    int cutoff = 0;
    std::size_t quad_nodes = 32;
    std::uint64_t seed = 7;
    double xi0 = 0.0;  // 0: take the oracle's vacuum RSM at pi0
    std::size_t intervals = 100;
    bool corrupt_gamma = false;
};

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// "0.2" means 0.2 I; otherwise a JSON row list such as "[[1,0],[0,2]]".
RMat parse_pi0(const std::string& text, Eigen::Index n)
{
    try {
        std::size_t used = 0;
        const double scalar = std::stod(text, &used);
        if (used == text.size()) return scalar * RMat::Identity(n, n);
    } catch (const std::exception&) {
    }
    json rows;
    try {
        rows = json::parse(text);
    } catch (const json::exception&) {
        throw UsageError("--pi0: expected a number or a JSON row list, got '" + text + "'");
    }
    RMat pi;
    try {
        pi = real_matrix_from_json(json{{"rows", rows}}, "pi0");
    } catch (const Error& e) {
        throw UsageError(std::string("--pi0: ") + e.what());
    }
    if (pi.rows() != n || pi.cols() != n) throw UsageError("--pi0: expected an " + std::to_string(n) + " x " + std::to_string(n) + " matrix");
    return pi;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream os(path);
    if (!os) throw UsageError("cannot write " + path.string());
    os << text;
}

json analysis_json(const SystemSpec& spec, const RMat& pi0)
{
    const DerivedMatrices d = derive_structure(spec);
    const DriftAtPi at = drift_at(spec, d, pi0);
    json out;
    out["pi0"] = real_matrix_to_json(pi0);
    out["V"] = real_matrix_to_json(d.v_matrix);
    out["J"] = real_matrix_to_json(d.j_matrix);
    out["B"] = real_matrix_to_json(d.b_matrix);
    out["A"] = real_matrix_to_json(d.a_matrix);
    out["exponents"] = std::vector<double>(at.fact.exponents.data(), at.fact.exponents.data() + at.fact.exponents.size());
    out["Gamma"] = complex_matrix_to_json(at.drift.gamma);
    out["Y"] = real_matrix_to_json(at.drift.y_matrix);
    out["U"] = real_matrix_to_json(at.drift.u_matrix);
    out["tau"] = tau(d.b_matrix, d.v_matrix, pi0);
    out["U_theta_half"] = 0.5 * frob(at.drift.u_matrix, spec.theta);
    out["residuals"] = {
        {"gamma_hermitian", at.drift.gamma_hermitian_residual},
        {"y_symmetry", at.drift.y_symmetry_residual},
        {"u_antisymmetry", at.drift.u_antisymmetry_residual},
        {"spectral_reconstruction", at.fact.reconstruction_residual},
    };
    return out;
}

int cmd_analyze(const RunConfig& cfg)
{
    const SystemSpec spec = load_system(cfg.system_path);
    const RMat pi0 = parse_pi0(cfg.pi0, spec.n());
    fs::create_directories(cfg.output_dir);
    const fs::path path = fs::path(cfg.output_dir) / "analysis.json";
    write_text(path, analysis_json(spec, pi0).dump(2) + "\n");
    std::cout << "wrote " << path.string() << "\n";
    return kExitOk;
}

int cmd_bound(const RunConfig& cfg)
{
    const SystemSpec spec = load_system(cfg.system_path);
    const RMat pi0 = parse_pi0(cfg.pi0, spec.n());
    double xi0 = cfg.xi0;
    if (xi0 <= 0.0) {
        const int modes = static_cast<int>(spec.n() / 2);
        const auto space = build_space(modes, cfg.cutoff > 0 ? cfg.cutoff : default_cutoff(modes), spec.theta);
        xi0 = rsm(space, vacuum_state(space), pi0);
    }
    CharacteristicOptions opt;
    opt.output_intervals = cfg.intervals;
    auto traj = gronwall_bound(integrate_characteristic(spec, derive_structure(spec), pi0, cfg.sigma, cfg.horizon, opt), xi0);

    fs::create_directories(cfg.output_dir);
    const fs::path path = fs::path(cfg.output_dir) / "trajectory.csv";
    std::ofstream os(path);
    if (!os) throw UsageError("cannot write " + path.string());
    write_trajectory_csv(os, traj);
    os.close();

    if (traj.status != CharacteristicTrajectory::Status::completed) {
        std::cerr << "bound: " << traj.message << " (last good t = " << traj.times.back() << ")\n";
        return kExitVerifyFailed;
    }
    std::printf("xi0 %.17g\nfinal_bound %.17g\n", xi0, traj.bound_path.back());
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg)
{
    const SystemSpec spec = load_system(cfg.system_path);
    VerifyOptions opt;
    opt.cutoff = cfg.cutoff;
    opt.quad_nodes = cfg.quad_nodes;
    opt.seed = cfg.seed;
    opt.pi0 = parse_pi0(cfg.pi0, spec.n());
    opt.horizon = cfg.horizon;
    if (cfg.corrupt_gamma) opt.gamma_scale = 2.0;
    const VerifyReport report = run_verification(spec, opt);

    json out;
    out["cutoff"] = report.cutoff;
    out["dim"] = report.dim;
    out["seed"] = cfg.seed;
    out["quad_nodes"] = cfg.quad_nodes;
    out["sigma_hat"] = {{"sigma", report.sigma.sigma}, {"margin", report.sigma.margin}, {"certified", report.sigma.certified}};
    out["checks"] = json::array();
    for (const auto& c : report.checks) {
        json j{{"name", c.name}, {"description", c.description}, {"residual", c.residual},
               {"tolerance", c.tolerance}, {"pass", c.passed}};
        if (c.skipped) j["skipped"] = true;
        if (!c.note.empty()) j["note"] = c.note;
        out["checks"].push_back(j);
    }
    out["all_pass"] = report.all_passed();

    fs::create_directories(cfg.output_dir);
    const fs::path path = fs::path(cfg.output_dir) / "verify.json";
    write_text(path, out.dump(2) + "\n");
    for (const auto& c : report.checks)
        std::printf("%-26s %s  residual %.3e  tol %.3g\n", c.name.c_str(),
                    c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL"), c.residual, c.tolerance);
    if (!report.all_passed()) {
        for (const auto& name : report.failed()) std::cerr << "verify: check failed: " << name << "\n";
        return kExitVerifyFailed;
    }
    return kExitOk;
}

void add_common(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--system", cfg.system_path, "system configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--pi0", cfg.pi0, "risk parameter: scalar s for s*I, or a JSON row list");
    sub->add_option("--out", cfg.output_dir, "output directory");
    sub->add_option("--cutoff", cfg.cutoff, "Fock levels per mode (0: 30 for one mode, 12 otherwise)")
        ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Risk-sensitive moment bounds for perturbed open quantum harmonic oscillators"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* analyze = app.add_subcommand("analyze", "structure matrices, Gamma, Y, U and tau at pi0");
    add_common(analyze, cfg);

    auto* bound = app.add_subcommand("bound", "characteristic ODE and Gronwall bound trajectory");
    add_common(bound, cfg);
    bound->add_option("--sigma", cfg.sigma, "perturbation class parameter")->check(CLI::NonNegativeNumber);
    bound->add_option("--horizon", cfg.horizon, "final time (> 0)");
    bound->add_option("--xi0", cfg.xi0, "initial RSM (default: vacuum RSM at pi0)");
    bound->add_option("--intervals", cfg.intervals, "output grid intervals")->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "truncated-Fock oracle check suite");
    add_common(verify, cfg);
    verify->add_option("--horizon", cfg.horizon, "final time of the bound check (> 0)");
    verify->add_option("--quad-nodes", cfg.quad_nodes, "Gauss-Legendre nodes (>= 16)")->check(CLI::Range(16, 512));
    verify->add_option("--seed", cfg.seed, "superpositivity sampling seed");
    verify->add_flag("--corrupt-gamma", cfg.corrupt_gamma, "test hook: double Gamma in the PDE residual");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (!(cfg.horizon > 0.0)) throw UsageError("--horizon must be positive");
        if (*analyze) return cmd_analyze(cfg);
        if (*bound) return cmd_bound(cfg);
        return cmd_verify(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qrsm::Error& e) {
        std::cerr << "error [" << e.module() << "]: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
