#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include "qrsm/dynamics.hpp"
#include "qrsm/error.hpp"
#include "qrsm/spectral.hpp"

using namespace qrsm;
using namespace qrsm::test;

TEST_CASE("tau on small examples")
{
    const RMat i2 = RMat::Identity(2, 2);
    CHECK(tau(i2, i2, i2) == doctest::Approx(1.0));
    CHECK(tau(RMat::Zero(2, 2), i2, i2) == 0.0);
    CHECK(tau(theta2(), i2, 0.2 * i2) == doctest::Approx(0.2));
    const RMat b = (RMat(2, 1) << 1.0, 2.0).finished();
    const RMat v = (RMat(1, 1) << 3.0).finished();
    const RMat pi = (RMat(2, 2) << 1.0, 0.5, 0.5, 2.0).finished();
    // B V B^T = 3 [[1, 2], [2, 4]]
    CHECK(tau(b, v, pi) == doctest::Approx(0.5 * 3.0 * (1.0 + 2.0 * 0.5 * 2.0 + 4.0 * 2.0)));
}

TEST_CASE("without field coupling the characteristic is a congruence")
{
    const RMat r = (RMat(2, 2) << 2.0, 0.3, 0.3, 0.5).finished();
    const SystemSpec spec = decoupled(r);
    const DerivedMatrices d = derive_structure(spec);
    const RMat pi0 = (RMat(2, 2) << 0.3, 0.05, 0.05, 0.2).finished();
    for (double sigma : {0.0, 0.7}) {
        const auto traj = integrate_characteristic(spec, d, pi0, sigma, 1.5);
        REQUIRE(traj.status == CharacteristicTrajectory::Status::completed);
        REQUIRE(traj.size() == 101);
        for (std::size_t k = 0; k < traj.size(); k += 10) {
            const double t = traj.times[k];
            const RMat e = taylor_expm(RMat(-t * d.a_matrix));
            const RMat expected = std::exp(-sigma * t) * e.transpose() * pi0 * e;
            CHECK(max_abs(traj.pi_path[k] - expected) < 1e-7 * max_abs(pi0));
            CHECK(traj.tau_path[k] == 0.0);
            CHECK(std::abs(traj.exponent_path[k]) < 1e-14);
        }
    }
}

TEST_CASE("Gronwall bound is constant when the exponent vanishes")
{
    const SystemSpec spec = decoupled();
    const auto traj = gronwall_bound(integrate_characteristic(spec, derive_structure(spec), 0.2 * RMat::Identity(2, 2), 0.0, 1.0), 1.7);
    for (double b : traj.bound_path) CHECK(b == doctest::Approx(1.7).epsilon(1e-14));
}

TEST_CASE("Gronwall bound is the trapezoid integral of the exponent")
{
    CharacteristicTrajectory traj;
    traj.times = {0.0, 0.5, 1.0, 2.0};
    traj.exponent_path = {1.0, 1.0, 3.0, 3.0};
    traj.pd_ok = {true, true, true, true};
    traj.pi_path.assign(4, RMat::Identity(2, 2));
    traj.tau_path.assign(4, 0.0);
    const auto b = gronwall_bound(traj, 2.0).bound_path;
    CHECK(b[0] == 2.0);
    CHECK(b[1] == doctest::Approx(2.0 * std::exp(0.5)));
    CHECK(b[2] == doctest::Approx(2.0 * std::exp(1.5)));
    CHECK(b[3] == doctest::Approx(2.0 * std::exp(4.5)));

    traj.pd_ok[2] = false;
    const auto cut = gronwall_bound(traj, 2.0).bound_path;
    CHECK(std::isnan(cut[2]));
    CHECK(std::isnan(cut[3]));
    CHECK_THROWS_AS(gronwall_bound(traj, 0.0), InvariantError);
}

TEST_CASE("characteristic of the single-mode demo")
{
    const SystemSpec spec = single_mode();
    const DerivedMatrices d = derive_structure(spec);
    const RMat pi0 = 0.2 * RMat::Identity(2, 2);
    const auto traj = gronwall_bound(integrate_characteristic(spec, d, pi0, 0.0, 1.0), 1.2);
    REQUIRE(traj.status == CharacteristicTrajectory::Status::completed);
    CHECK(traj.max_orthogonality_residual == 0.0);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        CHECK(traj.pd_ok[k]);
        CHECK(max_abs(traj.pi_path[k] - traj.pi_path[k].transpose()) == 0.0);
        CHECK(std::isfinite(traj.bound_path[k]));
    }

    SUBCASE("refining the output grid leaves the path unchanged")
    {
        CharacteristicOptions fine;
        fine.output_intervals = 400;
        const auto t2 = integrate_characteristic(spec, d, pi0, 0.0, 1.0, fine);
        CHECK(max_abs(t2.pi_path.back() - traj.pi_path.back()) < 1e-7);
        const auto b2 = gronwall_bound(t2, 1.2);
        CHECK(b2.bound_path.back() == doctest::Approx(traj.bound_path.back()).epsilon(1e-4));
    }

    SUBCASE("the vector field matches a finite difference of the path")
    {
        const double h = traj.times[1] - traj.times[0];
        const RMat fd = (traj.pi_path[2] - traj.pi_path[0]) / (2.0 * h);
        const RMat& p = traj.pi_path[1];
        const auto at = drift_at(spec, d, p);
        const RMat field = -(d.a_matrix.transpose() * p + p * d.a_matrix + 2.0 * at.drift.y_matrix);
        CHECK(max_abs(fd - field) < 1e-4 * max_abs(field));
    }
}

TEST_CASE("a fast decay leaves the cone and stops the integration")
{
    const SystemSpec spec = decoupled();
    const auto traj = integrate_characteristic(spec, derive_structure(spec), 0.2 * RMat::Identity(2, 2), 60.0, 2.0);
    CHECK(traj.status != CharacteristicTrajectory::Status::completed);
    CHECK_FALSE(traj.message.empty());
    CHECK(traj.times.back() < 2.0);
}

TEST_CASE("integrate_characteristic rejects invalid arguments")
{
    const SystemSpec spec = single_mode();
    const DerivedMatrices d = derive_structure(spec);
    const RMat pi0 = 0.2 * RMat::Identity(2, 2);
    CHECK_THROWS_AS(integrate_characteristic(spec, d, pi0, 0.0, 0.0), InvariantError);
    CHECK_THROWS_AS(integrate_characteristic(spec, d, pi0, -1.0, 1.0), InvariantError);
    CHECK_THROWS_AS(integrate_characteristic(spec, d, -pi0, 0.0, 1.0), InvariantError);
    CHECK_THROWS_AS(integrate_characteristic(spec, d, RMat::Identity(3, 3), 0.0, 1.0), InvariantError);
}

TEST_CASE("small-Pi expansion")
{
    CHECK(small_pi_expansion(0.1 * RMat::Identity(2, 2), RMat::Identity(2, 2)) == doctest::Approx(1.1));
    CHECK(small_pi_expansion(0.1 * RMat::Identity(2, 2), RMat::Identity(2, 2)) <= std::exp(0.1));
    CHECK(small_pi_expansion(RMat::Zero(2, 2), RMat::Identity(2, 2)) == 1.0);
}

TEST_CASE("trajectory CSV layout")
{
    const SystemSpec spec = single_mode();
    CharacteristicOptions opt;
    opt.output_intervals = 4;
    const auto traj = gronwall_bound(
        integrate_characteristic(spec, derive_structure(spec), 0.2 * RMat::Identity(2, 2), 0.0, 1.0, opt), 1.0);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,pi_1_1,pi_1_2,pi_2_1,pi_2_2,tau,exponent,bound,pd_ok");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 8);
        CHECK(line.back() == '1');
    }
    CHECK(rows == 5);
    CHECK(to_string(CharacteristicTrajectory::Status::left_cone) == "left_cone");
}
