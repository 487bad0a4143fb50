// Serial reference vs OpenMP for the oracle's hot loops.
//
//   qrsm_bench --benchmark_filter=ito

#include <random>

#include <benchmark/benchmark.h>

#include "qrsm/fock_space.hpp"
#include "qrsm/kernels.hpp"
#include "qrsm/quadrature.hpp"

using namespace qrsm;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

struct Fixture {
    TruncatedSpace space;
    Conjugator conj;
    std::vector<CMat> g_eig;

    explicit Fixture(int cutoff)
        : space(build_space(1, cutoff, standard_ccr_matrix(2))), conj(xi_operator(space, 0.2 * RMat::Identity(2, 2)))
    {
        for (const auto& x : space.x_ops) g_eig.push_back(conj.to_eigenbasis(x));
    }
};

void BM_ConjugationWeights(benchmark::State& state)
{
    const Fixture fx(static_cast<int>(state.range(0)));
    const auto rule = centered_rule(64);
    for (auto _ : state) benchmark::DoNotOptimize(conjugation_weights(fx.conj.eigenvalues(), rule, exec_of(state)));
}

void BM_ItoDoubleIntegral(benchmark::State& state)
{
    const Fixture fx(static_cast<int>(state.range(0)));
    const auto outer = centered_rule(32);
    const CMat omega = vacuum_ito_matrix(2);
    for (auto _ : state)
        benchmark::DoNotOptimize(ito_double_integral(fx.conj.eigenvalues(), fx.g_eig, omega, outer, 32, exec_of(state)));
}

void BM_SampledMinEigenvalue(benchmark::State& state)
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    const auto dim = state.range(0);
    std::vector<CMat> ops(200);
    for (auto& op : ops) {
        op.resize(dim, dim);
        for (Eigen::Index i = 0; i < op.size(); ++i) op(i) = cplx(nd(rng), nd(rng));
    }
    for (auto _ : state) benchmark::DoNotOptimize(sampled_min_eigenvalue(ops, exec_of(state)));
}

}  // namespace

// Second argument: 0 serial, 1 OpenMP.
BENCHMARK(BM_ConjugationWeights)->ArgsProduct({{30, 60}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ItoDoubleIntegral)->ArgsProduct({{30, 60}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampledMinEigenvalue)->ArgsProduct({{18, 36}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
