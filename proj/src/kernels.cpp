#include "qrsm/kernels.hpp"

#include <cmath>
#include <exception>
#include <limits>

namespace qrsm {

namespace {

template <class Body>
void for_each_index(std::size_t count, Exec exec, Body&& body)
{
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(qrsm_kernel_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

RMat node_weights(const RVec& evals, double lambda)
{
    const auto d = evals.size();
    RMat w(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) w(a, b) = std::exp(-lambda * (evals(a) - evals(b)));
    return w;
}

}  // namespace

std::vector<CMat> map_indices(std::size_t count, const std::function<CMat(std::size_t)>& f, Exec exec)
{
    std::vector<CMat> out(count);
    for_each_index(count, exec, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

CMat sum_indices(std::size_t count, const std::function<CMat(std::size_t)>& f, Exec exec)
{
    auto parts = map_indices(count, f, exec);
    if (parts.empty()) return {};
    CMat acc = std::move(parts[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) acc += parts[i];
    return acc;
}

RMat conjugation_weights(const RVec& evals, const QuadratureRule& rule, Exec exec)
{
    std::vector<RMat> parts(rule.size());
    for_each_index(rule.size(), exec,
                   [&](std::size_t i) { parts[i] = rule.weights[i] * node_weights(evals, rule.nodes[i]); });
    RMat acc = RMat::Zero(evals.size(), evals.size());
    for (const auto& p : parts) acc += p;
    return acc;
}

CMat ito_double_integral(const RVec& evals, const std::vector<CMat>& g_eig, const CMat& omega,
                         const QuadratureRule& outer, std::size_t inner_nodes, Exec exec)
{
    const auto m = static_cast<Eigen::Index>(g_eig.size());
    const auto d = evals.size();
    if (omega.rows() != m || omega.cols() != m) return CMat::Zero(d, d);
    const QuadratureRule inner_ref = gauss_legendre(inner_nodes, -1.0, 1.0);

    return sum_indices(
        outer.size(),
        [&](std::size_t i) -> CMat {
            const double lambda = outer.nodes[i];
            const RMat w_outer = node_weights(evals, lambda);
            const RMat w_inner = conjugation_weights(evals, inner_ref.on(-0.5, lambda), Exec::serial);
            CMat acc = CMat::Zero(d, d);
            for (Eigen::Index k = 0; k < m; ++k) {
                const CMat inner_k = g_eig[static_cast<std::size_t>(k)].cwiseProduct(w_inner.cast<cplx>());
                CMat left = CMat::Zero(d, d);
                for (Eigen::Index j = 0; j < m; ++j)
                    if (omega(j, k) != 0.0) left += omega(j, k) * g_eig[static_cast<std::size_t>(j)];
                acc += left.cwiseProduct(w_outer.cast<cplx>()) * inner_k;
            }
            return outer.weights[i] * acc;
        },
        exec);
}

double sampled_min_eigenvalue(const std::vector<CMat>& ops, Exec exec)
{
    std::vector<double> mins(ops.size(), std::numeric_limits<double>::infinity());
    for_each_index(ops.size(), exec, [&](std::size_t i) {
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(ops[i]), Eigen::EigenvaluesOnly);
        mins[i] = es.eigenvalues()(0);
    });
    double out = std::numeric_limits<double>::infinity();
    for (double v : mins) out = std::min(out, v);
    return out;
}

}  // namespace qrsm
