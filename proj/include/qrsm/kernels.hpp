#pragma once

#include <functional>
#include <vector>

#include "qrsm/quadrature.hpp"
#include "qrsm/types.hpp"

// Data-parallel hot loops of the oracle. Every kernel has a serial reference
// and an OpenMP variant selected by `Exec`; the OpenMP variant stores one
// result per index and reduces in index order, so both give bitwise-equal
// output for any thread count.

namespace qrsm {

enum class Exec { serial, parallel };

/// f(0), ..., f(count - 1), evaluated concurrently under Exec::parallel.
/// The first exception thrown by any f(i) is rethrown on the caller.
std::vector<CMat> map_indices(std::size_t count, const std::function<CMat(std::size_t)>& f, Exec exec);

/// Ordered sum of map_indices.
CMat sum_indices(std::size_t count, const std::function<CMat(std::size_t)>& f, Exec exec);

/// W_ab = sum_i w_i exp(-lambda_i (d_a - d_b)): the integral of the conjugation
/// superoperator in the eigenbasis of xi (eigenvalues d).
RMat conjugation_weights(const RVec& evals, const QuadratureRule& rule, Exec exec);

/// In the eigenbasis of xi, the nested integral
///     int_{-1/2}^{1/2} sum_jk omega_jk E_l(g_j) int_{-1/2}^{l} E_u(g_k) du dl
/// with Gauss-Legendre rules: `outer` on [-1/2, 1/2], an `inner_nodes` rule
/// rescaled onto [-1/2, l] for every outer node.
CMat ito_double_integral(const RVec& evals, const std::vector<CMat>& g_eig, const CMat& omega,
                         const QuadratureRule& outer, std::size_t inner_nodes, Exec exec);

/// min over ops of the smallest eigenvalue of the Hermitian part.
double sampled_min_eigenvalue(const std::vector<CMat>& ops, Exec exec);

}  // namespace qrsm
