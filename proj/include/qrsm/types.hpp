#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qrsm {

using cplx = std::complex<double>;

using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

/// Square matrix whose entries are operators on a common (truncated) space.
/// Indexed as ops[row][col].
using OpMatrix = std::vector<std::vector<CMat>>;

inline constexpr cplx kI{0.0, 1.0};

/// Frobenius pairing <K, L> = Tr(K^* L) for real matrices.
inline double frob(const RMat& k, const RMat& l) { return (k.array() * l.array()).sum(); }

/// Frobenius pairing <K, L> = Tr(K^* L) for complex matrices.
inline cplx frob(const CMat& k, const CMat& l) { return (k.conjugate().array() * l.array()).sum(); }

inline double hermitian_residual(const CMat& m) { return (m - m.adjoint()).norm(); }

/// ||M - M^*|| / ||M||, zero for the zero matrix.
inline double relative_hermitian_residual(const CMat& m)
{
    const double scale = m.norm();
    return scale > 0.0 ? hermitian_residual(m) / scale : 0.0;
}

inline RMat symmetrized(const RMat& m) { return 0.5 * (m + m.transpose()); }
inline CMat hermitized(const CMat& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace qrsm
