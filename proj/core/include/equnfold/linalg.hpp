#pragma once

// Dense complex linear algebra helpers shared by every module. All rank and
// span decisions go through singular values with a relative cutoff.

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace equnfold {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;

inline constexpr double kRankTolerance = 1e-9;

/// Numerical rank: number of singular values above rel_tol * sigma_max.
[[nodiscard]] int numerical_rank(const CMatrix& m, double rel_tol = kRankTolerance);

/// Orthonormal basis (as columns) of the null space of m.
[[nodiscard]] CMatrix null_space(const CMatrix& m, double rel_tol = kRankTolerance);

/// Orthonormal basis (as columns) of the column space of m.
[[nodiscard]] CMatrix column_space(const CMatrix& m, double rel_tol = kRankTolerance);

/// Minimum-norm least-squares solution of a x = b.
[[nodiscard]] CMatrix min_norm_solve(const CMatrix& a, const CMatrix& b);

/// Smallest over largest singular value; 0 for an empty matrix.
[[nodiscard]] double inverse_condition(const CMatrix& m);

/// Column-major vectorisation and its inverse.
[[nodiscard]] CVector vec(const CMatrix& m);
[[nodiscard]] CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols);

/// Stack vec(m_i) as the columns of one matrix.
[[nodiscard]] CMatrix vec_columns(std::span<const CMatrix> matrices);

[[nodiscard]] double max_abs(const CMatrix& m);

/// The n x n all-ones matrix minus the identity.
[[nodiscard]] CMatrix ones_minus_identity(Eigen::Index n);

/// Reduced row echelon form of m (partial pivoting, entries below tol
/// treated as zero). Returns the pivot columns through `pivots` if given.
[[nodiscard]] CMatrix rref(const CMatrix& m, double tol, std::vector<int>* pivots = nullptr);

}  // namespace equnfold
