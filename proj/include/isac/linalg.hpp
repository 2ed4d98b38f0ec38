#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace isac {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

constexpr Complex kImag{0.0, 1.0};

// Symmetrize a nominally Hermitian matrix, removing fp asymmetry.
inline CMat hermitize(const CMat& m) { return 0.5 * (m + m.adjoint()); }

/// Natural-log determinant of a Hermitian positive-definite matrix.
/// Throws std::runtime_error if the matrix is not numerically PD.
double logdet_hpd(const CMat& m, const char* what = "matrix");

/// log2 det(I + S * J^{-1}) for Hermitian PSD S and Hermitian PD J,
/// computed as logdet(J + S) - logdet(J) to stay on the Hermitian cone.
double log2det_ratio(const CMat& s, const CMat& j, const char* what = "matrix");

/// Orthonormal basis of the null space of `m` (right null space).
/// Singular values below rel_tol * sigma_max count as zero. May have
/// zero columns when `m` has full column rank.
CMat null_space_basis(const CMat& m, double rel_tol = 1e-10);

/// Orthonormal basis of the row space of `m` (right singular vectors
/// with non-negligible singular value).
CMat row_space_basis(const CMat& m, double rel_tol = 1e-10);

/// Orthogonal projector onto the column space of `m`.
CMat range_projector(const CMat& m, double rel_tol = 1e-10);

/// Orthonormal basis of the column span of `m`, with width equal to its
/// numerical rank (columns whose pivot falls below rel_threshold times the
/// largest are dropped). May be zero-width for m == 0.
CMat orthonormal_range(const CMat& m, double rel_threshold = 1e-12);

/// Relative residual of the projection of `x` onto the column space of
/// `basis`: ||(I - P)x||_F / ||x||_F. Returns 0 for x == 0.
double projection_residual(const CMat& basis, const CMat& x);

/// Dominant generalized eigenvector of (a, b) with a Hermitian PSD and
/// b Hermitian PD: maximizer of x^H a x / x^H b x.
CVec dominant_generalized_eigvec(const CMat& a, const CMat& b);

}  // namespace isac
