#pragma once

#include <Eigen/Dense>

#include <vector>

namespace sketchpinv {

/// Column-major real matrix. Carries A, the iterates X_k and explicit sketches.
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative cut-off below which a singular value (or eigenvalue) is treated as zero.
inline constexpr double kDefaultRelTol = 1e-12;

/// Sorted (descending) singular values or eigenvalues together with the
/// numerical rank they imply.
struct SpectralInfo {
  std::vector<double> values;
  Index rank = 0;
  double zero_threshold = 0.0;
};

/// Moore-Penrose pseudoinverse via SVD. Singular values at or below
/// rel_tol * sigma_max are inverted to zero. Throws std::invalid_argument
/// ("empty matrix") when A has a zero dimension.
DenseMatrix pinv_exact(const DenseMatrix& A, double rel_tol = kDefaultRelTol);

/// Pseudoinverse of a symmetric positive semidefinite matrix through its
/// eigendecomposition. The result is symmetric by construction.
/// Throws std::invalid_argument ("not symmetric") when
/// ||G - G^T||_F > 1e-12 ||G||_F.
DenseMatrix pinv_psd(const DenseMatrix& G, double rel_tol = kDefaultRelTol);

/// Smallest eigenvalue of the PSD matrix G strictly above rel_tol * lambda_max.
/// Returns 0 for the zero matrix.
double lambda_min_plus(const DenseMatrix& G, double rel_tol = kDefaultRelTol);

SpectralInfo singular_spectrum(const DenseMatrix& A, double rel_tol = kDefaultRelTol);

/// Eigenvalues of a symmetric matrix, descending. Negative rounding noise is
/// kept in `values`; only values above the threshold count towards `rank`.
SpectralInfo symmetric_spectrum(const DenseMatrix& G, double rel_tol = kDefaultRelTol);

Index numerical_rank(const DenseMatrix& A, double rel_tol = kDefaultRelTol);

/// Kronecker product with (A (x) B)_{p(r-1)+i, q(s-1)+j} = a_rs b_ij.
DenseMatrix kron(const DenseMatrix& A, const DenseMatrix& B);

/// Column stacking; returns a (rows*cols) x 1 matrix.
DenseMatrix vec(const DenseMatrix& A);

/// ||A X A - A||_F, evaluated as A (X A) - A. X must be cols(A) x rows(A).
double residual(const DenseMatrix& A, const DenseMatrix& X);

/// Orthogonal projector A A^+ onto Range(A).
DenseMatrix range_projector(const DenseMatrix& A, double rel_tol = kDefaultRelTol);

bool is_symmetric(const DenseMatrix& G, double rel_tol = 1e-12);

bool all_finite(const DenseMatrix& A);

}  // namespace sketchpinv
