#include "sketchpinv/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace sketchpinv {

namespace {

void require_nonempty(const DenseMatrix& A) {
  if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("empty matrix");
}

void require_symmetric(const DenseMatrix& G) {
  if (G.rows() != G.cols()) throw std::invalid_argument("not symmetric: matrix is not square");
  if (!is_symmetric(G)) throw std::invalid_argument("not symmetric");
}

Eigen::SelfAdjointEigenSolver<DenseMatrix> symmetric_eigen(const DenseMatrix& G) {
  // Average with the transpose so that round-off asymmetry below the
  // accepted tolerance does not leak into the decomposition.
  const DenseMatrix sym = 0.5 * (G + G.transpose());
  return Eigen::SelfAdjointEigenSolver<DenseMatrix>(sym);
}

}  // namespace

bool is_symmetric(const DenseMatrix& G, double rel_tol) {
  if (G.rows() != G.cols()) return false;
  const double scale = G.norm();
  return (G - G.transpose()).norm() <= rel_tol * scale;
}

bool all_finite(const DenseMatrix& A) { return A.allFinite(); }

DenseMatrix pinv_exact(const DenseMatrix& A, double rel_tol) {
  require_nonempty(A);
  Eigen::BDCSVD<DenseMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? rel_tol * sigma(0) : 0.0;
  Vector inv = Vector::Zero(sigma.size());
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) inv(i) = 1.0 / sigma(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

DenseMatrix pinv_psd(const DenseMatrix& G, double rel_tol) {
  require_symmetric(G);
  if (G.size() == 0) return G;
  const auto eig = symmetric_eigen(G);
  const Vector& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  if (!(lambda_max > 0.0)) return DenseMatrix::Zero(G.rows(), G.cols());
  const double cutoff = rel_tol * lambda_max;
  Vector inv = Vector::Zero(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > cutoff) inv(i) = 1.0 / lambda(i);
  }
  const DenseMatrix& V = eig.eigenvectors();
  DenseMatrix P = V * inv.asDiagonal() * V.transpose();
  return 0.5 * (P + P.transpose());
}

double lambda_min_plus(const DenseMatrix& G, double rel_tol) {
  require_symmetric(G);
  const SpectralInfo info = symmetric_spectrum(G, rel_tol);
  if (info.rank == 0) return 0.0;
  return info.values[static_cast<std::size_t>(info.rank - 1)];
}

SpectralInfo singular_spectrum(const DenseMatrix& A, double rel_tol) {
  SpectralInfo info;
  if (A.size() == 0) return info;
  Eigen::BDCSVD<DenseMatrix> svd(A);
  const Vector& sigma = svd.singularValues();
  info.values.assign(sigma.data(), sigma.data() + sigma.size());
  info.zero_threshold = sigma.size() > 0 ? rel_tol * sigma(0) : 0.0;
  info.rank = std::count_if(info.values.begin(), info.values.end(),
                            [&](double s) { return s > info.zero_threshold; });
  return info;
}

SpectralInfo symmetric_spectrum(const DenseMatrix& G, double rel_tol) {
  require_symmetric(G);
  SpectralInfo info;
  if (G.size() == 0) return info;
  const auto eig = symmetric_eigen(G);
  const Vector& lambda = eig.eigenvalues();
  info.values.assign(lambda.data(), lambda.data() + lambda.size());
  std::sort(info.values.begin(), info.values.end(), std::greater<>());
  const double lambda_max = std::max(info.values.front(), 0.0);
  info.zero_threshold = rel_tol * lambda_max;
  info.rank = std::count_if(info.values.begin(), info.values.end(),
                            [&](double v) { return v > info.zero_threshold; });
  return info;
}

Index numerical_rank(const DenseMatrix& A, double rel_tol) {
  return singular_spectrum(A, rel_tol).rank;
}

DenseMatrix kron(const DenseMatrix& A, const DenseMatrix& B) {
  const Index p = B.rows();
  const Index q = B.cols();
  DenseMatrix K(A.rows() * p, A.cols() * q);
  for (Index s = 0; s < A.cols(); ++s) {
    for (Index r = 0; r < A.rows(); ++r) {
      K.block(r * p, s * q, p, q) = A(r, s) * B;
    }
  }
  return K;
}

DenseMatrix vec(const DenseMatrix& A) {
  return A.reshaped(A.size(), 1);
}

double residual(const DenseMatrix& A, const DenseMatrix& X) {
  if (X.rows() != A.cols() || X.cols() != A.rows()) {
    throw std::invalid_argument("residual: shape mismatch, X must be cols(A) x rows(A)");
  }
  const DenseMatrix XA = X * A;
  return (A * XA - A).norm();
}

DenseMatrix range_projector(const DenseMatrix& A, double rel_tol) {
  require_nonempty(A);
  Eigen::BDCSVD<DenseMatrix> svd(A, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? rel_tol * sigma(0) : 0.0;
  Index r = 0;
  while (r < sigma.size() && sigma(r) > cutoff) ++r;
  const auto U = svd.matrixU().leftCols(r);
  return U * U.transpose();
}

}  // namespace sketchpinv
