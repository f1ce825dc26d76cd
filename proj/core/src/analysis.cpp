#include "sketchpinv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sketchpinv {

namespace {

void require_under_cap(const DenseMatrix& A, Index cap, const char* what) {
  if (A.rows() > cap || A.cols() > cap) {
    throw std::invalid_argument(std::string("analysis cap exceeded: ") + what + " is limited to dimensions <= " +
                                std::to_string(cap) + ", got " + std::to_string(A.rows()) + " x " +
                                std::to_string(A.cols()));
  }
}

double clamp_rate(double rho) { return std::clamp(rho, 0.0, 1.0); }

/// acc += p * S K S^T without materialising S.
void scatter_add(DenseMatrix& acc, const SketchSample& S, const DenseMatrix& K, double p) {
  if (!S.is_selection()) {
    const DenseMatrix Sd = materialize(S, acc.rows());
    acc.noalias() += p * (Sd * K * Sd.transpose());
    return;
  }
  const auto idx = S.indices();
  for (std::size_t j = 0; j < idx.size(); ++j) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      acc(idx[i], idx[j]) += p * K(static_cast<Index>(i), static_cast<Index>(j));
    }
  }
}

DenseMatrix symmetrized(const DenseMatrix& M) { return 0.5 * (M + M.transpose()); }

DenseMatrix saxas_projection(const DenseMatrix& A, const SketchSample& S) {
  const DenseMatrix M = right_apply(A, S);
  const DenseMatrix G = symmetrized(M.transpose() * M);
  return symmetrized(M * pinv_psd(G) * M.transpose());
}

void require_symmetric_square(const DenseMatrix& A) {
  if (A.rows() != A.cols() || !is_symmetric(A)) throw std::invalid_argument("saxas analysis: matrix is not symmetric");
}

}  // namespace

Index analysis_cap() {
  if (const char* env = std::getenv("PINV_ANALYSIS_CAP")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<Index>(v);
  }
  return 200;
}

DenseMatrix satax_expected_projection(const DenseMatrix& A, const DiscreteSketchDistribution& dist) {
  if (dist.ambient() != A.cols()) throw std::invalid_argument("distribution ambient dimension must equal cols(A)");
  const DenseMatrix G = A.transpose() * A;
  DenseMatrix EH = DenseMatrix::Zero(G.rows(), G.cols());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const SketchSample& S = dist.samples()[i];
    const DenseMatrix W = right_apply(G, S);  // (A^T A) S
    const DenseMatrix K = pinv_psd(symmetrized(W.transpose() * W));
    scatter_add(EH, S, K, dist.probs()[i]);
  }
  return symmetrized(G * EH * G);
}

RateReport satax_rate_exact(const DenseMatrix& A, const DiscreteSketchDistribution& dist, Index cap) {
  require_under_cap(A, cap, "satax_rate_exact");
  const DenseMatrix EZ = satax_expected_projection(A, dist);
  const SpectralInfo ez = symmetric_spectrum(EZ);
  const Index range_rank = numerical_rank(A);
  const double lmin = ez.rank > 0 ? ez.values[static_cast<std::size_t>(ez.rank - 1)] : 0.0;

  RateReport report;
  report.rho_unclamped = 1.0 - lmin;
  report.rho_exact = clamp_rate(report.rho_unclamped);
  report.certified = report.rho_exact < 1.0 && ez.rank == range_rank;
  std::ostringstream note;
  note.precision(17);
  note << "lambda_min+(E[Z])=" << lmin << " rank(E[Z])=" << ez.rank << " rank(A^T A)=" << range_rank;
  if (ez.rank != range_rank) note << " (E[Z] does not span Range(A^T A))";
  report.spectrum_note = note.str();
  return report;
}

double scaled_condition_bound(const DenseMatrix& K) {
  const double trace = K.squaredNorm();
  if (!(trace > 0.0)) throw std::invalid_argument("scaled condition bound: zero sketched Gram matrix");
  // K^T K and K K^T share their nonzero eigenvalues; use the smaller one.
  const DenseMatrix gram = K.rows() <= K.cols() ? symmetrized(K * K.transpose()) : symmetrized(K.transpose() * K);
  return 1.0 - lambda_min_plus(gram) / trace;
}

double satax_rate_bound(const DenseMatrix& A, const DenseMatrix& stack) {
  if (stack.rows() != A.cols()) throw std::invalid_argument("satax_rate_bound: stack must have cols(A) rows");
  const DenseMatrix G = A.transpose() * A;
  return scaled_condition_bound(G * stack);
}

double projection_rate_bound(const DenseMatrix& A, const DenseMatrix& stack) {
  if (stack.rows() != A.cols()) throw std::invalid_argument("projection_rate_bound: stack must have cols(A) rows");
  return scaled_condition_bound(A * stack);
}

DenseMatrix saxas_expected_kron(const DenseMatrix& A, const DiscreteSketchDistribution& dist) {
  require_symmetric_square(A);
  if (dist.ambient() != A.cols()) throw std::invalid_argument("distribution ambient dimension must equal n");
  const Index n = A.rows();
  DenseMatrix E = DenseMatrix::Zero(n * n, n * n);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const DenseMatrix Z = saxas_projection(A, dist.samples()[i]);
    E.noalias() += dist.probs()[i] * kron(Z, Z);
  }
  return symmetrized(E);
}

RateReport saxas_rate_bound(const DenseMatrix& A, const DiscreteSketchDistribution& dist, Index cap) {
  require_under_cap(A, cap, "saxas_rate_bound");
  const DenseMatrix E = saxas_expected_kron(A, dist);
  const double lmin = lambda_min_plus(E);

  // Orthonormal basis of Range(A (x) A) = Range(U (x) U), U spanning Range(A).
  Eigen::BDCSVD<DenseMatrix> svd(A, Eigen::ComputeThinU);
  const Index r = numerical_rank(A);
  const DenseMatrix U = svd.matrixU().leftCols(r);
  double inf_rayleigh = 0.0;
  if (r > 0) {
    const DenseMatrix B = kron(U, U);
    const DenseMatrix restricted = symmetrized(B.transpose() * E * B);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(restricted, Eigen::EigenvaluesOnly);
    inf_rayleigh = eig.eigenvalues().minCoeff();
  }

  RateReport report;
  report.rho_unclamped = 1.0 - inf_rayleigh;
  report.rho_exact = clamp_rate(report.rho_unclamped);
  report.rho_bound = clamp_rate(1.0 - lmin);
  report.certified = saxas_convergence_certificate(A, dist.samples(), cap) && *report.rho_bound < 1.0;
  std::ostringstream note;
  note.precision(17);
  note << "lambda_min+(E[Z(x)Z])=" << lmin << " min Rayleigh quotient on Range(A(x)A)=" << inf_rayleigh
       << " rank(A)=" << r;
  report.spectrum_note = note.str();
  return report;
}

DenseMatrix kron_sketch_stack(std::span<const SketchSample> samples, Index n) {
  Index rows = 0;
  for (const auto& s : samples) rows += s.width() * s.width();
  DenseMatrix stack(rows, n * n);
  Index at = 0;
  for (const auto& s : samples) {
    const DenseMatrix St = materialize(s, n).transpose();
    const Index q = s.width();
    stack.middleRows(at, q * q) = kron(St, St);
    at += q * q;
  }
  return stack;
}

bool saxas_convergence_certificate(const DenseMatrix& A, std::span<const SketchSample> samples, Index cap) {
  require_under_cap(A, cap, "saxas_convergence_certificate");
  require_symmetric_square(A);
  const DenseMatrix AA = kron(A, A);
  const DenseMatrix stack = kron_sketch_stack(samples, A.rows());
  return numerical_rank(stack * AA) == numerical_rank(AA);
}

}  // namespace sketchpinv
