#pragma once

#include "sketchpinv/linalg.hpp"
#include "sketchpinv/sketching.hpp"

#include <optional>
#include <span>
#include <string>

namespace sketchpinv {

/// Theoretical convergence rate of a method under a discrete sketch distribution.
struct RateReport {
  /// Contraction factor of E||X_k - A^+||_F^2 per step, clamped to [0, 1].
  double rho_exact = 1.0;
  /// Value before clamping; lies in [-1e-10, 1 + 1e-10] up to round-off.
  double rho_unclamped = 1.0;
  /// Upper bound on rho_exact, when the method has one.
  std::optional<double> rho_bound;
  /// True when linear convergence is guaranteed.
  bool certified = false;
  std::string spectrum_note;
};

/// Dense-expectation cap on m and n. PINV_ANALYSIS_CAP overrides the default of 200.
Index analysis_cap();
/// Cap on n for the n^2 x n^2 Kronecker expectations of SAXAS.
inline constexpr Index kKroneckerCap = 12;

/// E[Z] = A^T A E[H_S] A^T A with H_S = S (S^T (A^T A)^2 S)^+ S^T.
DenseMatrix satax_expected_projection(const DenseMatrix& A, const DiscreteSketchDistribution& dist);

/// rho = 1 - lambda_min^+(A^T A E[H_S] A^T A). Certified when rho < 1 and
/// E[Z] spans Range(A^T A). Throws std::invalid_argument ("analysis cap ...")
/// when m or n exceeds `cap`.
RateReport satax_rate_exact(const DenseMatrix& A, const DiscreteSketchDistribution& dist,
                            Index cap = analysis_cap());

/// 1 - lambda_min^+(K^T K) / ||K||_F^2: the scaled-condition-number bound for K = G 𝕊.
double scaled_condition_bound(const DenseMatrix& K);

/// 1 - lambda_min^+(𝕊^T (A^T A)^2 𝕊) / Tr(𝕊^T (A^T A)^2 𝕊), valid under the
/// convenient probabilities. `stack` is [S_1, ..., S_r] (n x sum tau_i).
double satax_rate_bound(const DenseMatrix& A, const DenseMatrix& stack);

/// Same bound with A^T A in place of (A^T A)^2, for the range-projection method.
double projection_rate_bound(const DenseMatrix& A, const DenseMatrix& stack);

/// E[Z (x) Z] with Z = A S (S^T A^2 S)^+ S^T A, an n^2 x n^2 matrix.
DenseMatrix saxas_expected_kron(const DenseMatrix& A, const DiscreteSketchDistribution& dist);

/// SAXAS rate for symmetric A:
///   rho_bound = 1 - lambda_min^+(E[Z (x) Z]);
///   rho_exact = 1 - min over unit R = A Q A of <E[Z R Z], R>, computed on
///               an orthonormal basis of Range(A (x) A).
/// `certified` comes from saxas_convergence_certificate.
RateReport saxas_rate_bound(const DenseMatrix& A, const DiscreteSketchDistribution& dist,
                            Index cap = kKroneckerCap);

/// Rows S_i^T (x) S_i^T stacked over all samples: (sum tau_i^2) x n^2.
DenseMatrix kron_sketch_stack(std::span<const SketchSample> samples, Index n);

/// True iff Null(𝕊 (A (x) A)) is contained in Null(A (x) A), i.e. the two have equal rank.
bool saxas_convergence_certificate(const DenseMatrix& A, std::span<const SketchSample> samples,
                                   Index cap = kKroneckerCap);

}  // namespace sketchpinv
