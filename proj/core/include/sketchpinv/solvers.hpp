#pragma once

#include "sketchpinv/linalg.hpp"
#include "sketchpinv/sketching.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sketchpinv {

enum class Method {
  SataxUni,        ///< sketched A^T A X = A^T, uniform tau-batch
  SataxAda,        ///< same, adaptive sketch S = X_k I_{:C}
  SaxasUni,        ///< symmetric sketch of A X A = A, uniform tau-batch
  SaxasAda,        ///< same, adaptive sketch
  SaxasRep,        ///< same, tau-batch with replacement (tau >= 2)
  ProjectUni,      ///< range projector A A^+ from P A S = A S
  SaxFullRowRank,  ///< S^T A X = S^T, full row rank A
  XaFullColRank,   ///< X A S = S, full column rank A
  NewtonSchulz,
  NsSatax,         ///< one effective SATAX pass, then Newton-Schulz
};

/// CLI spelling, e.g. "satax_uni", "ns-satax".
std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

enum class InitRule { MethodDefault, ScaledTranspose, ScaledSquare, NewtonSchulzInit, Zero, Custom };

struct SolverConfig {
  Method method = Method::SataxUni;
  Index tau = 1;
  std::uint64_t seed = 0;
  Index max_iters = 1000;
  /// Stop once ||AXA - A||_F <= tol_residual * ||A||_F.
  double tol_residual = 1e-8;
  /// Residual evaluation cadence; 0 selects the method default.
  Index trace_every = 0;
  InitRule init = InitRule::MethodDefault;
  std::optional<DenseMatrix> custom_init;
  /// Newton-Schulz phases abort after this many consecutive residual increases.
  Index divergence_window = 5;
};

/// Throws std::invalid_argument when the configuration cannot be run on A.
void validate(const SolverConfig& cfg, const DenseMatrix& A);

/// Row dimension of the sketch matrices the method draws.
Index sketch_ambient(Method method, const DenseMatrix& A);

/// Trace cadence actually used: ceil(ambient / tau) for sketched methods, 1 for Newton-Schulz.
Index effective_trace_every(const SolverConfig& cfg, const DenseMatrix& A);

/// Number of SATAX iterations in one effective pass over the columns of A.
Index hybrid_switch_point(const DenseMatrix& A, Index tau);

// Initial iterates.

/// X0 = min(m, n) / ||A||_F^2 * A^T.
DenseMatrix init_satax(const DenseMatrix& A);
/// X0 = A^2 / ||A||_F^2 for symmetric A.
DenseMatrix init_saxas(const DenseMatrix& A);
/// X0 = A^T / (2 ||A||_F^2).
DenseMatrix init_newton_schulz(const DenseMatrix& A);

// One-step updates. A is m x n; X_k is n x m unless noted.

/// X_{k+1} = X_k - A^T A S (S^T A^T A A^T A S)^+ S^T A^T (A X_k - I).
/// S has n rows. A^T A is never formed.
DenseMatrix satax_step(const DenseMatrix& A, const DenseMatrix& X, const SketchSample& S);

/// X_{k+1} = X_k + A S G^+ S^T (A - A X_k A) S G^+ S^T A with G = S^T A^2 S.
/// A must be symmetric; the update is symmetrised exactly.
DenseMatrix saxas_step(const DenseMatrix& A, const DenseMatrix& X, const SketchSample& S);

/// Least-change projection of X_k (m x m) onto {X : X A S = A S}:
/// X_{k+1} = X_k - (X_k A S - A S)(S^T A^T A S)^+ (A S)^T. Fixed point A A^+.
DenseMatrix project_step(const DenseMatrix& A, const DenseMatrix& X, const SketchSample& S);

/// X_{k+1} = X_k - A^T S (S^T A A^T S)^+ S^T (A X_k - I). S has m rows.
DenseMatrix sax_step(const DenseMatrix& A, const DenseMatrix& X, const SketchSample& S);

/// X_{k+1} = X_k - (X_k A - I) S (S^T A^T A S)^+ S^T A^T. S has n rows.
DenseMatrix xa_step(const DenseMatrix& A, const DenseMatrix& X, const SketchSample& S);

/// X_{k+1} = 2 X_k - X_k A X_k.
DenseMatrix newton_schulz_step(const DenseMatrix& A, const DenseMatrix& X);

struct IterTrace {
  Index iteration = 0;
  std::string phase;
  double elapsed_s = 0.0;
  std::int64_t flops = 0;
  double residual = 0.0;
  std::optional<double> error_to_oracle;
};

enum class StopReason { ToleranceReached, MaxIterations, Diverged };

struct RunResult {
  std::vector<IterTrace> trace;
  DenseMatrix X;
  StopReason stop = StopReason::MaxIterations;
  std::string diagnostic;
};

/// Runs cfg.method on A from its initial iterate. Every trace_every steps (and
/// at the last step) the residual is recorded; with an oracle, ||X_k - oracle||_F
/// too. Wall time and flops cover solver work only.
///
/// For ProjectUni the iterate is m x m and the recorded residual is ||X A - A||_F.
/// NsSatax is dispatched to run_hybrid.
RunResult run(const DenseMatrix& A, const SolverConfig& cfg);
RunResult run(const DenseMatrix& A, const SolverConfig& cfg, const DenseMatrix& oracle);

/// SATAX (uniform tau-batch) for hybrid_switch_point(A, tau) iterations,
/// X_t <- X_t / ||X_t A||_F, then Newton-Schulz. Phases are tagged "satax" and "ns".
RunResult run_hybrid(const DenseMatrix& A, const SolverConfig& cfg);
RunResult run_hybrid(const DenseMatrix& A, const SolverConfig& cfg, const DenseMatrix& oracle);

}  // namespace sketchpinv
