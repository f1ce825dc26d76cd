#include "sketchpinv/solvers.hpp"

#include "sketchpinv/flops.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

namespace sketchpinv {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 10> kMethodNames{{
    {Method::SataxUni, "satax_uni"},
    {Method::SataxAda, "satax_ada"},
    {Method::SaxasUni, "saxas_uni"},
    {Method::SaxasAda, "saxas_ada"},
    {Method::SaxasRep, "saxas_rep"},
    {Method::ProjectUni, "project"},
    {Method::SaxFullRowRank, "sax"},
    {Method::XaFullColRank, "xa"},
    {Method::NewtonSchulz, "ns"},
    {Method::NsSatax, "ns-satax"},
}};

bool is_saxas(Method m) { return m == Method::SaxasUni || m == Method::SaxasAda || m == Method::SaxasRep; }

void require_symmetric_input(const DenseMatrix& A, const char* who) {
  if (A.rows() != A.cols() || !is_symmetric(A)) {
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
  }
}

void require_pinv_shape(const DenseMatrix& A, const DenseMatrix& X, const char* who) {
  if (X.rows() != A.cols() || X.cols() != A.rows()) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch, X must be cols(A) x rows(A)");
  }
}

void require_sketch_rows(const SketchSample& S, Index ambient, const char* who) {
  try {
    validate(S, ambient);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch (" + e.what() + ")");
  }
}

DenseMatrix symmetric_gram(const DenseMatrix& W) {
  DenseMatrix G = W.transpose() * W;
  return 0.5 * (G + G.transpose());
}

double squared_frobenius_or_throw(const DenseMatrix& A) {
  const double f2 = A.squaredNorm();
  if (!(f2 > 0.0)) throw std::invalid_argument("initialisation requires a nonzero matrix");
  return f2;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Shared bookkeeping of a run: iterate, counters, trace and stopping rules.
class Driver {
 public:
  Driver(const DenseMatrix& A, const SolverConfig& cfg, const DenseMatrix* oracle, bool projector)
      : A_(A), cfg_(cfg), oracle_(oracle), projector_(projector), threshold_(cfg.tol_residual * A.norm()) {}

  /// Records iteration 0. Returns true when X0 already meets the tolerance.
  bool start(DenseMatrix X0, std::int64_t init_flops, double init_seconds) {
    result_.X = std::move(X0);
    flops_ = init_flops;
    elapsed_ = init_seconds;
    return record("init", false);
  }

  /// Runs `steps` iterations of `step`. Returns true when the run is finished.
  bool advance(std::string_view phase, Index steps, std::int64_t step_flops, Index trace_every, bool guarded,
               const std::function<DenseMatrix(const DenseMatrix&)>& step) {
    for (Index i = 0; i < steps; ++i) {
      if (k_ >= cfg_.max_iters) return true;
      const auto t0 = Clock::now();
      result_.X = step(result_.X);
      elapsed_ += seconds_since(t0);
      flops_ += step_flops;
      ++k_;
      const bool last = (i + 1 == steps) || k_ == cfg_.max_iters;
      if (k_ % trace_every == 0 || last) {
        if (record(phase, guarded)) return true;
      }
    }
    return k_ >= cfg_.max_iters;
  }

  void charge(std::int64_t flops, double seconds) {
    flops_ += flops;
    elapsed_ += seconds;
  }

  DenseMatrix& X() { return result_.X; }
  Index iteration() const { return k_; }

  RunResult finish() {
    if (!done_) result_.stop = StopReason::MaxIterations;
    return std::move(result_);
  }

 private:
  bool record(std::string_view phase, bool guarded) {
    const DenseMatrix& X = result_.X;
    const double r = projector_ ? (X * A_ - A_).norm() : residual(A_, X);
    IterTrace row;
    row.iteration = k_;
    row.phase = std::string(phase);
    row.elapsed_s = elapsed_;
    row.flops = flops_;
    row.residual = r;
    if (oracle_ != nullptr) row.error_to_oracle = (X - *oracle_).norm();
    result_.trace.push_back(std::move(row));

    if (!std::isfinite(r)) {
      return stop(StopReason::Diverged, "non-finite residual at iteration " + std::to_string(k_));
    }
    if (r <= threshold_) return stop(StopReason::ToleranceReached, {});
    if (guarded) {
      increases_ = (have_prev_ && r > prev_residual_) ? increases_ + 1 : 0;
      if (increases_ >= cfg_.divergence_window) {
        return stop(StopReason::Diverged, "newton-schulz residual increased for " +
                                              std::to_string(increases_) +
                                              " consecutive traced iterations (iteration " +
                                              std::to_string(k_) + ")");
      }
    } else {
      increases_ = 0;
    }
    prev_residual_ = r;
    have_prev_ = guarded;
    return false;
  }

  bool stop(StopReason why, std::string diagnostic) {
    done_ = true;
    result_.stop = why;
    result_.diagnostic = std::move(diagnostic);
    return true;
  }

  const DenseMatrix& A_;
  const SolverConfig& cfg_;
  const DenseMatrix* oracle_;
  bool projector_;
  double threshold_;
  RunResult result_;
  Index k_ = 0;
  std::int64_t flops_ = 0;
  double elapsed_ = 0.0;
  bool done_ = false;
  double prev_residual_ = 0.0;
  bool have_prev_ = false;
  Index increases_ = 0;
};

InitRule default_init(Method m) {
  switch (m) {
    case Method::SaxasUni:
    case Method::SaxasAda:
    case Method::SaxasRep:
      return InitRule::ScaledSquare;
    case Method::ProjectUni:
      return InitRule::Zero;
    case Method::NewtonSchulz:
      return InitRule::NewtonSchulzInit;
    default:
      return InitRule::ScaledTranspose;
  }
}

std::pair<DenseMatrix, std::int64_t> initial_iterate(const DenseMatrix& A, const SolverConfig& cfg) {
  const auto m = static_cast<std::int64_t>(A.rows());
  const auto n = static_cast<std::int64_t>(A.cols());
  const bool projector = cfg.method == Method::ProjectUni;
  const InitRule rule = cfg.init == InitRule::MethodDefault ? default_init(cfg.method) : cfg.init;
  switch (rule) {
    case InitRule::ScaledTranspose:
      if (projector) throw std::invalid_argument("project: initial iterate must be m x m");
      return {init_satax(A), flops::init_scaled_transpose(m, n)};
    case InitRule::ScaledSquare:
      return {init_saxas(A), flops::init_scaled_square(n)};
    case InitRule::NewtonSchulzInit:
      if (projector) throw std::invalid_argument("project: initial iterate must be m x m");
      return {init_newton_schulz(A), flops::init_scaled_transpose(m, n)};
    case InitRule::Zero:
      return {projector ? DenseMatrix::Zero(A.rows(), A.rows()) : DenseMatrix::Zero(A.cols(), A.rows()), 0};
    case InitRule::Custom: {
      if (!cfg.custom_init) throw std::invalid_argument("custom initialisation requested without a matrix");
      const Index rows = projector ? A.rows() : A.cols();
      if (cfg.custom_init->rows() != rows || cfg.custom_init->cols() != A.rows()) {
        throw std::invalid_argument("custom initial iterate has the wrong shape");
      }
      return {*cfg.custom_init, 0};
    }
    case InitRule::MethodDefault:
      break;
  }
  throw std::logic_error("unreachable initialisation rule");
}

std::int64_t step_flops(Method method, const DenseMatrix& A, Index tau) {
  const auto m = static_cast<std::int64_t>(A.rows());
  const auto n = static_cast<std::int64_t>(A.cols());
  const auto t = static_cast<std::int64_t>(tau);
  switch (method) {
    case Method::SataxUni:
    case Method::NsSatax:
      return flops::satax_selection(m, n, t);
    case Method::SataxAda:
      return flops::satax_adaptive(m, n, t);
    case Method::SaxasUni:
    case Method::SaxasRep:
      return flops::saxas_selection(n, t);
    case Method::SaxasAda:
      return flops::saxas_adaptive(n, t);
    case Method::ProjectUni:
      return flops::project(m, n, t);
    case Method::SaxFullRowRank:
      return flops::sax(m, n, t);
    case Method::XaFullColRank:
      return flops::xa(m, n, t);
    case Method::NewtonSchulz:
      return flops::newton_schulz(m, n);
  }
  return 0;
}

std::string_view phase_name(Method method) {
  switch (method) {
    case Method::SataxUni:
    case Method::SataxAda:
    case Method::NsSatax:
      return "satax";
    case Method::SaxasUni:
    case Method::SaxasAda:
    case Method::SaxasRep:
      return "saxas";
    case Method::ProjectUni:
      return "project";
    case Method::SaxFullRowRank:
      return "sax";
    case Method::XaFullColRank:
      return "xa";
    case Method::NewtonSchulz:
      return "ns";
  }
  return "unknown";
}

std::function<DenseMatrix(const DenseMatrix&)> make_step(Method method, const DenseMatrix& A, Index tau, Rng& rng) {
  const Index ambient = sketch_ambient(method, A);
  switch (method) {
    case Method::SataxUni:
    case Method::NsSatax:
      return [&A, &rng, tau, ambient](const DenseMatrix& X) {
        return satax_step(A, X, sample_uniform_batch(ambient, tau, rng));
      };
    case Method::SataxAda:
      return [&A, &rng, tau](const DenseMatrix& X) { return satax_step(A, X, sample_adaptive(X, tau, rng)); };
    case Method::SaxasUni:
      return [&A, &rng, tau, ambient](const DenseMatrix& X) {
        return saxas_step(A, X, sample_uniform_batch(ambient, tau, rng));
      };
    case Method::SaxasAda:
      return [&A, &rng, tau](const DenseMatrix& X) { return saxas_step(A, X, sample_adaptive(X, tau, rng)); };
    case Method::SaxasRep:
      return [&A, &rng, tau, ambient](const DenseMatrix& X) {
        return saxas_step(A, X, sample_batch_with_replacement(ambient, tau, std::nullopt, rng));
      };
    case Method::ProjectUni:
      return [&A, &rng, tau, ambient](const DenseMatrix& X) {
        return project_step(A, X, sample_uniform_batch(ambient, tau, rng));
      };
    case Method::SaxFullRowRank:
      return [&A, &rng, tau, ambient](const DenseMatrix& X) {
        return sax_step(A, X, sample_uniform_batch(ambient, tau, rng));
      };
    case Method::XaFullColRank:
      return [&A, &rng, tau, ambient](const DenseMatrix& X) {
        return xa_step(A, X, sample_uniform_batch(ambient, tau, rng));
      };
    case Method::NewtonSchulz:
      return [&A](const DenseMatrix& X) { return newton_schulz_step(A, X); };
  }
  throw std::logic_error("unreachable method");
}

RunResult run_impl(const DenseMatrix& A, const SolverConfig& cfg, const DenseMatrix* oracle) {
  validate(cfg, A);
  if (cfg.method == Method::NsSatax) {
    throw std::invalid_argument("ns-satax must be run through run_hybrid");
  }
  Driver driver(A, cfg, oracle, cfg.method == Method::ProjectUni);
  const auto t0 = Clock::now();
  auto [X0, init_flops] = initial_iterate(A, cfg);
  if (driver.start(std::move(X0), init_flops, seconds_since(t0))) return driver.finish();

  Rng rng(cfg.seed);
  const auto step = make_step(cfg.method, A, cfg.tau, rng);
  driver.advance(phase_name(cfg.method), cfg.max_iters, step_flops(cfg.method, A, cfg.tau),
                 effective_trace_every(cfg, A), cfg.method == Method::NewtonSchulz, step);
  return driver.finish();
}

RunResult run_hybrid_impl(const DenseMatrix& A, const SolverConfig& cfg, const DenseMatrix* oracle) {
  if (cfg.method != Method::NsSatax) throw std::invalid_argument("run_hybrid requires method ns-satax");
  validate(cfg, A);
  const auto m = static_cast<std::int64_t>(A.rows());
  const auto n = static_cast<std::int64_t>(A.cols());

  Driver driver(A, cfg, oracle, false);
  const auto t0 = Clock::now();
  auto [X0, init_flops] = initial_iterate(A, cfg);
  if (driver.start(std::move(X0), init_flops, seconds_since(t0))) return driver.finish();

  Rng rng(cfg.seed);
  const Index switch_at = hybrid_switch_point(A, cfg.tau);
  const Index satax_trace = effective_trace_every(cfg, A);
  if (driver.advance("satax", switch_at, step_flops(Method::SataxUni, A, cfg.tau), satax_trace, false,
                     make_step(Method::SataxUni, A, cfg.tau, rng))) {
    return driver.finish();
  }

  const auto t1 = Clock::now();
  const double scale = (driver.X() * A).norm();
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::runtime_error("ns-satax: cannot normalise the SATAX iterate (||X_t A||_F = " +
                             std::to_string(scale) + ")");
  }
  driver.X() /= scale;
  driver.charge(flops::hybrid_normalization(m, n), seconds_since(t1));

  const Index ns_trace = cfg.trace_every > 0 ? cfg.trace_every : 1;
  driver.advance("ns", cfg.max_iters, flops::newton_schulz(m, n), ns_trace, true,
                 make_step(Method::NewtonSchulz, A, cfg.tau, rng));
  return driver.finish();
}

}  // namespace

std::string_view method_name(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [method, known] : kMethodNames) {
    if (known == name) return method;
  }
  return std::nullopt;
}

Index sketch_ambient(Method method, const DenseMatrix& A) {
  return method == Method::SaxFullRowRank ? A.rows() : A.cols();
}

Index hybrid_switch_point(const DenseMatrix& A, Index tau) {
  if (tau < 1) throw std::invalid_argument("tau must be at least 1");
  return (A.cols() + tau - 1) / tau;
}

Index effective_trace_every(const SolverConfig& cfg, const DenseMatrix& A) {
  if (cfg.trace_every > 0) return cfg.trace_every;
  if (cfg.method == Method::NewtonSchulz) return 1;
  const Index ambient = sketch_ambient(cfg.method, A);
  return std::max<Index>(1, (ambient + cfg.tau - 1) / cfg.tau);
}

void validate(const SolverConfig& cfg, const DenseMatrix& A) {
  if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("empty matrix");
  if (!A.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
  if (cfg.tau < 1) throw std::invalid_argument("tau must be at least 1");
  if (!(cfg.tol_residual > 0.0)) throw std::invalid_argument("tol_residual must be positive");
  if (cfg.max_iters < 0) throw std::invalid_argument("max_iters must be non-negative");
  if (cfg.trace_every < 0) throw std::invalid_argument("trace_every must be non-negative");
  if (cfg.divergence_window < 1) throw std::invalid_argument("divergence_window must be positive");
  if (cfg.method == Method::SaxasRep && cfg.tau < 2) {
    throw std::invalid_argument("saxas_rep requires tau >= 2 (with tau = 1 convergence is not guaranteed)");
  }
  if (is_saxas(cfg.method)) require_symmetric_input(A, method_name(cfg.method).data());

  if (cfg.method != Method::NewtonSchulz && cfg.method != Method::SaxasRep) {
    Index limit = sketch_ambient(cfg.method, A);
    // adaptive sketches pick columns of the iterate, which is n x m (n x n for SAXAS)
    if (cfg.method == Method::SataxAda) limit = A.rows();
    if (cfg.tau > limit) {
      throw std::invalid_argument("tau exceeds dimension (tau=" + std::to_string(cfg.tau) +
                                  ", dimension=" + std::to_string(limit) + ")");
    }
  }
}

DenseMatrix init_satax(const DenseMatrix& A) {
  const double f2 = squared_frobenius_or_throw(A);
  const double alpha = static_cast<double>(std::min(A.rows(), A.cols())) / f2;
  return alpha * A.transpose();
}

DenseMatrix init_saxas(const DenseMatrix& A) {
  require_symmetric_input(A, "init_saxas");
  const double f2 = squared_frobenius_or_throw(A);
  DenseMatrix X = (A * A) / f2;
  return 0.5 * (X + X.transpose());
}

DenseMatrix init_newton_schulz(const DenseMatrix& A) {
  const double f2 = squared_frobenius_or_throw(A);
  return (0.5 / f2) * A.transpose();
}

DenseMatrix satax_step(const DenseMatrix& A, const DenseMatrix& X, const SketchSample& S) {
  require_pinv_shape(A, X, "satax_step");
  require_sketch_rows(S, A.cols(), "satax_step");
  const DenseMatrix M = right_apply(A, S);     // A S, m x tau
  const DenseMatrix W = A.transpose() * M;      // A^T A S, n x tau
  const DenseMatrix P = pinv_psd(symmetric_gram(W));
  // S^T A^T (A X - I) = W^T X - M^T
  const DenseMatrix V = W.transpose() * X - M.transpose();
  return X - W * (P * V);
}

DenseMatrix saxas_step(const DenseMatrix& A, const DenseMatrix& X, const SketchSample& S) {
  require_symmetric_input(A, "saxas_step");
  if (X.rows() != A.rows() || X.cols() != A.cols()) throw std::invalid_argument("saxas_step: shape mismatch");
  require_sketch_rows(S, A.cols(), "saxas_step");
  const DenseMatrix M = right_apply(A, S);  // A S, n x tau
  const DenseMatrix P = pinv_psd(symmetric_gram(M));
  // S^T (A - A X A) S = S^T A S - (A S)^T X (A S)
  const DenseMatrix B = left_apply_transpose(S, M) - M.transpose() * X * M;
  DenseMatrix core = P * B * P;
  core = 0.5 * (core + core.transpose());
  DenseMatrix delta = (M * core) * M.transpose();
  delta = 0.5 * (delta + delta.transpose());
  return X + delta;
}

DenseMatrix project_step(const DenseMatrix& A, const DenseMatrix& X, const SketchSample& S) {
  if (X.rows() != A.rows() || X.cols() != A.rows()) {
    throw std::invalid_argument("project_step: shape mismatch, X must be rows(A) x rows(A)");
  }
  require_sketch_rows(S, A.cols(), "project_step");
  const DenseMatrix M = right_apply(A, S);  // A S, m x tau
  const DenseMatrix P = pinv_psd(symmetric_gram(M));
  const DenseMatrix D = X * M - M;
  return X - (D * P) * M.transpose();
}

DenseMatrix sax_step(const DenseMatrix& A, const DenseMatrix& X, const SketchSample& S) {
  require_pinv_shape(A, X, "sax_step");
  require_sketch_rows(S, A.rows(), "sax_step");
  const DenseMatrix SA = left_apply_transpose(S, A);  // S^T A, tau x n
  const DenseMatrix P = pinv_psd(symmetric_gram(SA.transpose()));
  DenseMatrix V = SA * X;  // S^T A X, tau x m
  if (S.is_selection()) {
    const auto idx = S.indices();
    for (std::size_t i = 0; i < idx.size(); ++i) V(static_cast<Index>(i), idx[i]) -= 1.0;
  } else {
    V -= materialize(S, A.rows()).transpose();
  }
  return X - SA.transpose() * (P * V);
}

DenseMatrix xa_step(const DenseMatrix& A, const DenseMatrix& X, const SketchSample& S) {
  require_pinv_shape(A, X, "xa_step");
  require_sketch_rows(S, A.cols(), "xa_step");
  const DenseMatrix M = right_apply(A, S);  // A S, m x tau
  const DenseMatrix P = pinv_psd(symmetric_gram(M));
  DenseMatrix D = X * M;  // X A S, n x tau
  if (S.is_selection()) {
    const auto idx = S.indices();
    for (std::size_t j = 0; j < idx.size(); ++j) D(idx[j], static_cast<Index>(j)) -= 1.0;
  } else {
    D -= materialize(S, A.cols());
  }
  return X - (D * P) * M.transpose();
}

DenseMatrix newton_schulz_step(const DenseMatrix& A, const DenseMatrix& X) {
  require_pinv_shape(A, X, "newton_schulz_step");
  if (A.cols() <= A.rows()) {
    const DenseMatrix XA = X * A;  // n x n
    return 2.0 * X - XA * X;
  }
  const DenseMatrix AX = A * X;  // m x m
  return 2.0 * X - X * AX;
}

RunResult run(const DenseMatrix& A, const SolverConfig& cfg) {
  if (cfg.method == Method::NsSatax) return run_hybrid_impl(A, cfg, nullptr);
  return run_impl(A, cfg, nullptr);
}

RunResult run(const DenseMatrix& A, const SolverConfig& cfg, const DenseMatrix& oracle) {
  if (cfg.method == Method::NsSatax) return run_hybrid_impl(A, cfg, &oracle);
  return run_impl(A, cfg, &oracle);
}

RunResult run_hybrid(const DenseMatrix& A, const SolverConfig& cfg) { return run_hybrid_impl(A, cfg, nullptr); }

RunResult run_hybrid(const DenseMatrix& A, const SolverConfig& cfg, const DenseMatrix& oracle) {
  return run_hybrid_impl(A, cfg, &oracle);
}

}  // namespace sketchpinv
