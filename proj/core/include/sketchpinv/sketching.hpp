#pragma once

#include "sketchpinv/linalg.hpp"
#include "sketchpinv/random.hpp"

#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace sketchpinv {

/// tau distinct identity columns, indices strictly increasing: S = I_{:C}.
struct ColumnSubset {
  std::vector<Index> indices;
};

/// tau identity columns drawn with replacement, in draw order: S = I_{:v}.
struct ColumnMultiset {
  std::vector<Index> indices;
};

/// A dense sketch, e.g. tau columns of the current iterate.
struct ExplicitSketch {
  DenseMatrix matrix;
};

/// A realised sketch matrix S (ambient x tau).
///
/// Column-selection sketches are never materialised by the solvers: products
/// such as A S and S^T B are formed by gathering columns or rows.
struct SketchSample {
  std::variant<ColumnSubset, ColumnMultiset, ExplicitSketch> kind;

  static SketchSample subset(std::vector<Index> indices);
  static SketchSample multiset(std::vector<Index> indices);
  static SketchSample dense(DenseMatrix S);

  Index width() const;
  bool is_selection() const { return !std::holds_alternative<ExplicitSketch>(kind); }
  /// Selected identity columns; empty for explicit sketches.
  std::span<const Index> indices() const;
};

/// Throws std::invalid_argument when the sample violates its invariants for
/// the given ambient dimension.
void validate(const SketchSample& S, Index ambient);

/// Dense S (ambient x tau). Intended for analysis and tests.
DenseMatrix materialize(const SketchSample& S, Index ambient);

/// A S, by column gathering for selection sketches.
DenseMatrix right_apply(const DenseMatrix& A, const SketchSample& S);

/// S^T B, by row gathering for selection sketches.
DenseMatrix left_apply_transpose(const SketchSample& S, const DenseMatrix& B);

/// S^T A S.
DenseMatrix two_sided(const SketchSample& S, const DenseMatrix& A);

/// Uniform tau-batch: a uniformly random tau-subset of {0, ..., n-1}.
SketchSample sample_uniform_batch(Index n, Index tau, Rng& rng);

/// Adaptive sketch: S = X I_{:C} with C a uniform tau-subset of the columns of X.
SketchSample sample_adaptive(const DenseMatrix& X, Index tau, Rng& rng);

/// tau-batch with replacement. Coordinates are independent; `probs` gives the
/// per-coordinate distribution (uniform when absent) and must be strictly positive.
SketchSample sample_batch_with_replacement(Index n, Index tau,
                                           const std::optional<std::vector<double>>& probs,
                                           Rng& rng);

/// Finite distribution {(S_i, p_i)} with all p_i > 0 and sum 1.
class DiscreteSketchDistribution {
 public:
  DiscreteSketchDistribution(Index ambient, std::vector<SketchSample> samples,
                             std::vector<double> probs);

  /// S = I with probability one.
  static DiscreteSketchDistribution full_identity(Index n);
  /// Uniform over the n single columns e_1, ..., e_n.
  static DiscreteSketchDistribution singletons(Index n);
  /// Uniform over all tau-subsets (the uniform tau-batch, enumerated).
  static DiscreteSketchDistribution uniform_batches(Index n, Index tau,
                                                    std::size_t max_outcomes = kMaxOutcomes);
  /// Uniform over all n^tau ordered tuples (tau-batch with replacement, enumerated).
  static DiscreteSketchDistribution batches_with_replacement(
      Index n, Index tau, std::size_t max_outcomes = kMaxRepOutcomes);

  static constexpr std::size_t kMaxOutcomes = 1u << 20;
  static constexpr std::size_t kMaxRepOutcomes = 4096;

  Index ambient() const { return ambient_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<SketchSample>& samples() const { return samples_; }
  const std::vector<double>& probs() const { return probs_; }

  /// Column concatenation [S_1, ..., S_r].
  DenseMatrix stacked() const;

  const SketchSample& draw(Rng& rng) const;

 private:
  Index ambient_;
  std::vector<SketchSample> samples_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

/// Importance weights p_i proportional to Tr(S_i^T G^2 S_i). Samples with zero
/// trace carry no information and are removed together with their weight.
/// Throws std::invalid_argument ("distribution degenerate") when every trace is zero.
DiscreteSketchDistribution convenient_probabilities(const DenseMatrix& G,
                                                    std::span<const SketchSample> samples);

}  // namespace sketchpinv
