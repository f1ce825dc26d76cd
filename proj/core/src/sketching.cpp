#include "sketchpinv/sketching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sketchpinv {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_tau(Index n, Index tau) {
  if (tau < 1) throw std::invalid_argument("tau must be at least 1");
  if (tau > n) {
    throw std::invalid_argument("tau exceeds dimension (tau=" + std::to_string(tau) +
                                ", dimension=" + std::to_string(n) + ")");
  }
}

std::size_t checked_count(double count, std::size_t cap, const char* what) {
  if (count > static_cast<double>(cap)) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(count) +
                                " outcomes exceed the enumeration cap of " +
                                std::to_string(cap));
  }
  return static_cast<std::size_t>(count);
}

}  // namespace

SketchSample SketchSample::subset(std::vector<Index> indices) {
  return SketchSample{ColumnSubset{std::move(indices)}};
}

SketchSample SketchSample::multiset(std::vector<Index> indices) {
  return SketchSample{ColumnMultiset{std::move(indices)}};
}

SketchSample SketchSample::dense(DenseMatrix S) { return SketchSample{ExplicitSketch{std::move(S)}}; }

Index SketchSample::width() const {
  return std::visit(Overloaded{[](const ColumnSubset& s) { return static_cast<Index>(s.indices.size()); },
                               [](const ColumnMultiset& s) { return static_cast<Index>(s.indices.size()); },
                               [](const ExplicitSketch& s) { return s.matrix.cols(); }},
                    kind);
}

std::span<const Index> SketchSample::indices() const {
  if (const auto* s = std::get_if<ColumnSubset>(&kind)) return s->indices;
  if (const auto* s = std::get_if<ColumnMultiset>(&kind)) return s->indices;
  return {};
}

void validate(const SketchSample& S, Index ambient) {
  std::visit(Overloaded{[&](const ColumnSubset& s) {
                          for (std::size_t i = 0; i < s.indices.size(); ++i) {
                            if (s.indices[i] < 0 || s.indices[i] >= ambient)
                              throw std::invalid_argument("sketch index out of range");
                            if (i > 0 && s.indices[i] <= s.indices[i - 1])
                              throw std::invalid_argument("subset indices must be strictly increasing");
                          }
                        },
                        [&](const ColumnMultiset& s) {
                          for (Index j : s.indices) {
                            if (j < 0 || j >= ambient) throw std::invalid_argument("sketch index out of range");
                          }
                        },
                        [&](const ExplicitSketch& s) {
                          if (s.matrix.rows() != ambient)
                            throw std::invalid_argument("explicit sketch has wrong number of rows");
                        }},
             S.kind);
}

DenseMatrix materialize(const SketchSample& S, Index ambient) {
  if (const auto* e = std::get_if<ExplicitSketch>(&S.kind)) return e->matrix;
  const auto idx = S.indices();
  DenseMatrix M = DenseMatrix::Zero(ambient, static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) M(idx[j], static_cast<Index>(j)) = 1.0;
  return M;
}

DenseMatrix right_apply(const DenseMatrix& A, const SketchSample& S) {
  if (const auto* e = std::get_if<ExplicitSketch>(&S.kind)) {
    if (e->matrix.rows() != A.cols()) throw std::invalid_argument("right_apply: shape mismatch");
    return A * e->matrix;
  }
  const auto idx = S.indices();
  DenseMatrix out(A.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (idx[j] < 0 || idx[j] >= A.cols()) throw std::invalid_argument("right_apply: index out of range");
    out.col(static_cast<Index>(j)) = A.col(idx[j]);
  }
  return out;
}

DenseMatrix left_apply_transpose(const SketchSample& S, const DenseMatrix& B) {
  if (const auto* e = std::get_if<ExplicitSketch>(&S.kind)) {
    if (e->matrix.rows() != B.rows()) throw std::invalid_argument("left_apply_transpose: shape mismatch");
    return e->matrix.transpose() * B;
  }
  const auto idx = S.indices();
  DenseMatrix out(static_cast<Index>(idx.size()), B.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= B.rows())
      throw std::invalid_argument("left_apply_transpose: index out of range");
    out.row(static_cast<Index>(i)) = B.row(idx[i]);
  }
  return out;
}

DenseMatrix two_sided(const SketchSample& S, const DenseMatrix& A) {
  return left_apply_transpose(S, right_apply(A, S));
}

SketchSample sample_uniform_batch(Index n, Index tau, Rng& rng) {
  require_tau(n, tau);
  // Floyd's algorithm: every tau-subset is equally likely.
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(tau));
  for (Index j = n - tau; j < n; ++j) {
    const auto t = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(j + 1)));
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return SketchSample::subset(std::move(chosen));
}

SketchSample sample_adaptive(const DenseMatrix& X, Index tau, Rng& rng) {
  const SketchSample cols = sample_uniform_batch(X.cols(), tau, rng);
  return SketchSample::dense(right_apply(X, cols));
}

SketchSample sample_batch_with_replacement(Index n, Index tau,
                                           const std::optional<std::vector<double>>& probs,
                                           Rng& rng) {
  if (tau < 1) throw std::invalid_argument("tau must be at least 1");
  if (n < 1) throw std::invalid_argument("dimension must be at least 1");
  std::vector<Index> v(static_cast<std::size_t>(tau));
  if (!probs) {
    for (auto& x : v) x = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    return SketchSample::multiset(std::move(v));
  }
  if (static_cast<Index>(probs->size()) != n)
    throw std::invalid_argument("probability vector length must equal the dimension");
  std::vector<double> cumulative(probs->size());
  double total = 0.0;
  for (std::size_t i = 0; i < probs->size(); ++i) {
    const double p = (*probs)[i];
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("probabilities must be strictly positive");
    total += p;
    cumulative[i] = total;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("probabilities must sum to 1");
  for (auto& x : v) {
    const double u = rng.uniform01() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    x = std::min<Index>(static_cast<Index>(it - cumulative.begin()), n - 1);
  }
  return SketchSample::multiset(std::move(v));
}

DiscreteSketchDistribution::DiscreteSketchDistribution(Index ambient, std::vector<SketchSample> samples,
                                                       std::vector<double> probs)
    : ambient_(ambient), samples_(std::move(samples)), probs_(std::move(probs)) {
  if (samples_.empty()) throw std::invalid_argument("distribution must have at least one outcome");
  if (samples_.size() != probs_.size())
    throw std::invalid_argument("distribution needs one probability per sample");
  long double total = 0.0L;
  cumulative_.reserve(probs_.size());
  for (double p : probs_) {
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("distribution probabilities must be strictly positive");
    total += p;
    cumulative_.push_back(static_cast<double>(total));
  }
  if (std::abs(static_cast<double>(total) - 1.0) > 1e-12) throw std::invalid_argument("distribution probabilities must sum to 1");
  for (const auto& s : samples_) validate(s, ambient_);
}

DiscreteSketchDistribution DiscreteSketchDistribution::full_identity(Index n) {
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  return {n, {SketchSample::subset(std::move(all))}, {1.0}};
}

DiscreteSketchDistribution DiscreteSketchDistribution::singletons(Index n) {
  std::vector<SketchSample> samples;
  for (Index i = 0; i < n; ++i) samples.push_back(SketchSample::subset({i}));
  return {n, std::move(samples), std::vector<double>(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n))};
}

DiscreteSketchDistribution DiscreteSketchDistribution::uniform_batches(Index n, Index tau,
                                                                       std::size_t max_outcomes) {
  require_tau(n, tau);
  double count = 1.0;
  for (Index i = 0; i < tau; ++i) count = count * static_cast<double>(n - i) / static_cast<double>(i + 1);
  const std::size_t total = checked_count(std::round(count), max_outcomes, "uniform_batches");

  std::vector<SketchSample> samples;
  samples.reserve(total);
  std::vector<Index> c(static_cast<std::size_t>(tau));
  std::iota(c.begin(), c.end(), Index{0});
  while (true) {
    samples.push_back(SketchSample::subset(c));
    Index i = tau - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - tau + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < tau; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
  const double p = 1.0 / static_cast<double>(samples.size());
  std::vector<double> probs(samples.size(), p);
  return {n, std::move(samples), std::move(probs)};
}

DiscreteSketchDistribution DiscreteSketchDistribution::batches_with_replacement(Index n, Index tau,
                                                                                std::size_t max_outcomes) {
  if (tau < 1 || n < 1) throw std::invalid_argument("batches_with_replacement: n and tau must be positive");
  const std::size_t total =
      checked_count(std::pow(static_cast<double>(n), static_cast<double>(tau)), max_outcomes,
                    "batches_with_replacement");
  std::vector<SketchSample> samples;
  samples.reserve(total);
  std::vector<Index> v(static_cast<std::size_t>(tau), 0);
  for (std::size_t k = 0; k < total; ++k) {
    samples.push_back(SketchSample::multiset(v));
    for (Index j = tau - 1; j >= 0; --j) {
      auto& d = v[static_cast<std::size_t>(j)];
      if (++d < n) break;
      d = 0;
    }
  }
  std::vector<double> probs(total, 1.0 / static_cast<double>(total));
  return {n, std::move(samples), std::move(probs)};
}

DenseMatrix DiscreteSketchDistribution::stacked() const {
  Index width = 0;
  for (const auto& s : samples_) width += s.width();
  DenseMatrix out(ambient_, width);
  Index col = 0;
  for (const auto& s : samples_) {
    out.middleCols(col, s.width()) = materialize(s, ambient_);
    col += s.width();
  }
  return out;
}

const SketchSample& DiscreteSketchDistribution::draw(Rng& rng) const {
  const double u = rng.uniform01() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), samples_.size() - 1);
  return samples_[k];
}

DiscreteSketchDistribution convenient_probabilities(const DenseMatrix& G,
                                                    std::span<const SketchSample> samples) {
  if (!is_symmetric(G)) throw std::invalid_argument("not symmetric");
  if (samples.empty()) throw std::invalid_argument("distribution degenerate: no samples");
  std::vector<double> traces;
  traces.reserve(samples.size());
  for (const auto& s : samples) {
    validate(s, G.rows());
    // Tr(S^T G^2 S) = ||G S||_F^2.
    traces.push_back(right_apply(G, s).squaredNorm());
  }
  const double largest = *std::max_element(traces.begin(), traces.end());
  if (!(largest > 0.0)) throw std::invalid_argument("distribution degenerate");
  const double cutoff = kDefaultRelTol * largest;

  std::vector<SketchSample> kept;
  std::vector<double> probs;
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (traces[i] > cutoff) {
      kept.push_back(samples[i]);
      probs.push_back(traces[i]);
      total += traces[i];
    }
  }
  for (auto& p : probs) p /= total;
  return {G.rows(), std::move(kept), std::move(probs)};
}

}  // namespace sketchpinv
