#pragma once

#include <rouf/analyzer/space.hpp>
#include <rouf/error.hpp>
#include <rouf/ml/classifier.hpp>
#include <rouf/sampling.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace rouf::analyzer {

struct LabeledPoint {
  std::vector<double> a;
  int label = 0;
};

using AbstractSamples = std::vector<LabeledPoint>;

/// Pairs each point of `batch` (mapped into the space's windows) with f(gamma(a)).
inline AbstractSamples sample_and_label(const AbstractSpace& space, const Concretizer& gamma, const ml::Classifier& f,
                                        const sampling::SampleBatch& batch) {
  if (batch.empty()) return {};
  if (batch.dim() != space.size()) {
    throw ConfigError("batch dimension " + std::to_string(batch.dim()) + " does not match the abstract space (" +
                      std::to_string(space.size()) + ")");
  }
  AbstractSamples out(batch.size());
  std::vector<ml::FeatureVector> xs;
  xs.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[i].a = space.from_unit(batch.point(i));
    xs.push_back(gamma(out[i].a));
  }
  const auto verdicts = f.classify_batch(xs);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = verdicts[i].label;
  return out;
}

/// Surrogate f~ : A -> {0,1} by 1-nearest-neighbour over the labeled samples T_I.
class ApproxClassifier {
 public:
  explicit ApproxClassifier(AbstractSamples samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw DomainError("approximation needs at least one labeled sample");
    const std::size_t n = samples_.front().a.size();
    for (const auto& s : samples_) {
      if (s.a.size() != n) throw DomainError("labeled samples have mixed dimensions");
    }
  }

  std::size_t dim() const noexcept { return samples_.front().a.size(); }
  const AbstractSamples& samples() const noexcept { return samples_; }

  /// Index of the nearest sample; ties go to the lowest index.
  std::size_t nearest(std::span<const double> a) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      double d = 0;
      const auto& p = samples_[i].a;
      for (std::size_t j = 0; j < p.size() && d < best_d; ++j) d += (p[j] - a[j]) * (p[j] - a[j]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  int operator()(std::span<const double> a) const {
    if (a.size() != dim()) throw DomainError("point dimension does not match the approximation");
    return samples_[nearest(a)].label;
  }

  /// Fraction of `test` whose label f~ gets wrong.
  double error(const AbstractSamples& test) const {
    if (test.empty()) throw DomainError("error needs a nonempty test set");
    std::size_t wrong = 0;
    for (const auto& t : test) wrong += (*this)(t.a) != t.label;
    return static_cast<double>(wrong) / static_cast<double>(test.size());
  }

 private:
  AbstractSamples samples_;
};

struct ApproxOptions {
  double epsilon = 0.05;
  sampling::Kind sampler = sampling::Kind::kHalton;
  std::size_t batch = 64;
  std::size_t max_iters = 10;
  std::uint64_t seed = 0;
  std::size_t min_test = 100;
};

struct ApproxResult {
  ApproxClassifier f;
  double error = 1.0;
  std::size_t iterations = 0;
  std::vector<sampling::Provenance> batches;
};

/// The refinement loop ran out of iterations; carries the best approximation seen.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, ApproxResult best) : Error(what), best_(std::move(best)) {}
  const ApproxResult& best() const noexcept { return best_; }

 private:
  ApproxResult best_;
};

namespace detail {

/// Batch j of the training sequence in the unit cube.
inline sampling::SampleBatch training_batch(const ApproxOptions& o, std::size_t n, std::size_t j) {
  using sampling::Kind;
  switch (o.sampler) {
    case Kind::kHalton: return sampling::halton(o.batch, n, 1 + j * o.batch);
    case Kind::kLattice: return sampling::lattice(o.batch, n, {}, j);
    case Kind::kGrid: {
      const auto k0 = static_cast<std::size_t>(
          std::max(1.0, std::floor(std::pow(static_cast<double>(o.batch), 1.0 / static_cast<double>(n)) + 1e-9)));
      return sampling::grid(k0 * (j + 1), n);
    }
    case Kind::kUniform: return sampling::uniform_random(o.batch, n, sampling::derive_seed(o.seed, 1'000'000 + j));
  }
  throw ConfigError("unknown sampler");
}

}  // namespace detail

/// Iteratively grows T_I with sampler batches labeled by f(gamma(.)), rebuilds
/// f~ and measures its error on a fresh uniform test set of size
/// max(min_test, |T_I|/4), until the error is at most epsilon.
inline ApproxResult approximate(const AbstractSpace& space, const Concretizer& gamma, const ml::Classifier& f,
                                const ApproxOptions& o) {
  if (!(o.epsilon >= 0 && o.epsilon <= 1)) throw ConfigError("epsilon must lie in [0,1]");
  if (o.batch == 0) throw ConfigError("batch must be >= 1");
  if (o.max_iters == 0) throw ConfigError("max_iters must be >= 1");
  const std::size_t n = space.size();

  AbstractSamples training;
  std::vector<sampling::Provenance> batches;
  std::optional<ApproxResult> best;
  double last = 1.0;
  for (std::size_t j = 0; j < o.max_iters; ++j) {
    const auto batch = detail::training_batch(o, n, j);
    batches.push_back(batch.provenance());
    auto labeled = sample_and_label(space, gamma, f, batch);
    training.insert(training.end(), labeled.begin(), labeled.end());

    ApproxClassifier approx(training);
    const std::size_t test_size = std::max(o.min_test, training.size() / 4);
    const auto test = sample_and_label(space, gamma, f, sampling::uniform_random(test_size, n, sampling::derive_seed(o.seed, j)));
    last = approx.error(test);
    ApproxResult current{std::move(approx), last, j + 1, batches};
    if (last <= o.epsilon) return current;
    if (!best || last < best->error) best = std::move(current);
  }
  throw BudgetError("approximation did not reach epsilon " + std::to_string(o.epsilon) + " within " +
                        std::to_string(o.max_iters) + " iterations (last error " + std::to_string(last) + ")",
                    std::move(*best));
}

}  // namespace rouf::analyzer
