#pragma once

#include <rouf/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rouf::ml {

using FeatureVector = std::vector<double>;

/// Binary label plus the classifier's confidence in that label.
struct Verdict {
  int label = 0;
  double score = 1.0;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct LabeledItem {
  FeatureVector x;
  int label = 0;
};

using LabeledSet = std::vector<LabeledItem>;

/// A binary classifier f : X -> {0,1}. Implementations must be safe to call
/// concurrently; remote ones serialize internally.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::size_t arity() const = 0;
  virtual Verdict classify(std::span<const double> x) const = 0;

  /// Classifies every row; a failure on row i surfaces as IndexedError carrying i.
  virtual std::vector<Verdict> classify_batch(std::span<const FeatureVector> xs) const {
    std::vector<Verdict> out;
    out.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      try {
        out.push_back(classify(xs[i]));
      } catch (const TransportError& e) {
        throw IndexedError<TransportError>(e, i);
      }
    }
    return out;
  }

 protected:
  void check_arity(std::span<const double> x) const {
    if (x.size() != arity()) {
      throw DomainError("feature vector has " + std::to_string(x.size()) + " entries, classifier expects " +
                        std::to_string(arity()));
    }
    for (double v : x) {
      if (!std::isfinite(v)) throw DomainError("feature vector has a non-finite entry");
    }
  }
};

using ClassifierPtr = std::shared_ptr<const Classifier>;

/// Closed axis-aligned box over feature coordinates.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const noexcept { return lo.size(); }

  bool contains(std::span<const double> x) const {
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if (x[j] < lo[j] || x[j] > hi[j]) return false;
    }
    return true;
  }

  /// Euclidean distance from x to the box surface (0 on the boundary).
  double boundary_distance(std::span<const double> x) const {
    if (contains(x)) {
      double depth = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < lo.size(); ++j) depth = std::min({depth, x[j] - lo[j], hi[j] - x[j]});
      return depth;
    }
    double sq = 0;
    for (std::size_t j = 0; j < lo.size(); ++j) {
      const double d = x[j] < lo[j] ? lo[j] - x[j] : x[j] > hi[j] ? x[j] - hi[j] : 0.0;
      sq += d * d;
    }
    return std::sqrt(sq);
  }

  double volume() const {
    double v = 1;
    for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
    return v;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Constant classifier with planted misclassification boxes: the label is
/// flipped from `base_label` exactly inside the union of the boxes.
class SyntheticClassifier final : public Classifier {
 public:
  /// Confidence rises linearly from 0.5 on a box boundary to 1 at `score_width` away from it.
  SyntheticClassifier(std::size_t arity, int base_label, std::vector<Box> boxes = {}, double score_width = 0.1)
      : arity_(arity), base_label_(base_label), boxes_(std::move(boxes)), score_width_(score_width) {
    if (arity_ == 0) throw ConfigError("classifier arity must be >= 1");
    if (base_label_ != 0 && base_label_ != 1) throw ConfigError("base label must be 0 or 1");
    if (!(score_width_ > 0)) throw ConfigError("score width must be > 0");
    for (const auto& b : boxes_) {
      if (b.lo.size() != arity_ || b.hi.size() != arity_) throw ConfigError("planted box dimension mismatch");
      for (std::size_t j = 0; j < arity_; ++j) {
        if (!(b.lo[j] <= b.hi[j])) throw ConfigError("planted box has lo > hi");
      }
    }
  }

  std::size_t arity() const override { return arity_; }
  int base_label() const noexcept { return base_label_; }
  const std::vector<Box>& boxes() const noexcept { return boxes_; }

  Verdict classify(std::span<const double> x) const override {
    check_arity(x);
    bool inside = false;
    double d = std::numeric_limits<double>::infinity();
    for (const auto& b : boxes_) {
      inside = inside || b.contains(x);
      d = std::min(d, b.boundary_distance(x));
    }
    const int label = inside ? 1 - base_label_ : base_label_;
    const double score = std::clamp(0.5 + 0.5 * d / score_width_, 0.5, 1.0);
    return {label, score};
  }

 private:
  std::size_t arity_;
  int base_label_;
  std::vector<Box> boxes_;
  double score_width_;
};

/// The label-complement of another classifier.
class FlippedClassifier final : public Classifier {
 public:
  explicit FlippedClassifier(ClassifierPtr inner) : inner_(std::move(inner)) {}
  std::size_t arity() const override { return inner_->arity(); }
  Verdict classify(std::span<const double> x) const override {
    Verdict v = inner_->classify(x);
    v.label = 1 - v.label;
    return v;
  }

 private:
  ClassifierPtr inner_;
};

namespace detail {

inline std::vector<int> predict_all(const Classifier& f, const LabeledSet& t) {
  if (t.empty()) throw DomainError("metrics need a nonempty labeled set");
  std::vector<FeatureVector> xs;
  xs.reserve(t.size());
  for (const auto& item : t) xs.push_back(item.x);
  std::vector<int> labels;
  for (const auto& v : f.classify_batch(xs)) labels.push_back(v.label);
  return labels;
}

}  // namespace detail

/// |{x_i : f(x_i) = 1 and y_i = 0}|
inline std::size_t false_positives(const Classifier& f, const LabeledSet& t) {
  const auto pred = detail::predict_all(f, t);
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) n += pred[i] == 1 && t[i].label == 0;
  return n;
}

/// |{x_i : f(x_i) = 0 and y_i = 1}|
inline std::size_t false_negatives(const Classifier& f, const LabeledSet& t) {
  const auto pred = detail::predict_all(f, t);
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) n += pred[i] == 0 && t[i].label == 1;
  return n;
}

/// (FP + FN) / |T|, computed from a single pass over T.
inline double error_rate(const Classifier& f, const LabeledSet& t) {
  const auto pred = detail::predict_all(f, t);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    wrong += (pred[i] == 1 && t[i].label == 0) || (pred[i] == 0 && t[i].label == 1);
  }
  return static_cast<double>(wrong) / static_cast<double>(t.size());
}

}  // namespace rouf::ml
