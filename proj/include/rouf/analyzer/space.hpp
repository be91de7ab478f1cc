#pragma once

#include <rouf/error.hpp>
#include <rouf/ml/classifier.hpp>
#include <rouf/params.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rouf::analyzer {

/// One abstract axis. Normalized coordinate a in [0,1] means semantic value
/// lo + a*(hi - lo). `window` is the normalized sub-range currently explored.
struct AbstractDim {
  std::string name;
  Range semantic{0, 1};
  std::string unit;
  Range window{0, 1};
};

/// The abstract feature space A = [0,1]^n, possibly narrowed per dimension.
class AbstractSpace {
 public:
  explicit AbstractSpace(std::vector<AbstractDim> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ConfigError("abstract space needs at least one dimension");
    for (std::size_t j = 0; j < dims_.size(); ++j) {
      const auto& d = dims_[j];
      if (d.name.empty()) throw ConfigError("abstract dimension " + std::to_string(j) + " has no name");
      if (!(d.semantic.lo < d.semantic.hi)) throw ConfigError("abstract dimension '" + d.name + "' has an empty semantic range");
      if (!(d.window.lo >= 0 && d.window.hi <= 1 && d.window.lo <= d.window.hi)) {
        throw ConfigError("abstract dimension '" + d.name + "' has a window outside [0,1]");
      }
      for (std::size_t i = 0; i < j; ++i) {
        if (dims_[i].name == d.name) throw ConfigError("duplicate abstract dimension '" + d.name + "'");
      }
    }
  }

  std::size_t size() const noexcept { return dims_.size(); }
  const AbstractDim& dim(std::size_t j) const { return dims_.at(j); }
  const std::vector<AbstractDim>& dims() const noexcept { return dims_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t j = 0; j < dims_.size(); ++j) {
      if (dims_[j].name == name) return j;
    }
    return std::nullopt;
  }

  double semantic_value(std::size_t j, double a) const {
    const Range& r = dims_[j].semantic;
    return r.lo + a * (r.hi - r.lo);
  }

  double normalized_value(std::size_t j, double s) const {
    const Range& r = dims_[j].semantic;
    return (s - r.lo) / (r.hi - r.lo);
  }

  /// Maps a point of the unit cube into the explored windows.
  std::vector<double> from_unit(std::span<const double> u) const {
    if (u.size() != dims_.size()) throw DomainError("unit point dimension does not match the abstract space");
    std::vector<double> a(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
      const Range& w = dims_[j].window;
      a[j] = w.lo + u[j] * (w.hi - w.lo);
    }
    return a;
  }

  bool contains(std::span<const double> a) const {
    if (a.size() != dims_.size()) return false;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (!dims_[j].window.contains(a[j])) return false;
    }
    return true;
  }

  AbstractSpace with_window(std::size_t j, Range w) const {
    auto dims = dims_;
    dims.at(j).window = w;
    return AbstractSpace(std::move(dims));
  }

  bool full() const noexcept {
    return std::all_of(dims_.begin(), dims_.end(), [](const AbstractDim& d) { return d.window == Range{0, 1}; });
  }

 private:
  std::vector<AbstractDim> dims_;
};

/// The concretization gamma : A -> X. Both modes are injective.
class Concretizer {
 public:
  enum class Mode { kNormalized, kSemantic };

  Concretizer(AbstractSpace space, Mode mode = Mode::kNormalized) : space_(std::move(space)), mode_(mode) {}

  const AbstractSpace& space() const noexcept { return space_; }
  Mode mode() const noexcept { return mode_; }
  std::size_t arity() const noexcept { return space_.size(); }

  ml::FeatureVector operator()(std::span<const double> a) const {
    if (a.size() != space_.size()) throw DomainError("abstract point dimension does not match the concretizer");
    ml::FeatureVector x(a.begin(), a.end());
    if (mode_ == Mode::kSemantic) {
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = space_.semantic_value(j, x[j]);
    }
    return x;
  }

 private:
  AbstractSpace space_;
  Mode mode_;
};

/// Abstract dimensions tied to CPS parameters (e.g. the distance axis to d0).
struct Binding {
  struct Entry {
    std::size_t dim;
    std::string param;
  };
  std::vector<Entry> entries;

  bool empty() const noexcept { return entries.empty(); }

  std::optional<std::string> param_of(std::size_t dim) const {
    for (const auto& e : entries) {
      if (e.dim == dim) return e.param;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> dim_of(std::string_view param) const {
    for (const auto& e : entries) {
      if (e.param == param) return e.dim;
    }
    return std::nullopt;
  }
};

}  // namespace rouf::analyzer
