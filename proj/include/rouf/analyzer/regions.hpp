#pragma once

#include <rouf/analyzer/approx.hpp>
#include <rouf/analyzer/space.hpp>
#include <rouf/error.hpp>
#include <rouf/params.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rouf::analyzer {

/// Ground-truth label of an abstract point.
using TruthFn = std::function<int(std::span<const double>)>;

inline TruthFn constant_truth(int label) {
  return [label](std::span<const double>) { return label; };
}

/// Points whose sampled label differs from the ground truth.
inline std::vector<std::vector<double>> misclassified(const AbstractSamples& points, const TruthFn& truth) {
  std::vector<std::vector<double>> out;
  for (const auto& p : points) {
    if (p.label != truth(p.a)) out.push_back(p.a);
  }
  return out;
}

struct Region {
  enum class Tag { kCluster, kCornerCase };

  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::vector<double>> members;
  Tag tag = Tag::kCluster;

  bool contains(std::span<const double> a) const {
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if (a[j] < lo[j] || a[j] > hi[j]) return false;
    }
    return true;
  }

  std::vector<double> center() const {
    std::vector<double> c(lo.size());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = 0.5 * (lo[j] + hi[j]);
    return c;
  }

  double volume() const {
    double v = 1;
    for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
    return v;
  }
};

inline const char* tag_name(Region::Tag t) { return t == Region::Tag::kCluster ? "cluster" : "corner-case"; }

namespace detail {

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

// Mean distance from each listed point to its nearest other listed point.
inline double mean_nn_spacing(const std::vector<std::vector<double>>& pts, const std::vector<std::size_t>& idx) {
  if (idx.size() < 2) return 0;
  double total = 0;
  for (std::size_t i : idx) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k : idx) {
      if (k != i) best = std::min(best, distance(pts[i], pts[k]));
    }
    total += best;
  }
  return total / static_cast<double>(idx.size());
}

}  // namespace detail

/// Single-linkage clusters (Euclidean distance <= link_radius) with bounding boxes
/// padded by half the mean nearest-neighbour spacing and clamped to [0,1]^n.
/// Singleton clusters are corner cases; they are padded with the spacing of the
/// whole input. Regions are ordered by their lowest member index.
inline std::vector<Region> extract_regions(const std::vector<std::vector<double>>& pts, double link_radius = 0.1) {
  if (!(link_radius > 0)) throw ConfigError("link radius must be > 0");
  const std::size_t m = pts.size();
  if (m == 0) return {};
  const std::size_t n = pts.front().size();
  for (const auto& p : pts) {
    if (p.size() != n) throw DomainError("points have mixed dimensions");
  }

  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = i + 1; k < m; ++k) {
      if (detail::distance(pts[i], pts[k]) <= link_radius) {
        const std::size_t a = find(i), b = find(k);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < m; ++i) clusters[find(i)].push_back(i);

  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  const double global_pad = 0.5 * detail::mean_nn_spacing(pts, all);

  std::vector<Region> out;
  for (const auto& [root, idx] : clusters) {
    Region r;
    r.lo.assign(n, std::numeric_limits<double>::infinity());
    r.hi.assign(n, -std::numeric_limits<double>::infinity());
    for (std::size_t i : idx) {
      r.members.push_back(pts[i]);
      for (std::size_t j = 0; j < n; ++j) {
        r.lo[j] = std::min(r.lo[j], pts[i][j]);
        r.hi[j] = std::max(r.hi[j], pts[i][j]);
      }
    }
    r.tag = idx.size() == 1 ? Region::Tag::kCornerCase : Region::Tag::kCluster;
    const double pad = idx.size() == 1 ? global_pad : 0.5 * detail::mean_nn_spacing(pts, idx);
    for (std::size_t j = 0; j < n; ++j) {
      r.lo[j] = std::max(0.0, r.lo[j] - pad);
      r.hi[j] = std::min(1.0, r.hi[j] + pad);
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// Parameter bounds of one ROU cell, aligned with the ParamBox dimensions.
using CellBounds = std::vector<Range>;

/// Narrows every bound abstract dimension to the normalized hull of the ROU's
/// projection onto its parameter. Returns nullopt when the ROU is empty.
inline std::optional<AbstractSpace> restrict_to_rou(const AbstractSpace& space, const ParamBox& box,
                                                    const std::vector<CellBounds>& rou_cells, const Binding& binding) {
  if (rou_cells.empty()) return std::nullopt;
  AbstractSpace out = space;
  for (const auto& e : binding.entries) {
    if (e.dim >= space.size()) throw ConfigError("binding refers to abstract dimension " + std::to_string(e.dim));
    const std::size_t p = box.at(e.param);
    Range hull{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& cell : rou_cells) {
      hull.lo = std::min(hull.lo, cell.at(p).lo);
      hull.hi = std::max(hull.hi, cell.at(p).hi);
    }
    const Range& old = space.dim(e.dim).window;
    Range w{std::clamp(space.normalized_value(e.dim, hull.lo), 0.0, 1.0),
            std::clamp(space.normalized_value(e.dim, hull.hi), 0.0, 1.0)};
    w.lo = std::max(w.lo, old.lo);
    w.hi = std::min(w.hi, old.hi);
    if (w.lo > w.hi) w.hi = w.lo;
    out = out.with_window(e.dim, w);
  }
  return out;
}

/// One element of U^ml: CPS parameter sub-ranges for the bound dimensions plus the
/// abstract scene sub-box and representative scene points to try.
struct TargetedRegion {
  std::size_t region = 0;
  Region::Tag tag = Region::Tag::kCluster;
  std::map<std::string, Range> params;
  std::vector<double> scene_lo;
  std::vector<double> scene_hi;
  std::vector<std::vector<double>> representatives;
};

inline constexpr std::size_t kMaxMemberRepresentatives = 8;

inline std::vector<TargetedRegion> project_to_cps(const std::vector<Region>& regions, const Binding& binding,
                                                  const AbstractSpace& space) {
  std::vector<TargetedRegion> out;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const Region& reg = regions[r];
    TargetedRegion t;
    t.region = r;
    t.tag = reg.tag;
    t.scene_lo = reg.lo;
    t.scene_hi = reg.hi;
    for (const auto& e : binding.entries) {
      t.params[e.param] = Range{space.semantic_value(e.dim, reg.lo.at(e.dim)), space.semantic_value(e.dim, reg.hi.at(e.dim))};
    }
    t.representatives.push_back(reg.center());
    const std::size_t k = std::min(kMaxMemberRepresentatives, reg.members.size());
    for (std::size_t i = 0; i < k; ++i) {
      const auto& mbr = reg.members[i * reg.members.size() / k];
      if (mbr != t.representatives.front()) t.representatives.push_back(mbr);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace rouf::analyzer
