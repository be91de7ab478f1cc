#pragma once

#include <rouf/error.hpp>
#include <rouf/sampling.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace rouf::sampling {

/// Which boxes the estimate maximizes over.
///  - kAnchored: boxes [0, b] (star discrepancy); exact when the corner grid is enumerated.
///  - kGeneral:  boxes [a, b] with both corners free.
enum class BoxFamily { kAnchored, kGeneral };

namespace detail {

// Local discrepancy of the boxes spanned by corners lo..hi, taking the worse of the
// closed box (points on the boundary counted) and the open box (boundary excluded).
inline double box_discrepancy(const SampleBatch& batch, std::span<const double> lo, std::span<const double> hi) {
  const std::size_t n = batch.dim();
  double vol = 1.0;
  for (std::size_t j = 0; j < n; ++j) vol *= std::max(0.0, hi[j] - lo[j]);
  std::size_t closed = 0;
  std::size_t open = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto x = batch.point(i);
    bool in_closed = true;
    bool in_open = true;
    for (std::size_t j = 0; j < n && in_closed; ++j) {
      if (x[j] < lo[j] || x[j] > hi[j]) in_closed = false;
      // Anchored boxes keep the origin face closed: [0, b).
      if (x[j] >= hi[j] || (lo[j] > 0 && x[j] <= lo[j])) in_open = false;
    }
    closed += in_closed;
    open += in_closed && in_open;
  }
  const double m = static_cast<double>(batch.size());
  return std::max(static_cast<double>(closed) / m - vol, vol - static_cast<double>(open) / m);
}

inline std::vector<std::vector<double>> corner_candidates(const SampleBatch& batch, bool include_zero, bool include_one) {
  std::vector<std::vector<double>> out(batch.dim());
  for (std::size_t j = 0; j < batch.dim(); ++j) {
    auto& c = out[j];
    for (std::size_t i = 0; i < batch.size(); ++i) c.push_back(batch.point(i)[j]);
    if (include_zero) c.push_back(0.0);
    if (include_one) c.push_back(1.0);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  return out;
}

}  // namespace detail

/// Budget of box evaluations (box count times point count) enumerated exhaustively.
inline constexpr double kExhaustiveWork = 1e8;

/// Lower bound on the discrepancy sup_B |#(X,B)/m - vol(B)|. Candidate box corners come
/// from the sample coordinates; both the closed box and its open interior are scored so
/// boundary points are resolved in either direction. When the candidate grid is small
/// enough it is enumerated completely (for kAnchored this is the exact star discrepancy);
/// otherwise `effort` random grid boxes and `effort` uniformly random boxes are scored.
inline double discrepancy_estimate(const SampleBatch& batch, std::size_t effort,
                                   BoxFamily family = BoxFamily::kAnchored, std::uint64_t seed = 0) {
  if (batch.empty()) throw DomainError("discrepancy of an empty batch is undefined");
  const std::size_t n = batch.dim();
  const auto uppers = detail::corner_candidates(batch, false, true);
  const auto lowers = detail::corner_candidates(batch, true, false);

  double boxes = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    boxes *= static_cast<double>(uppers[j].size());
    if (family == BoxFamily::kGeneral) boxes *= static_cast<double>(lowers[j].size());
  }

  std::vector<double> lo(n, 0.0), hi(n, 1.0);
  double best = 0.0;

  if (boxes * static_cast<double>(batch.size()) <= kExhaustiveWork) {
    // Odometer over corner indices: uppers for every dim, then lowers when general.
    const std::size_t slots = family == BoxFamily::kGeneral ? 2 * n : n;
    std::vector<std::size_t> idx(slots, 0);
    auto size_of = [&](std::size_t s) { return s < n ? uppers[s].size() : lowers[s - n].size(); };
    while (true) {
      bool valid = true;
      for (std::size_t j = 0; j < n; ++j) {
        hi[j] = uppers[j][idx[j]];
        lo[j] = family == BoxFamily::kGeneral ? lowers[j][idx[n + j]] : 0.0;
        if (lo[j] > hi[j]) valid = false;
      }
      if (valid) best = std::max(best, detail::box_discrepancy(batch, lo, hi));
      std::size_t s = 0;
      while (s < slots && ++idx[s] == size_of(s)) idx[s++] = 0;
      if (s == slots) break;
    }
    return std::clamp(best, 0.0, 1.0);
  }

  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<double>& c) { return c[static_cast<std::size_t>(unit_double(rng) * c.size())]; };
  for (std::size_t e = 0; e < effort; ++e) {
    for (std::size_t j = 0; j < n; ++j) {
      hi[j] = pick(uppers[j]);
      lo[j] = family == BoxFamily::kGeneral ? std::min(pick(lowers[j]), hi[j]) : 0.0;
    }
    best = std::max(best, detail::box_discrepancy(batch, lo, hi));
    for (std::size_t j = 0; j < n; ++j) {
      const double a = unit_double(rng);
      const double b = unit_double(rng);
      lo[j] = family == BoxFamily::kGeneral ? std::min(a, b) : 0.0;
      hi[j] = family == BoxFamily::kGeneral ? std::max(a, b) : a;
    }
    best = std::max(best, detail::box_discrepancy(batch, lo, hi));
  }
  return std::clamp(best, 0.0, 1.0);
}

}  // namespace rouf::sampling
