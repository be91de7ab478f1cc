#pragma once

#include <rouf/analyzer/regions.hpp>
#include <rouf/error.hpp>
#include <rouf/falsifier/validity.hpp>
#include <rouf/parallel.hpp>
#include <rouf/params.hpp>
#include <rouf/stl/formula.hpp>
#include <rouf/stl/monitor.hpp>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <set>
#include <span>
#include <vector>

namespace rouf::falsifier {

/// Simulates CPS parameters together with an abstract scene point.
using SceneSimulator = std::function<Trace(std::span<const double> params, std::span<const double> scene)>;

struct FalsifyProblem {
  SceneSimulator concrete;
  SceneSimulator optimistic;  // M+, used to tell ML-driven violations apart
  stl::Formula formula;
  std::vector<std::size_t> frozen_scene_dims;  // overwritten by the simulator, never searched
};

struct SearchOptions {
  std::size_t budget = 20000;
  std::size_t seeds = 5;
  std::size_t rounds = 3;
  std::size_t jobs = 1;
};

struct Candidate {
  std::vector<double> params;
  std::vector<double> scene;
  std::size_t target = 0;
  std::size_t cell = 0;
  double rho = 0;
  int phase = 1;
};

struct Counterexample {
  Candidate at;
  double rho_plus = 0;
  bool ml_driven = false;
};

struct TargetedResult {
  std::vector<Counterexample> counterexamples;  // ascending robustness
  std::vector<Candidate> disproved;             // evaluated with rho > 0
  std::size_t evaluations = 0;
  std::size_t phase1_candidates = 0;
  bool complete = true;
};

namespace detail {

inline double robustness_at_start(const stl::Formula& f, const Trace& trace) {
  return stl::eval_robustness(f, trace, trace.grid().t0());
}

// Seeded coordinate descent over params ++ scene inside [lo, hi], halving the
// per-coordinate step each round. Returns every evaluated point.
inline std::vector<Candidate> descend(const FalsifyProblem& p, const Candidate& seed, const std::vector<double>& lo,
                                      const std::vector<double>& hi, const std::vector<char>& active, std::size_t rounds,
                                      std::size_t budget) {
  const std::size_t np = seed.params.size();
  std::vector<double> x = seed.params;
  x.insert(x.end(), seed.scene.begin(), seed.scene.end());
  std::vector<double> step(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) step[i] = 0.5 * (hi[i] - lo[i]);
  double best = seed.rho;
  std::vector<Candidate> out;
  auto eval = [&](const std::vector<double>& y) {
    Candidate c = seed;
    c.params.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(np));
    c.scene.assign(y.begin() + static_cast<std::ptrdiff_t>(np), y.end());
    c.phase = 2;
    c.rho = robustness_at_start(p.formula, p.concrete(c.params, c.scene));
    out.push_back(c);
    return c.rho;
  };
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!active[i] || !(hi[i] > lo[i])) continue;
      for (double dir : {-1.0, 1.0}) {
        if (out.size() >= budget) return out;
        std::vector<double> y = x;
        y[i] = std::clamp(x[i] + dir * step[i], lo[i], hi[i]);
        if (y[i] == x[i]) continue;
        const double rho = eval(y);
        if (rho < best) {
          best = rho;
          x = std::move(y);
        }
      }
    }
    for (double& s : step) s *= 0.5;
  }
  return out;
}

}  // namespace detail

/// Phase 1 evaluates every ROU cell centre that meets a target's parameter ranges
/// against each of the target's representative scenes. Phase 2 refines the
/// lowest-robustness candidates by coordinate descent inside their cell and the
/// target's scene box. Points with rho < 0 are counterexamples, rho > 0 disproved.
inline TargetedResult falsify_targeted(const FalsifyProblem& p, const ValidityGrid& grid, const RouMap& rou,
                                       const std::vector<analyzer::TargetedRegion>& targets, const SearchOptions& o) {
  if (o.budget == 0) throw ConfigError("falsification budget must be >= 1");
  TargetedResult res;
  if (targets.empty() || rou.empty()) return res;
  const ParamBox& box = grid.box();

  std::vector<Candidate> phase1;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto& target = targets[t];
    for (std::size_t c : rou.cells) {
      const auto b = grid.bounds(c);
      bool hit = true;
      for (const auto& [name, range] : target.params) hit = hit && b[box.at(name)].intersects(range);
      if (!hit) continue;
      for (const auto& rep : target.representatives) phase1.push_back(Candidate{grid.center(c), rep, t, c, 0.0, 1});
    }
  }
  res.phase1_candidates = phase1.size();
  if (phase1.size() > o.budget) {
    phase1.resize(o.budget);
    res.complete = false;
  }
  parallel_for(phase1.size(), o.jobs, [&](std::size_t i) {
    phase1[i].rho = detail::robustness_at_start(p.formula, p.concrete(phase1[i].params, phase1[i].scene));
  });
  res.evaluations = phase1.size();
  std::vector<Candidate> evaluated = phase1;

  if (res.complete && res.evaluations < o.budget && o.seeds > 0) {
    std::vector<std::size_t> order(phase1.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return phase1[a].rho < phase1[b].rho; });
    const std::size_t k = std::min(o.seeds, order.size());
    const std::size_t remaining = o.budget - res.evaluations;
    std::vector<std::vector<Candidate>> refined(k);
    parallel_for(k, o.jobs, [&](std::size_t s) {
      const Candidate& seed = phase1[order[s]];
      const auto& target = targets[seed.target];
      const auto cell = grid.bounds(seed.cell);
      std::vector<double> lo, hi;
      std::vector<char> active;
      for (std::size_t j = 0; j < box.size(); ++j) {
        Range r = cell[j];
        if (auto it = target.params.find(box[j].name); it != target.params.end()) {
          r = Range{std::max(r.lo, it->second.lo), std::min(r.hi, it->second.hi)};
          if (r.lo > r.hi) r = Range{seed.params[j], seed.params[j]};
        }
        lo.push_back(std::min(r.lo, seed.params[j]));
        hi.push_back(std::max(r.hi, seed.params[j]));
        active.push_back(1);
      }
      for (std::size_t j = 0; j < seed.scene.size(); ++j) {
        lo.push_back(std::min(target.scene_lo[j], seed.scene[j]));
        hi.push_back(std::max(target.scene_hi[j], seed.scene[j]));
        const bool frozen = std::find(p.frozen_scene_dims.begin(), p.frozen_scene_dims.end(), j) != p.frozen_scene_dims.end();
        active.push_back(frozen ? 0 : 1);
      }
      const std::size_t share = remaining / k + (s < remaining % k ? 1 : 0);
      refined[s] = detail::descend(p, seed, lo, hi, active, o.rounds, share);
    });
    for (auto& r : refined) {
      res.evaluations += r.size();
      evaluated.insert(evaluated.end(), r.begin(), r.end());
    }
  }

  std::set<std::vector<double>> seen;
  std::vector<Candidate> violations;
  for (auto& c : evaluated) {
    std::vector<double> key = c.params;
    key.insert(key.end(), c.scene.begin(), c.scene.end());
    if (!seen.insert(key).second) continue;
    if (c.rho < 0) violations.push_back(c);
    else if (c.rho > 0) res.disproved.push_back(c);
  }
  std::stable_sort(violations.begin(), violations.end(), [](const Candidate& a, const Candidate& b) { return a.rho < b.rho; });
  res.counterexamples.resize(violations.size());
  parallel_for(violations.size(), o.jobs, [&](std::size_t i) {
    const double rp = detail::robustness_at_start(p.formula, p.optimistic(violations[i].params, violations[i].scene));
    res.counterexamples[i] = Counterexample{violations[i], rp, rp > 0};
  });
  return res;
}

}  // namespace rouf::falsifier
