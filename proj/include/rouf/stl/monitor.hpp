#pragma once

#include <rouf/error.hpp>
#include <rouf/stl/formula.hpp>
#include <rouf/trace.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

// Grid semantics: every temporal quantifier ranges over the trace's grid points.
// Each subformula is evaluated into a signal over the maximal prefix of the grid on
// which its temporal extent fits inside the trace; evaluating past that prefix is a
// horizon error.

namespace rouf::stl {

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline std::vector<double> eval_expr(const Expr& e, const Trace& trace) {
  const std::size_t n = trace.grid().size();
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::kNumber: return std::vector<double>(n, e.value());
    case K::kSignal: {
      auto v = trace.at(e.name()).values();
      return {v.begin(), v.end()};
    }
    case K::kNeg: {
      auto v = eval_expr(e.operand(), trace);
      for (double& x : v) x = -x;
      return v;
    }
    default: break;
  }
  auto a = eval_expr(e.lhs(), trace);
  const auto b = eval_expr(e.rhs(), trace);
  for (std::size_t k = 0; k < n; ++k) {
    switch (e.kind()) {
      case K::kAdd: a[k] += b[k]; break;
      case K::kSub: a[k] -= b[k]; break;
      case K::kMul: a[k] *= b[k]; break;
      default: a[k] /= b[k]; break;
    }
  }
  return a;
}

inline std::vector<double> eval_predicate(const Predicate& p, const Trace& trace) {
  auto g = eval_expr(p.g, trace);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!std::isfinite(g[k])) {
      throw DomainError("predicate '" + to_string(p.g) + "' is not finite at t = " +
                        std::to_string(trace.grid().time(k)));
    }
  }
  return g;
}

/// Grid offsets [first, last] covered by an interval; first > last when empty.
struct Window {
  std::size_t first;
  std::size_t last;
  bool empty() const noexcept { return first > last; }
};

inline Window window_offsets(const Interval& iv, double dt) {
  constexpr double eps = 1e-9;
  const double a = std::ceil(iv.lo / dt - eps);
  const double b = std::floor(iv.hi / dt + eps);
  return {static_cast<std::size_t>(std::max(a, 0.0)), static_cast<std::size_t>(std::max(b, 0.0))};
}

/// Number of grid points k at which t_k + hi stays inside the trace.
inline std::size_t horizon_fit(const Interval& iv, const TimeGrid& g) {
  const double slack = static_cast<double>(g.size() - 1) - iv.hi / g.dt() + 1e-9;
  if (slack < 0) return 0;
  return std::min(g.size(), static_cast<std::size_t>(std::floor(slack)) + 1);
}

/// Valid-prefix length of a temporal node given its operands' valid lengths.
inline std::size_t temporal_valid(const std::optional<Interval>& iv, const TimeGrid& g, std::size_t operands) {
  if (!iv) return operands;
  const Window w = window_offsets(*iv, g.dt());
  const std::size_t need = w.last;
  const std::size_t by_operands = operands > need ? operands - need : 0;
  return std::min(horizon_fit(*iv, g), by_operands);
}

// Index range [lo, hi] at position k; hi < lo encodes an empty window.
inline std::pair<std::size_t, std::size_t> range_at(const std::optional<Interval>& iv, const TimeGrid& g,
                                                    std::size_t k, std::size_t operands) {
  if (!iv) return {k, operands - 1};
  const Window w = window_offsets(*iv, g.dt());
  if (w.empty()) return {k + 1, k};
  return {k + w.first, k + w.last};
}

struct RobustnessEval {
  const Trace& trace;

  std::vector<double> operator()(const Formula& f) const {
    using Op = Formula::Op;
    const TimeGrid& g = trace.grid();
    switch (f.op()) {
      case Op::kTrue: return std::vector<double>(g.size(), kInf);
      case Op::kFalse: return std::vector<double>(g.size(), -kInf);
      case Op::kPred: return eval_predicate(f.predicate(), trace);
      case Op::kNot: {
        auto r = (*this)(f.left());
        for (double& x : r) x = -x;
        return r;
      }
      case Op::kAnd:
      case Op::kOr: {
        auto a = (*this)(f.left());
        const auto b = (*this)(f.right());
        a.resize(std::min(a.size(), b.size()));
        for (std::size_t k = 0; k < a.size(); ++k) {
          a[k] = f.op() == Op::kAnd ? std::min(a[k], b[k]) : std::max(a[k], b[k]);
        }
        return a;
      }
      case Op::kEventually:
      case Op::kGlobally: {
        const auto r = (*this)(f.left());
        const std::size_t valid = temporal_valid(f.interval(), g, r.size());
        std::vector<double> out(valid);
        const bool ev = f.op() == Op::kEventually;
        for (std::size_t k = 0; k < valid; ++k) {
          auto [lo, hi] = range_at(f.interval(), g, k, r.size());
          double acc = ev ? -kInf : kInf;
          for (std::size_t j = lo; j <= hi && j < r.size(); ++j) acc = ev ? std::max(acc, r[j]) : std::min(acc, r[j]);
          out[k] = acc;
        }
        return out;
      }
      case Op::kUntil: {
        const auto r1 = (*this)(f.left());
        const auto r2 = (*this)(f.right());
        const std::size_t operands = std::min(r1.size(), r2.size());
        const std::size_t valid = temporal_valid(f.interval(), g, operands);
        std::vector<double> out(valid);
        for (std::size_t k = 0; k < valid; ++k) {
          auto [lo, hi] = range_at(f.interval(), g, k, operands);
          double best = -kInf;
          double run = kInf;  // inf of r1 over [k, j]
          for (std::size_t j = k; j <= hi && j < operands; ++j) {
            run = std::min(run, r1[j]);
            if (j >= lo) best = std::max(best, std::min(r2[j], run));
          }
          out[k] = best;
        }
        return out;
      }
    }
    return {};
  }
};

struct QualitativeEval {
  const Trace& trace;

  std::vector<char> operator()(const Formula& f) const {
    using Op = Formula::Op;
    const TimeGrid& g = trace.grid();
    switch (f.op()) {
      case Op::kTrue: return std::vector<char>(g.size(), 1);
      case Op::kFalse: return std::vector<char>(g.size(), 0);
      case Op::kPred: {
        const auto v = eval_predicate(f.predicate(), trace);
        std::vector<char> out(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) out[k] = f.predicate().strict ? v[k] > 0 : v[k] >= 0;
        return out;
      }
      case Op::kNot: {
        auto q = (*this)(f.left());
        for (char& x : q) x = !x;
        return q;
      }
      case Op::kAnd:
      case Op::kOr: {
        auto a = (*this)(f.left());
        const auto b = (*this)(f.right());
        a.resize(std::min(a.size(), b.size()));
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = f.op() == Op::kAnd ? (a[k] && b[k]) : (a[k] || b[k]);
        return a;
      }
      case Op::kEventually:
      case Op::kGlobally: {
        const auto q = (*this)(f.left());
        const std::size_t valid = temporal_valid(f.interval(), g, q.size());
        std::vector<char> out(valid);
        const bool ev = f.op() == Op::kEventually;
        for (std::size_t k = 0; k < valid; ++k) {
          auto [lo, hi] = range_at(f.interval(), g, k, q.size());
          bool acc = !ev;
          for (std::size_t j = lo; j <= hi && j < q.size(); ++j) {
            if (ev && q[j]) { acc = true; break; }
            if (!ev && !q[j]) { acc = false; break; }
          }
          out[k] = acc;
        }
        return out;
      }
      case Op::kUntil: {
        // exists t' in t+I with phi2(t') and phi1 on every grid point of [t, t'].
        const auto q1 = (*this)(f.left());
        const auto q2 = (*this)(f.right());
        const std::size_t operands = std::min(q1.size(), q2.size());
        const std::size_t valid = temporal_valid(f.interval(), g, operands);
        std::vector<char> out(valid, 0);
        for (std::size_t k = 0; k < valid; ++k) {
          auto [lo, hi] = range_at(f.interval(), g, k, operands);
          for (std::size_t j = k; j <= hi && j < operands; ++j) {
            if (!q1[j]) break;
            if (j >= lo && q2[j]) { out[k] = 1; break; }
          }
        }
        return out;
      }
    }
    return {};
  }
};

inline std::size_t checked_index(const Trace& trace, double t, std::size_t valid) {
  auto k = trace.grid().index_of(t);
  if (!k) throw DomainError("time " + std::to_string(t) + " is not a grid point of the trace");
  if (*k >= valid) {
    throw HorizonError("trace horizon too short to evaluate the formula at t = " + std::to_string(t) +
                       " (valid up to " +
                       (valid == 0 ? std::string("no grid point") : "t = " + std::to_string(trace.grid().time(valid - 1))) +
                       ")");
  }
  return *k;
}

}  // namespace detail

/// Robustness signal over the valid prefix of the trace grid.
inline std::vector<double> robustness_signal(const Formula& f, const Trace& trace) {
  return detail::RobustnessEval{trace}(f);
}

inline double eval_robustness(const Formula& f, const Trace& trace, double t) {
  const auto r = robustness_signal(f, trace);
  return r[detail::checked_index(trace, t, r.size())];
}

inline bool eval_qualitative(const Formula& f, const Trace& trace, double t) {
  const auto q = detail::QualitativeEval{trace}(f);
  return q[detail::checked_index(trace, t, q.size())] != 0;
}

/// 0/1 satisfaction signal on the maximal valid prefix of the trace grid.
inline Signal satisfaction_signal(const Formula& f, const Trace& trace, std::string name = "chi") {
  const auto q = detail::QualitativeEval{trace}(f);
  if (q.empty()) throw HorizonError("formula horizon exceeds the trace at every grid point");
  std::vector<double> values(q.begin(), q.end());
  return Signal(std::move(name), trace.grid().prefix(q.size()), std::move(values), Interp::kHold);
}

}  // namespace rouf::stl
