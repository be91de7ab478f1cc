#pragma once

#include <rouf/error.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rouf {

/// Uniform sampling grid: times t0 + k*dt for k = 0 .. n_steps-1.
class TimeGrid {
 public:
  TimeGrid(double t0, double dt, std::size_t n_steps) : t0_(t0), dt_(dt), n_(n_steps) {
    if (!std::isfinite(t0) || !std::isfinite(dt) || !(dt > 0)) {
      throw DomainError("time grid requires finite t0 and dt > 0");
    }
    if (n_steps == 0) throw DomainError("time grid requires at least one step");
  }

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return n_; }
  double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }
  double end() const noexcept { return time(n_ - 1); }

  /// Tolerance used when snapping times onto the grid.
  double snap_tolerance() const noexcept { return 1e-9 * dt_; }

  bool contains(double t) const noexcept {
    const double eps = snap_tolerance();
    return t >= t0_ - eps && t <= end() + eps;
  }

  /// Index of the grid point equal to `t` (within snap tolerance), if any.
  std::optional<std::size_t> index_of(double t) const noexcept {
    if (!contains(t)) return std::nullopt;
    const double u = (t - t0_) / dt_;
    const double k = std::round(u);
    if (std::abs(u - k) > 1e-9) return std::nullopt;
    return std::min(static_cast<std::size_t>(std::max(k, 0.0)), n_ - 1);
  }

  /// Grid with the same t0 and dt truncated to `n` points.
  TimeGrid prefix(std::size_t n) const { return TimeGrid(t0_, dt_, n); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t0_;
  double dt_;
  std::size_t n_;
};

enum class Interp { kHold, kLinear };

/// Real-valued signal sampled on a TimeGrid.
class Signal {
 public:
  Signal(std::string name, TimeGrid grid, std::vector<double> values, Interp interp = Interp::kLinear)
      : name_(std::move(name)), grid_(grid), values_(std::move(values)), interp_(interp) {
    if (name_.empty()) throw DomainError("signal name must not be empty");
    if (values_.size() != grid_.size()) {
      throw DomainError("signal '" + name_ + "' has " + std::to_string(values_.size()) +
                        " values for a grid of " + std::to_string(grid_.size()));
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k])) {
        throw DomainError("signal '" + name_ + "' has a non-finite value at step " + std::to_string(k));
      }
    }
  }

  const std::string& name() const noexcept { return name_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  Interp interp() const noexcept { return interp_; }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::string name_;
  TimeGrid grid_;
  std::vector<double> values_;
  Interp interp_;
};

/// Value of `signal` at time `t`. Grid times return the stored sample exactly.
inline double value_at(const Signal& signal, double t) {
  const TimeGrid& g = signal.grid();
  if (!std::isfinite(t) || !g.contains(t)) {
    throw DomainError("time " + std::to_string(t) + " outside the domain of signal '" + signal.name() + "'");
  }
  if (auto k = g.index_of(t)) return signal[*k];

  const double u = std::clamp((t - g.t0()) / g.dt(), 0.0, static_cast<double>(g.size() - 1));
  const auto k = static_cast<std::size_t>(std::floor(u));
  if (signal.interp() == Interp::kHold || k + 1 >= g.size()) return signal[k];
  const double frac = u - static_cast<double>(k);
  return signal[k] + (signal[k + 1] - signal[k]) * frac;
}

/// Set of uniquely named signals on one shared grid. Immutable once built.
class Trace {
 public:
  explicit Trace(TimeGrid grid) : grid_(grid) {}

  Trace(TimeGrid grid, std::vector<Signal> signals) : grid_(grid) {
    for (auto& s : signals) add(std::move(s));
  }

  void add(Signal signal) {
    if (!(signal.grid() == grid_)) {
      throw DomainError("signal '" + signal.name() + "' does not share the trace grid");
    }
    if (find(signal.name()) != nullptr) {
      throw DomainError("duplicate signal name '" + signal.name() + "'");
    }
    signals_.push_back(std::move(signal));
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const Signal> signals() const noexcept { return signals_; }

  const Signal* find(std::string_view name) const noexcept {
    for (const auto& s : signals_) {
      if (s.name() == name) return &s;
    }
    return nullptr;
  }

  const Signal& at(std::string_view name) const {
    if (const Signal* s = find(name)) return *s;
    throw UnknownSignalError(std::string(name));
  }

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  TimeGrid grid_;
  std::vector<Signal> signals_;
};

namespace detail {

inline std::string format_shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_time(double t) {
  // Times are regenerated as t0 + k*dt; 15 digits hides the accumulated ulp drift.
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", t);
  return buf;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Per-signal interpolation overrides for CSV import; unlisted signals are linear.
using InterpMap = std::map<std::string, Interp, std::less<>>;

/// Parses `time,<name>,...` CSV with uniformly spaced, strictly increasing times.
inline Trace trace_from_csv(std::string_view text, const InterpMap& interp = {}) {
  auto lines = detail::split(text, '\n');
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty CSV", 1);

  auto header = detail::split(detail::trim(lines[0]), ',');
  if (detail::trim(header[0]) != "time") throw ParseError("header must start with 'time'", 1, 1);
  if (header.size() < 2) throw ParseError("header names no signals", 1);
  std::vector<std::string> names;
  for (std::size_t c = 1; c < header.size(); ++c) {
    auto name = detail::trim(header[c]);
    if (name.empty()) throw ParseError("empty signal name in header", 1, c + 1);
    names.emplace_back(name);
  }

  std::vector<double> times;
  std::vector<std::vector<double>> columns(names.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::size_t line_no = r + 1;
    auto fields = detail::split(detail::trim(lines[r]), ',');
    if (fields.size() != header.size()) {
      throw ParseError("ragged row: expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto v = detail::parse_double(fields[c]);
      if (!v) throw ParseError("not a number: '" + std::string(detail::trim(fields[c])) + "'", line_no, c + 1);
      if (!std::isfinite(*v)) throw ParseError("non-finite value", line_no, c + 1);
      if (c == 0) {
        if (!times.empty() && !(*v > times.back())) throw ParseError("times not strictly increasing", line_no, 1);
        times.push_back(*v);
      } else {
        columns[c - 1].push_back(*v);
      }
    }
  }
  if (times.empty()) throw ParseError("CSV has no data rows", 2);

  const std::size_t n = times.size();
  const double t0 = times.front();
  const double dt = n > 1 ? (times.back() - t0) / static_cast<double>(n - 1) : 1.0;
  const double step = n > 1 ? times[1] - times[0] : 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs((times[k] - times[k - 1]) - step) > 1e-6 * step) {
      throw ParseError("non-uniform time spacing", k + 2, 1);
    }
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(times[k] - (t0 + static_cast<double>(k) * dt)) > 1e-6 * dt) {
      throw ParseError("time spacing drifts from a uniform grid", k + 2, 1);
    }
  }

  TimeGrid grid(t0, dt, n);
  Trace trace(grid);
  for (std::size_t c = 0; c < names.size(); ++c) {
    auto it = interp.find(names[c]);
    const Interp mode = it == interp.end() ? Interp::kLinear : it->second;
    try {
      trace.add(Signal(names[c], grid, std::move(columns[c]), mode));
    } catch (const DomainError& e) {
      throw ParseError(e.what(), 1, c + 2);
    }
  }
  return trace;
}

inline std::string trace_to_csv(const Trace& trace) {
  std::string out = "time";
  for (const auto& s : trace.signals()) out += "," + s.name();
  out += "\n";
  for (std::size_t k = 0; k < trace.grid().size(); ++k) {
    out += detail::format_time(trace.grid().time(k));
    for (const auto& s : trace.signals()) out += "," + detail::format_shortest(s[k]);
    out += "\n";
  }
  return out;
}

}  // namespace rouf
