#pragma once

#include <rouf/error.hpp>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rouf {

inline constexpr double kMetersPerSecondPerMph = 0.44704;

struct Range {
  double lo = 0;
  double hi = 0;

  double width() const noexcept { return hi - lo; }
  double center() const noexcept { return 0.5 * (lo + hi); }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  bool intersects(const Range& o) const noexcept { return lo <= o.hi && o.lo <= hi; }

  friend bool operator==(const Range&, const Range&) = default;
};

struct Param {
  std::string name;
  Range range;
  std::string unit;
};

/// Named CPS parameters with SI ranges.
class ParamBox {
 public:
  ParamBox() = default;
  explicit ParamBox(std::vector<Param> params) : params_(std::move(params)) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& p = params_[i];
      if (p.name.empty()) throw ConfigError("parameter name must not be empty");
      if (!std::isfinite(p.range.lo) || !std::isfinite(p.range.hi) || !(p.range.lo < p.range.hi)) {
        throw ConfigError("parameter '" + p.name + "' needs a nonempty finite range");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (params_[j].name == p.name) throw ConfigError("duplicate parameter '" + p.name + "'");
      }
    }
  }

  std::size_t size() const noexcept { return params_.size(); }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  const std::vector<Param>& params() const noexcept { return params_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::size_t at(std::string_view name) const {
    if (auto i = index_of(name)) return *i;
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }

 private:
  std::vector<Param> params_;
};

/// Converts a value in `unit` to SI. Accepts m, m/s and mph.
inline double to_si(double value, std::string_view unit) {
  if (unit == "mph") return value * kMetersPerSecondPerMph;
  if (unit == "m" || unit == "m/s" || unit == "s" || unit.empty()) return value;
  throw ConfigError("unsupported unit '" + std::string(unit) + "'");
}

inline std::string si_unit(std::string_view unit) {
  if (unit == "mph") return "m/s";
  return std::string(unit);
}

}  // namespace rouf
