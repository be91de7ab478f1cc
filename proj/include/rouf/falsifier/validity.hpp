#pragma once

#include <rouf/analyzer/regions.hpp>
#include <rouf/error.hpp>
#include <rouf/parallel.hpp>
#include <rouf/params.hpp>
#include <rouf/stl/formula.hpp>
#include <rouf/stl/monitor.hpp>
#include <rouf/trace.hpp>

#include <json.hpp>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rouf::falsifier {

/// Simulates one parameter vector (SI units, ParamBox order).
using Simulator = std::function<Trace(std::span<const double> params)>;

/// Satisfaction status and robustness at every cell centre of a regular grid over a ParamBox.
/// Cells are numbered row-major with the first parameter varying slowest.
class ValidityGrid {
 public:
  ValidityGrid(ParamBox box, std::vector<std::size_t> resolution, std::string variant, std::string formula)
      : box_(std::move(box)), resolution_(std::move(resolution)), variant_(std::move(variant)), formula_(std::move(formula)) {
    if (resolution_.size() != box_.size()) throw ConfigError("resolution needs one entry per parameter");
    std::size_t total = 1;
    for (std::size_t r : resolution_) {
      if (r < 2) throw ConfigError("grid resolution must be >= 2 per dimension");
      total *= r;
    }
    sat_.assign(total, 0);
    rho_.assign(total, 0.0);
  }

  const ParamBox& box() const noexcept { return box_; }
  const std::vector<std::size_t>& resolution() const noexcept { return resolution_; }
  const std::string& variant() const noexcept { return variant_; }
  const std::string& formula() const noexcept { return formula_; }
  std::size_t size() const noexcept { return sat_.size(); }

  bool sat(std::size_t c) const { return sat_.at(c) != 0; }
  double rho(std::size_t c) const { return rho_.at(c); }
  void set(std::size_t c, bool sat, double rho) {
    sat_.at(c) = sat ? 1 : 0;
    rho_.at(c) = rho;
  }

  std::vector<std::size_t> multi_index(std::size_t c) const {
    std::vector<std::size_t> idx(resolution_.size());
    for (std::size_t j = resolution_.size(); j-- > 0;) {
      idx[j] = c % resolution_[j];
      c /= resolution_[j];
    }
    return idx;
  }

  analyzer::CellBounds bounds(std::size_t c) const {
    const auto idx = multi_index(c);
    analyzer::CellBounds out(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const Range& r = box_[j].range;
      const double w = r.width() / static_cast<double>(resolution_[j]);
      out[j] = Range{r.lo + static_cast<double>(idx[j]) * w, r.lo + static_cast<double>(idx[j] + 1) * w};
    }
    return out;
  }

  std::vector<double> center(std::size_t c) const {
    const auto idx = multi_index(c);
    std::vector<double> out(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const Range& r = box_[j].range;
      out[j] = r.lo + (static_cast<double>(idx[j]) + 0.5) * r.width() / static_cast<double>(resolution_[j]);
    }
    return out;
  }

  std::size_t count_sat() const {
    std::size_t n = 0;
    for (char s : sat_) n += s;
    return n;
  }

  std::vector<std::size_t> unsat_cells() const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < sat_.size(); ++c) {
      if (!sat_[c]) out.push_back(c);
    }
    return out;
  }

  bool same_layout(const ValidityGrid& o) const {
    if (resolution_ != o.resolution_ || formula_ != o.formula_ || box_.size() != o.box_.size()) return false;
    for (std::size_t j = 0; j < box_.size(); ++j) {
      if (box_[j].name != o.box_[j].name || !(box_[j].range == o.box_[j].range)) return false;
    }
    return true;
  }

 private:
  ParamBox box_;
  std::vector<std::size_t> resolution_;
  std::string variant_;
  std::string formula_;
  std::vector<char> sat_;
  std::vector<double> rho_;
};

/// Evaluates the formula at t = 0 on the trace of every cell centre.
inline ValidityGrid validity_domain(const Simulator& sim, const stl::Formula& formula, const ParamBox& box,
                                    std::vector<std::size_t> resolution, std::string variant, std::size_t jobs = 1) {
  ValidityGrid grid(box, std::move(resolution), std::move(variant), stl::to_string(formula));
  parallel_for(grid.size(), jobs, [&](std::size_t c) {
    const auto center = grid.center(c);
    try {
      const Trace trace = sim(center);
      const double t0 = trace.grid().t0();
      grid.set(c, stl::eval_qualitative(formula, trace, t0), stl::eval_robustness(formula, trace, t0));
    } catch (const InputError& e) {
      throw IndexedError<InputError>(e, c);
    }
  });
  return grid;
}

/// Cells that satisfy the formula under the optimistic abstraction and violate it
/// under the pessimistic one.
struct RouMap {
  std::vector<std::size_t> cells;

  bool empty() const noexcept { return cells.empty(); }
  std::size_t size() const noexcept { return cells.size(); }
};

inline RouMap region_of_uncertainty(const ValidityGrid& plus, const ValidityGrid& minus) {
  if (!plus.same_layout(minus)) throw ConfigError("validity grids differ in box, resolution or formula");
  RouMap rou;
  for (std::size_t c = 0; c < plus.size(); ++c) {
    if (plus.sat(c) && !minus.sat(c)) rou.cells.push_back(c);
  }
  return rou;
}

inline std::vector<analyzer::CellBounds> cell_bounds(const ValidityGrid& grid, const std::vector<std::size_t>& cells) {
  std::vector<analyzer::CellBounds> out;
  out.reserve(cells.size());
  for (std::size_t c : cells) out.push_back(grid.bounds(c));
  return out;
}

/// 2-D grids as a matrix: one row per value of the second parameter, one column per
/// value of the first, with cell centres in the header row and first column. Other
/// dimensions produce one row per cell.
inline std::string grid_csv(const ValidityGrid& grid, const std::function<double(std::size_t)>& value) {
  using rouf::detail::format_shortest;
  const auto& box = grid.box();
  std::string out;
  if (grid.resolution().size() == 2) {
    const std::size_t nx = grid.resolution()[0], ny = grid.resolution()[1];
    out += box[1].name + "\\" + box[0].name;
    for (std::size_t i = 0; i < nx; ++i) out += "," + format_shortest(grid.center(i * ny)[0]);
    out += "\n";
    for (std::size_t k = 0; k < ny; ++k) {
      out += format_shortest(grid.center(k)[1]);
      for (std::size_t i = 0; i < nx; ++i) out += "," + format_shortest(value(i * ny + k));
      out += "\n";
    }
    return out;
  }
  for (std::size_t j = 0; j < box.size(); ++j) out += box[j].name + ",";
  out += "value\n";
  for (std::size_t c = 0; c < grid.size(); ++c) {
    for (double x : grid.center(c)) out += format_shortest(x) + ",";
    out += format_shortest(value(c)) + "\n";
  }
  return out;
}

inline nlohmann::json grid_json(const ValidityGrid& g) {
  std::vector<int> status(g.size());
  std::vector<double> rho(g.size());
  for (std::size_t c = 0; c < g.size(); ++c) {
    status[c] = g.sat(c) ? 1 : 0;
    rho[c] = g.rho(c);
  }
  return {{"variant", g.variant()},
          {"resolution", g.resolution()},
          {"sat_count", g.count_sat()},
          {"unsat_count", g.size() - g.count_sat()},
          {"status", status},
          {"rho", rho}};
}

}  // namespace rouf::falsifier
