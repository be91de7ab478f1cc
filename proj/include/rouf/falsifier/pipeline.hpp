#pragma once

#include <rouf/analyzer/analysis.hpp>
#include <rouf/analyzer/regions.hpp>
#include <rouf/cps/aebs.hpp>
#include <rouf/error.hpp>
#include <rouf/falsifier/scenario.hpp>
#include <rouf/falsifier/targeted.hpp>
#include <rouf/falsifier/validity.hpp>
#include <rouf/parallel.hpp>
#include <rouf/stl/monitor.hpp>
#include <rouf/trace.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace rouf::falsifier {

inline constexpr const char* kReportSchema = "rou-falsify/1";

struct PipelineOptions {
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  std::size_t trace_files = 20;       // counterexample traces written to disk
};

/// Everything one pass of the compositional falsifier produced. Stages that did
/// not run leave their member empty.
struct FalsificationReport {
  Scenario scenario;
  std::vector<std::string> stages;  // completed, in order
  std::optional<ValidityGrid> plus;
  std::optional<ValidityGrid> minus;
  RouMap rou;
  std::optional<analyzer::AbstractSpace> restricted;
  std::optional<analyzer::MlAnalysis> analysis;
  std::vector<analyzer::TargetedRegion> targets;
  std::optional<TargetedResult> targeted;
  std::vector<std::size_t> plus_violations;  // U-not-phi+ cells
  std::vector<std::size_t> checked;          // the sample re-run on the concrete model
  std::vector<double> checked_rho;
  std::vector<std::string> notes;
  std::vector<Trace> cex_traces;  // the first trace_files counterexamples

  std::vector<const Counterexample*> ml_driven() const {
    std::vector<const Counterexample*> out;
    if (targeted) {
      for (const auto& c : targeted->counterexamples) {
        if (c.ml_driven) out.push_back(&c);
      }
    }
    return out;
  }
};

/// A pipeline stage failed. Carries the stage name and the artifacts built so far.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, FalsificationReport partial)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)), partial_(std::move(partial)) {}
  const std::string& stage() const noexcept { return stage_; }
  const FalsificationReport& partial() const noexcept { return partial_; }

 private:
  std::string stage_;
  FalsificationReport partial_;
};

/// Optimistic, pessimistic and concrete AEBS variants of a scenario.
struct ScenarioModels {
  cps::AebsModel plus;
  cps::AebsModel minus;
  cps::AebsModel concrete;
};

inline std::optional<std::size_t> distance_dim(const Scenario& s) {
  for (const auto& e : s.binding.entries) {
    if (e.param == "d0") return e.dim;
  }
  return std::nullopt;
}

inline ScenarioModels decompose(const Scenario& s, ml::ClassifierPtr classifier) {
  cps::AebsModel base{s.model, cps::Perfect{}, s.truth == 1};
  return {cps::make_variant(base, cps::Perfect{}), cps::make_variant(base, cps::AlwaysWrong{}),
          cps::make_variant(base, cps::Concrete{std::move(classifier), make_concretizer(s), distance_dim(s)})};
}

inline Simulator grid_simulator(const cps::AebsModel& m, const Scenario& s) {
  return [m, scene = cps::Scene{s.scene, s.scene_mode}](std::span<const double> p) { return cps::simulate(m, p[0], p[1], scene); };
}

inline SceneSimulator scene_simulator(const cps::AebsModel& m, cps::SceneMode mode) {
  return [m, mode](std::span<const double> p, std::span<const double> a) {
    return cps::simulate(m, p[0], p[1], cps::Scene{std::vector<double>(a.begin(), a.end()), mode});
  };
}

/// One pass of compositional falsification: validity domains of the optimistic and
/// pessimistic abstractions, their region of uncertainty, ML analysis restricted to
/// it, and a targeted search of the concrete model.
inline FalsificationReport comp_falsify(const Scenario& scenario, const PipelineOptions& o = {},
                                        ml::ClassifierPtr classifier = nullptr) {
  FalsificationReport r;
  r.scenario = scenario;
  if (o.seed) r.scenario.seed = *o.seed;
  const Scenario& s = r.scenario;
  std::string stage;
  auto done = [&] { r.stages.push_back(stage); };

  try {
    stage = "decompose-plus";
    if (!classifier) classifier = make_classifier(s);
    const ScenarioModels models = decompose(s, classifier);
    done();

    stage = "validity-plus";
    r.plus = validity_domain(grid_simulator(models.plus, s), s.formula, s.box, s.resolution, "M+", o.jobs);
    done();

    stage = "decompose-minus";
    done();

    stage = "validity-minus";
    r.minus = validity_domain(grid_simulator(models.minus, s), s.formula, s.box, s.resolution, "M-", o.jobs);
    done();

    stage = "rou";
    r.rou = region_of_uncertainty(*r.plus, *r.minus);
    r.plus_violations = r.plus->unsat_cells();
    done();

    stage = "restrict";
    if (r.rou.empty()) {
      r.notes.push_back("region of uncertainty is empty: ML analysis and targeted falsification skipped");
    } else {
      r.restricted = analyzer::restrict_to_rou(s.space, s.box, cell_bounds(*r.plus, r.rou.cells), s.binding);
    }
    done();

    if (r.restricted) {
      stage = "ml-analysis";
      auto opts = s.analysis;
      opts.approx.seed = s.seed;
      r.analysis = analyzer::analyze(*r.restricted, analyzer::Concretizer(*r.restricted, s.concretizer), *classifier,
                                     analyzer::constant_truth(s.truth), opts);
      if (!r.analysis->converged) r.notes.push_back("approximation did not converge: " + r.analysis->note);
      done();

      stage = "project";
      r.targets = analyzer::project_to_cps(r.analysis->regions, s.binding, *r.restricted);
      if (r.targets.empty()) r.notes.push_back("no misclassification regions: targeted falsification has no targets");
      done();

      stage = "falsify-targeted";
      FalsifyProblem problem{scene_simulator(models.concrete, s.scene_mode), scene_simulator(models.plus, s.scene_mode),
                             s.formula, {}};
      for (const auto& e : s.binding.entries) problem.frozen_scene_dims.push_back(e.dim);
      auto search = s.search;
      search.jobs = o.jobs;
      r.targeted = falsify_targeted(problem, *r.plus, r.rou, r.targets, search);
      if (!r.targeted->complete) r.notes.push_back("budget exhausted during phase 1: targeted search incomplete");
      const std::size_t n = std::min(o.trace_files, r.targeted->counterexamples.size());
      std::vector<std::optional<Trace>> traces(n);
      parallel_for(n, o.jobs, [&](std::size_t i) {
        const auto& c = r.targeted->counterexamples[i].at;
        traces[i] = problem.concrete(c.params, c.scene);
      });
      for (auto& t : traces) r.cex_traces.push_back(std::move(*t));
      done();
    }

    stage = "confirm-plus-violations";
    const auto& unsat = r.plus_violations;
    const std::size_t k = std::min(s.confirm_samples, unsat.size());
    for (std::size_t i = 0; i < k; ++i) r.checked.push_back(unsat[i * unsat.size() / k]);
    r.checked_rho.resize(k);
    const Simulator concrete = grid_simulator(models.concrete, s);
    parallel_for(k, o.jobs, [&](std::size_t i) {
      const Trace t = concrete(r.plus->center(r.checked[i]));
      r.checked_rho[i] = stl::eval_robustness(s.formula, t, t.grid().t0());
    });
    done();
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), std::move(r));
  }
  r.stages.push_back("report");
  return r;
}

namespace detail {

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json params_json(const ParamBox& box, const std::vector<double>& p) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < box.size(); ++i) j[box[i].name] = p[i];
  return j;
}

inline nlohmann::json cell_json(const ValidityGrid& g, std::size_t c) {
  nlohmann::json bounds = nlohmann::json::object();
  const auto b = g.bounds(c);
  for (std::size_t j = 0; j < b.size(); ++j) bounds[g.box()[j].name] = {b[j].lo, b[j].hi};
  return {{"cell", c}, {"center", params_json(g.box(), g.center(c))}, {"bounds", bounds}, {"rho", g.rho(c)}};
}

inline std::string cex_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cex_%03zu.csv", i);
  return buf;
}

}  // namespace detail

/// The report document. `generated_at` is the only field that varies between
/// runs of the same scenario and seed.
inline nlohmann::json report_json(const FalsificationReport& r, std::optional<std::string> failure = std::nullopt) {
  const Scenario& s = r.scenario;
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["generated_at"] = detail::utc_timestamp();
  j["scenario"] = scenario_json(s);
  j["stages"] = r.stages;
  j["notes"] = r.notes;
  if (failure) j["failure"] = *failure;

  nlohmann::json grids = nlohmann::json::object();
  if (r.plus) grids["plus"] = grid_json(*r.plus);
  if (r.minus) grids["minus"] = grid_json(*r.minus);
  j["grids"] = grids;

  if (r.plus && r.minus) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t c : r.rou.cells) cells.push_back(detail::cell_json(*r.plus, c));
    j["rou"] = {{"count", r.rou.size()}, {"cells", cells}};
  }
  if (r.restricted) j["restricted_space"] = analyzer::space_json(*r.restricted);
  if (r.analysis) {
    auto a = analyzer::analysis_json(*r.analysis);
    a.erase("samples");
    a["samples_csv"] = "analysis_samples.csv";
    j["ml_analysis"] = a;
  }

  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : r.targets) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, range] : t.params) params[name] = {range.lo, range.hi};
    targets.push_back({{"region", t.region},
                       {"tag", analyzer::tag_name(t.tag)},
                       {"params", params},
                       {"scene_lo", t.scene_lo},
                       {"scene_hi", t.scene_hi},
                       {"representatives", t.representatives}});
  }
  j["targets"] = targets;

  nlohmann::json cex = nlohmann::json::array();
  nlohmann::json disproved = nlohmann::json::array();
  nlohmann::json search = nullptr;
  if (r.targeted) {
    const auto& t = *r.targeted;
    for (std::size_t i = 0; i < t.counterexamples.size(); ++i) {
      const auto& c = t.counterexamples[i];
      cex.push_back({{"params", detail::params_json(s.box, c.at.params)},
                     {"scene", c.at.scene},
                     {"rho", c.at.rho},
                     {"rho_plus", c.rho_plus},
                     {"ml_driven", c.ml_driven},
                     {"target", c.at.target},
                     {"cell", c.at.cell},
                     {"phase", c.at.phase},
                     {"trace", i < r.cex_traces.size() ? nlohmann::json(detail::cex_file(i)) : nlohmann::json(nullptr)}});
    }
    for (const auto& d : t.disproved) {
      disproved.push_back({{"params", detail::params_json(s.box, d.params)},
                           {"scene", d.scene},
                           {"rho", d.rho},
                           {"target", d.target},
                           {"phase", d.phase}});
    }
    search = {{"budget", s.search.budget},
              {"evaluations", t.evaluations},
              {"phase1_candidates", t.phase1_candidates},
              {"complete", t.complete}};
  }
  j["counterexamples"] = cex;
  j["ml_driven_count"] = r.ml_driven().size();
  j["disproved"] = disproved;
  j["search"] = search;

  nlohmann::json raw = nlohmann::json::array();
  if (r.plus) {
    for (std::size_t c : r.plus_violations) raw.push_back(detail::cell_json(*r.plus, c));
  }
  nlohmann::json checked = nlohmann::json::array();
  std::size_t confirmed = 0;
  for (std::size_t i = 0; i < r.checked.size(); ++i) {
    const bool violated = r.checked_rho[i] < 0;
    confirmed += violated ? 1 : 0;
    checked.push_back({{"cell", r.checked[i]}, {"rho", r.checked_rho[i]}, {"confirmed", violated}});
  }
  j["plus_violations"] = {{"count", r.plus_violations.size()},
                          {"cells", raw},
                          {"checked", checked},
                          {"confirmed_count", confirmed}};
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

/// Creates the output directory and checks that it accepts files.
inline void prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_text(dir / ".write_test", "");
  std::filesystem::remove(dir / ".write_test", ec);
}

/// Writes report.json plus grid, ROU, sample and counterexample-trace CSVs.
inline void write_outputs(const FalsificationReport& r, const std::filesystem::path& dir,
                          std::optional<std::string> failure = std::nullopt) {
  prepare_output_dir(dir);
  if (r.plus) write_text(dir / "grid_plus.csv", grid_csv(*r.plus, [&](std::size_t c) { return r.plus->sat(c) ? 1.0 : 0.0; }));
  if (r.minus) write_text(dir / "grid_minus.csv", grid_csv(*r.minus, [&](std::size_t c) { return r.minus->sat(c) ? 1.0 : 0.0; }));
  if (r.plus && r.minus) {
    std::vector<char> in(r.plus->size(), 0);
    for (std::size_t c : r.rou.cells) in[c] = 1;
    write_text(dir / "rou.csv", grid_csv(*r.plus, [&](std::size_t c) { return in[c] ? 1.0 : 0.0; }));
  }
  if (r.analysis) write_text(dir / "analysis_samples.csv", analyzer::samples_csv(*r.analysis));
  for (std::size_t i = 0; i < r.cex_traces.size(); ++i) write_text(dir / detail::cex_file(i), trace_to_csv(r.cex_traces[i]));
  write_text(dir / "report.json", report_json(r, std::move(failure)).dump(2) + "\n");
}

}  // namespace rouf::falsifier
