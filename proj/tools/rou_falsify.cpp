#include <rouf/rouf.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace rouf;

namespace {

constexpr int kExitSat = 0;
constexpr int kExitUnsat = 1;
constexpr int kExitError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct MonitorArgs {
  std::string trace;
  std::string formula;
  double at = 0;
  bool at_set = false;
  std::vector<std::string> hold;
};

int run_monitor(const MonitorArgs& a) {
  InterpMap interp;
  for (const auto& name : a.hold) interp[name] = Interp::kHold;
  const Trace trace = trace_from_csv(read_file(a.trace), interp);
  const stl::Formula f = stl::parse(a.formula);
  const double t = a.at_set ? a.at : trace.grid().t0();
  const double rho = stl::eval_robustness(f, trace, t);
  const bool sat = stl::eval_qualitative(f, trace, t);
  std::cout << "rho " << rouf::detail::format_shortest(rho) << "\n" << (sat ? "sat" : "unsat") << "\n";
  return sat ? kExitSat : kExitUnsat;
}

struct AnalyzeArgs {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_analyze(const AnalyzeArgs& a) {
  auto s = falsifier::load_scenario(a.scenario);
  if (a.seed) s.seed = *a.seed;
  if (!a.out.empty()) falsifier::prepare_output_dir(a.out);
  const auto classifier = falsifier::make_classifier(s);
  auto opts = s.analysis;
  opts.approx.seed = s.seed;
  const auto result = analyzer::analyze(s.space, falsifier::make_concretizer(s), *classifier,
                                        analyzer::constant_truth(s.truth), opts);
  nlohmann::json report = analyzer::analysis_json(result);
  report["schema"] = falsifier::kReportSchema;
  report["scenario"] = s.name;
  report["seed"] = s.seed;
  if (a.out.empty()) {
    std::cout << report.dump(2) << "\n";
    return 0;
  }
  const fs::path dir(a.out);
  falsifier::write_text(dir / "analysis.json", report.dump(2) + "\n");
  falsifier::write_text(dir / "analysis_samples.csv", analyzer::samples_csv(result));
  std::cout << "samples " << result.samples().size() << ", misclassified " << result.misclassified.size()
            << ", regions " << result.regions.size() << ", error " << result.approx.error << " after "
            << result.approx.iterations << " iteration(s)\n";
  return 0;
}

struct FalsifyArgs {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
};

int run_falsify(const FalsifyArgs& a) {
  const auto s = falsifier::load_scenario(a.scenario);
  const fs::path dir(a.out);
  falsifier::prepare_output_dir(dir);
  falsifier::PipelineOptions o;
  o.jobs = a.jobs.value_or(default_jobs());
  o.seed = a.seed;
  try {
    const auto r = falsifier::comp_falsify(s, o);
    falsifier::write_outputs(r, dir);
    std::cout << "ROU cells " << r.rou.size() << ", M+ violations " << r.plus_violations.size();
    if (r.targeted) {
      std::cout << ", counterexamples " << r.targeted->counterexamples.size() << " (" << r.ml_driven().size()
                << " ML-driven), disproved " << r.targeted->disproved.size() << ", evaluations "
                << r.targeted->evaluations;
    }
    std::cout << "\n";
    for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
    std::cout << "report written to " << (dir / "report.json").string() << "\n";
  } catch (const falsifier::StageError& e) {
    falsifier::write_outputs(e.partial(), dir, e.what());
    throw;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional falsification of CPS with ML components"};
  app.require_subcommand(1);

  MonitorArgs mon;
  auto* monitor = app.add_subcommand("monitor", "Evaluate an STL formula on a trace CSV");
  monitor->add_option("--trace", mon.trace, "Trace CSV (time column first)")->required();
  monitor->add_option("--formula", mon.formula, "STL formula")->required();
  auto* at = monitor->add_option("--at", mon.at, "Evaluation time (default: first sample)");
  monitor->add_option("--hold", mon.hold, "Signals read with sample-and-hold interpolation")->delimiter(',');

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze-ml", "Approximate a classifier over the abstract space and find misclassified regions");
  analyze->add_option("--scenario", ana.scenario, "Scenario JSON")->required();
  analyze->add_option("--out", ana.out, "Output directory (default: print the report)");
  analyze->add_option("--seed", ana.seed, "Override the scenario seed");

  FalsifyArgs fal;
  auto* falsify = app.add_subcommand("falsify", "Run the full compositional falsification pipeline");
  falsify->add_option("--scenario", fal.scenario, "Scenario JSON")->required();
  falsify->add_option("--out", fal.out, "Output directory")->required();
  falsify->add_option("--seed", fal.seed, "Override the scenario seed");
  falsify->add_option("--jobs", fal.jobs, "Worker threads (default: ROU_FALSIFY_JOBS or all cores)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (monitor->parsed()) {
      mon.at_set = at->count() > 0;
      return run_monitor(mon);
    }
    if (analyze->parsed()) return run_analyze(ana);
    return run_falsify(fal);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitError;
}
