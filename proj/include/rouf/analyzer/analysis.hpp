#pragma once

#include <rouf/analyzer/approx.hpp>
#include <rouf/analyzer/regions.hpp>
#include <rouf/analyzer/space.hpp>
#include <rouf/sampling.hpp>
#include <rouf/trace.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace rouf::analyzer {

struct AnalysisOptions {
  ApproxOptions approx;
  double link_radius = 0.1;
};

/// Everything the ML analyzer learned about one classifier over one (restricted) space.
struct MlAnalysis {
  AbstractSpace space;
  ApproxResult approx;
  bool converged = true;
  std::string note;
  std::vector<int> truth;  // ground truth for each training sample
  std::vector<std::vector<double>> misclassified;
  std::vector<Region> regions;

  const AbstractSamples& samples() const noexcept { return approx.f.samples(); }
};

/// Runs the approximation loop, then clusters the training points whose label
/// disagrees with the ground truth. An approximation that runs out of iterations
/// is kept (flagged unconverged) so its samples can still be analyzed.
inline MlAnalysis analyze(const AbstractSpace& space, const Concretizer& gamma, const ml::Classifier& f,
                          const TruthFn& truth, const AnalysisOptions& o) {
  std::optional<ApproxResult> result;
  bool converged = true;
  std::string note;
  try {
    result = approximate(space, gamma, f, o.approx);
  } catch (const BudgetError& e) {
    result = e.best();
    converged = false;
    note = e.what();
  }
  MlAnalysis a{space, std::move(*result), converged, std::move(note), {}, {}, {}};
  for (const auto& s : a.samples()) a.truth.push_back(truth(s.a));
  a.misclassified = misclassified(a.samples(), truth);
  a.regions = extract_regions(a.misclassified, o.link_radius);
  return a;
}

inline nlohmann::json space_json(const AbstractSpace& space) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : space.dims()) {
    dims.push_back({{"name", d.name},
                    {"semantic", {d.semantic.lo, d.semantic.hi}},
                    {"unit", d.unit},
                    {"window", {d.window.lo, d.window.hi}}});
  }
  return dims;
}

inline nlohmann::json region_json(const Region& r) {
  return {{"lo", r.lo}, {"hi", r.hi}, {"tag", tag_name(r.tag)}, {"members", r.members.size()}};
}

inline nlohmann::json analysis_json(const MlAnalysis& a) {
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t i = 0; i < a.samples().size(); ++i) {
    samples.push_back({{"point", a.samples()[i].a}, {"label", a.samples()[i].label}, {"truth", a.truth[i]}});
  }
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : a.regions) regions.push_back(region_json(r));
  nlohmann::json batches = nlohmann::json::array();
  for (const auto& p : a.approx.batches) batches.push_back(sampling::provenance_json(p));
  nlohmann::json j{{"space", space_json(a.space)},
                   {"iterations", a.approx.iterations},
                   {"error", a.approx.error},
                   {"converged", a.converged},
                   {"batches", batches},
                   {"sample_count", a.samples().size()},
                   {"misclassified_count", a.misclassified.size()},
                   {"regions", regions},
                   {"samples", samples}};
  if (!a.note.empty()) j["note"] = a.note;
  return j;
}

/// One row per training sample: abstract coordinates, label, truth.
inline std::string samples_csv(const MlAnalysis& a) {
  std::string out;
  for (const auto& d : a.space.dims()) out += d.name + ",";
  out += "label,truth\n";
  for (std::size_t i = 0; i < a.samples().size(); ++i) {
    for (double x : a.samples()[i].a) out += rouf::detail::format_shortest(x) + ",";
    out += std::to_string(a.samples()[i].label) + "," + std::to_string(a.truth[i]) + "\n";
  }
  return out;
}

}  // namespace rouf::analyzer
