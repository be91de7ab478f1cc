#pragma once

#include <rouf/analyzer/analysis.hpp>
#include <rouf/analyzer/space.hpp>
#include <rouf/cps/aebs.hpp>
#include <rouf/error.hpp>
#include <rouf/falsifier/targeted.hpp>
#include <rouf/ml/classifier.hpp>
#include <rouf/ml/remote.hpp>
#include <rouf/params.hpp>
#include <rouf/stl/formula.hpp>
#include <rouf/stl/parser.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace rouf::falsifier {

struct ClassifierSpec {
  enum class Kind { kSynthetic, kRemote };
  Kind kind = Kind::kSynthetic;
  int base_label = 1;
  std::vector<ml::Box> boxes;
  double score_width = 0.1;
  ml::Endpoint endpoint;
  std::chrono::milliseconds timeout{2000};
};

/// A validated end-to-end configuration. Every range is stored in SI units.
struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  cps::AebsParams model;
  ParamBox box;
  std::string formula_text;
  stl::Formula formula = stl::Formula::top();
  std::vector<std::size_t> resolution{40, 60};
  analyzer::AbstractSpace space{{analyzer::AbstractDim{"a", {0, 1}, "", {0, 1}}}};
  analyzer::Binding binding;
  std::vector<double> scene;
  analyzer::Concretizer::Mode concretizer = analyzer::Concretizer::Mode::kNormalized;
  cps::SceneMode scene_mode = cps::SceneMode::kStatic;
  ClassifierSpec classifier;
  int truth = 1;
  analyzer::AnalysisOptions analysis;
  SearchOptions search;
  std::size_t confirm_samples = 50;
};

namespace detail {

class Reader {
 public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items()) {
      if (!ok.count(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const nlohmann::json& raw(const char* key) const {
    if (!j_.contains(key)) fail(std::string("missing key '") + key + "'");
    return j_.at(key);
  }
  std::string path(const char* key) const { return path_ + "." + key; }

  double number(const char* key, std::optional<double> def = std::nullopt) const {
    if (!j_.contains(key)) {
      if (def) return *def;
      fail(std::string("missing number '") + key + "'");
    }
    const auto& v = j_.at(key);
    if (!v.is_number()) fail(std::string("'") + key + "' must be a number");
    return v.get<double>();
  }

  std::uint64_t count(const char* key, std::optional<std::uint64_t> def = std::nullopt) const {
    if (!j_.contains(key)) {
      if (def) return *def;
      fail(std::string("missing integer '") + key + "'");
    }
    const auto& v = j_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(std::string("'") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const char* key, std::optional<std::string> def = std::nullopt) const {
    if (!j_.contains(key)) {
      if (def) return *def;
      fail(std::string("missing string '") + key + "'");
    }
    const auto& v = j_.at(key);
    if (!v.is_string()) fail(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_array()) fail(std::string("'") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(std::string("'") + key + "' must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }

 private:
  const nlohmann::json& j_;
  std::string path_;
};

inline sampling::Kind sampler_kind(const std::string& s, const std::string& path) {
  if (s == "halton") return sampling::Kind::kHalton;
  if (s == "lattice") return sampling::Kind::kLattice;
  if (s == "grid") return sampling::Kind::kGrid;
  if (s == "uniform") return sampling::Kind::kUniform;
  throw ConfigError(path + ": unknown sampler '" + s + "' (halton, lattice, grid, uniform)");
}

}  // namespace detail

/// Parses and cross-checks a scenario document (schema in README).
inline Scenario parse_scenario(const nlohmann::json& doc) {
  using detail::Reader;
  Scenario s;
  Reader root(doc, "scenario");
  root.allow({"name", "seed", "model", "box", "formula", "resolution", "abstract_space", "classifier", "truth",
              "analyzer", "falsifier", "scene_mode"});
  s.name = root.text("name", "scenario");
  s.seed = root.count("seed", 0);

  if (root.has("model")) {
    Reader m(root.raw("model"), root.path("model"));
    m.allow({"dt", "horizon", "radar_range", "ttc_warning", "ttc_braking", "ttc_mitigation", "decel_braking",
             "decel_mitigation"});
    auto& p = s.model;
    p.dt = m.number("dt", p.dt);
    p.horizon = m.number("horizon", p.horizon);
    p.radar_range = m.number("radar_range", p.radar_range);
    p.ttc_warning = m.number("ttc_warning", p.ttc_warning);
    p.ttc_braking = m.number("ttc_braking", p.ttc_braking);
    p.ttc_mitigation = m.number("ttc_mitigation", p.ttc_mitigation);
    p.decel_braking = m.number("decel_braking", p.decel_braking);
    p.decel_mitigation = m.number("decel_mitigation", p.decel_mitigation);
    p.validate();
  }

  {
    const auto& b = root.raw("box");
    if (!b.is_array() || b.size() != 2) root.fail("'box' must list exactly the parameters v0 and d0");
    std::vector<Param> params;
    for (std::size_t i = 0; i < b.size(); ++i) {
      Reader e(b[i], "scenario.box[" + std::to_string(i) + "]");
      e.allow({"name", "lo", "hi", "unit"});
      const std::string unit = e.text("unit", i == 0 ? "m/s" : "m");
      const bool speed = unit == "m/s" || unit == "mph";
      if (i == 0 ? !speed : unit != "m") e.fail("unit '" + unit + "' does not fit " + (i == 0 ? "a speed" : "a distance"));
      params.push_back(Param{e.text("name"), Range{to_si(e.number("lo"), unit), to_si(e.number("hi"), unit)}, si_unit(unit)});
    }
    if (params[0].name != "v0" || params[1].name != "d0") root.fail("'box' must list v0 then d0");
    s.box = ParamBox(std::move(params));
    const double slack = 1e-9;
    if (s.box[0].range.lo < 0 || s.box[0].range.hi > s.model.v_max + slack) {
      root.fail("v0 range must lie within [0, " + std::to_string(s.model.v_max) + "] m/s");
    }
    if (s.box[1].range.lo < 0 || s.box[1].range.hi > s.model.d_max + slack) {
      root.fail("d0 range must lie within [0, " + std::to_string(s.model.d_max) + "] m");
    }
    s.box = ParamBox({Param{"v0", Range{s.box[0].range.lo, std::min(s.box[0].range.hi, s.model.v_max)}, "m/s"},
                      Param{"d0", Range{s.box[1].range.lo, std::min(s.box[1].range.hi, s.model.d_max)}, "m"}});
  }

  s.formula_text = root.text("formula");
  try {
    s.formula = stl::parse(s.formula_text);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("scenario.formula: ") + e.what());
  }
  for (const auto& name : stl::signal_names(s.formula)) {
    const auto& known = cps::trace_signal_names();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError("scenario.formula: unknown signal '" + name + "' (v_s, dist, mode, detected)");
    }
  }

  if (root.has("resolution")) {
    const auto& r = root.raw("resolution");
    if (!r.is_array() || r.size() != s.box.size()) root.fail("'resolution' needs one entry per box parameter");
    s.resolution.clear();
    for (const auto& x : r) {
      if (!x.is_number_integer() || x.get<std::int64_t>() < 2) root.fail("'resolution' entries must be integers >= 2");
      s.resolution.push_back(x.get<std::size_t>());
    }
  }

  {
    Reader a(root.raw("abstract_space"), root.path("abstract_space"));
    a.allow({"dims", "binding", "scene", "concretizer"});
    const auto& dims = a.raw("dims");
    if (!dims.is_array() || dims.empty()) a.fail("'dims' must be a nonempty array");
    std::vector<analyzer::AbstractDim> out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      Reader d(dims[i], a.path("dims") + "[" + std::to_string(i) + "]");
      d.allow({"name", "lo", "hi", "unit"});
      out.push_back(analyzer::AbstractDim{d.text("name"), Range{d.number("lo", 0.0), d.number("hi", 1.0)}, d.text("unit", ""), {0, 1}});
    }
    s.space = analyzer::AbstractSpace(std::move(out));
    if (a.has("binding")) {
      const auto& b = a.raw("binding");
      if (!b.is_object()) a.fail("'binding' must map dimension names to parameter names");
      for (const auto& [dim, param] : b.items()) {
        const auto j = s.space.index_of(dim);
        if (!j) a.fail("binding names unknown dimension '" + dim + "'");
        if (!param.is_string() || !s.box.index_of(param.get<std::string>())) {
          a.fail("binding of '" + dim + "' must name a box parameter");
        }
        s.binding.entries.push_back({*j, param.get<std::string>()});
      }
    }
    if (s.binding.entries.size() > 1) a.fail("at most one dimension can be bound (the scene distance)");
    for (const auto& e : s.binding.entries) {
      if (e.param != "d0") a.fail("only d0 can be bound to a scene dimension");
    }
    if (a.has("scene")) {
      s.scene = a.numbers("scene");
    } else {
      s.scene.assign(s.space.size(), 0.5);
    }
    if (s.scene.size() != s.space.size()) a.fail("'scene' needs one coordinate per dimension");
    for (double x : s.scene) {
      if (!(x >= 0 && x <= 1)) a.fail("'scene' coordinates must lie in [0,1]");
    }
    const std::string mode = a.text("concretizer", "normalized");
    if (mode == "normalized") s.concretizer = analyzer::Concretizer::Mode::kNormalized;
    else if (mode == "semantic") s.concretizer = analyzer::Concretizer::Mode::kSemantic;
    else a.fail("'concretizer' must be normalized or semantic");
  }

  {
    Reader c(root.raw("classifier"), root.path("classifier"));
    const std::string kind = c.text("kind");
    if (kind == "synthetic") {
      c.allow({"kind", "base_label", "boxes", "score_width"});
      s.classifier.kind = ClassifierSpec::Kind::kSynthetic;
      s.classifier.base_label = static_cast<int>(c.count("base_label", 1));
      s.classifier.score_width = c.number("score_width", 0.1);
      if (c.has("boxes")) {
        const auto& boxes = c.raw("boxes");
        if (!boxes.is_array()) c.fail("'boxes' must be an array");
        for (std::size_t i = 0; i < boxes.size(); ++i) {
          Reader b(boxes[i], c.path("boxes") + "[" + std::to_string(i) + "]");
          b.allow({"lo", "hi"});
          s.classifier.boxes.push_back(ml::Box{b.numbers("lo"), b.numbers("hi")});
        }
      }
      try {
        ml::SyntheticClassifier(s.space.size(), s.classifier.base_label, s.classifier.boxes, s.classifier.score_width);
      } catch (const ConfigError& e) {
        c.fail(e.what());
      }
    } else if (kind == "remote") {
      c.allow({"kind", "host", "port", "timeout_ms"});
      s.classifier.kind = ClassifierSpec::Kind::kRemote;
      s.classifier.endpoint.host = c.text("host", "127.0.0.1");
      const auto port = c.count("port");
      if (port == 0 || port > 65535) c.fail("'port' must be in 1..65535");
      s.classifier.endpoint.port = static_cast<std::uint16_t>(port);
      s.classifier.timeout = std::chrono::milliseconds(c.count("timeout_ms", 2000));
      if (s.classifier.timeout.count() == 0) c.fail("'timeout_ms' must be positive");
    } else {
      c.fail("'kind' must be synthetic or remote");
    }
  }

  if (root.has("truth")) {
    const auto t = root.count("truth");
    if (t > 1) root.fail("'truth' must be 0 or 1");
    s.truth = static_cast<int>(t);
  }

  if (root.has("analyzer")) {
    Reader a(root.raw("analyzer"), root.path("analyzer"));
    a.allow({"sampler", "batch", "epsilon", "max_iters", "link_radius", "min_test"});
    auto& o = s.analysis;
    o.approx.sampler = detail::sampler_kind(a.text("sampler", "halton"), a.path("sampler"));
    o.approx.batch = a.count("batch", o.approx.batch);
    o.approx.epsilon = a.number("epsilon", o.approx.epsilon);
    o.approx.max_iters = a.count("max_iters", o.approx.max_iters);
    o.approx.min_test = a.count("min_test", o.approx.min_test);
    o.link_radius = a.number("link_radius", o.link_radius);
    if (o.approx.batch == 0) a.fail("'batch' must be >= 1");
    if (o.approx.max_iters == 0) a.fail("'max_iters' must be >= 1");
    if (!(o.approx.epsilon >= 0 && o.approx.epsilon <= 1)) a.fail("'epsilon' must lie in [0,1]");
    if (!(o.link_radius > 0)) a.fail("'link_radius' must be > 0");
  }

  if (root.has("falsifier")) {
    Reader f(root.raw("falsifier"), root.path("falsifier"));
    f.allow({"budget", "seeds", "rounds", "confirm_samples"});
    s.search.budget = f.count("budget", s.search.budget);
    s.search.seeds = f.count("seeds", s.search.seeds);
    s.search.rounds = f.count("rounds", s.search.rounds);
    s.confirm_samples = f.count("confirm_samples", s.confirm_samples);
    if (s.search.budget == 0) f.fail("'budget' must be >= 1");
  }

  const std::string scene_mode = root.text("scene_mode", "static");
  if (scene_mode == "static") s.scene_mode = cps::SceneMode::kStatic;
  else if (scene_mode == "tracked") s.scene_mode = cps::SceneMode::kTracked;
  else root.fail("'scene_mode' must be static or tracked");
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

inline ml::ClassifierPtr make_classifier(const Scenario& s) {
  if (s.classifier.kind == ClassifierSpec::Kind::kRemote) {
    return std::make_shared<ml::RemoteClassifier>(s.classifier.endpoint, s.space.size(), s.classifier.timeout);
  }
  return std::make_shared<ml::SyntheticClassifier>(s.space.size(), s.classifier.base_label, s.classifier.boxes,
                                                   s.classifier.score_width);
}

inline analyzer::Concretizer make_concretizer(const Scenario& s) { return analyzer::Concretizer(s.space, s.concretizer); }

/// Normalized echo of the effective configuration, for reports.
inline nlohmann::json scenario_json(const Scenario& s) {
  nlohmann::json box = nlohmann::json::array();
  for (const auto& p : s.box.params()) box.push_back({{"name", p.name}, {"lo", p.range.lo}, {"hi", p.range.hi}, {"unit", p.unit}});
  nlohmann::json binding = nlohmann::json::object();
  for (const auto& e : s.binding.entries) binding[s.space.dim(e.dim).name] = e.param;
  nlohmann::json clf;
  if (s.classifier.kind == ClassifierSpec::Kind::kSynthetic) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : s.classifier.boxes) boxes.push_back({{"lo", b.lo}, {"hi", b.hi}});
    clf = {{"kind", "synthetic"}, {"base_label", s.classifier.base_label}, {"boxes", boxes}, {"score_width", s.classifier.score_width}};
  } else {
    clf = {{"kind", "remote"}, {"endpoint", s.classifier.endpoint.str()}, {"timeout_ms", s.classifier.timeout.count()}};
  }
  const auto& m = s.model;
  return {{"name", s.name},
          {"seed", s.seed},
          {"model",
           {{"dt", m.dt}, {"horizon", m.horizon}, {"radar_range", m.radar_range}, {"ttc_warning", m.ttc_warning},
            {"ttc_braking", m.ttc_braking}, {"ttc_mitigation", m.ttc_mitigation}, {"decel_braking", m.decel_braking},
            {"decel_mitigation", m.decel_mitigation}}},
          {"box", box},
          {"formula", stl::to_string(s.formula)},
          {"resolution", s.resolution},
          {"abstract_space",
           {{"dims", analyzer::space_json(s.space)},
            {"binding", binding},
            {"scene", s.scene},
            {"concretizer", s.concretizer == analyzer::Concretizer::Mode::kNormalized ? "normalized" : "semantic"}}},
          {"classifier", clf},
          {"truth", s.truth},
          {"analyzer",
           {{"sampler", sampling::kind_name(s.analysis.approx.sampler)}, {"batch", s.analysis.approx.batch},
            {"epsilon", s.analysis.approx.epsilon}, {"max_iters", s.analysis.approx.max_iters},
            {"min_test", s.analysis.approx.min_test}, {"link_radius", s.analysis.link_radius}}},
          {"falsifier",
           {{"budget", s.search.budget}, {"seeds", s.search.seeds}, {"rounds", s.search.rounds},
            {"confirm_samples", s.confirm_samples}}},
          {"scene_mode", s.scene_mode == cps::SceneMode::kStatic ? "static" : "tracked"}};
}

}  // namespace rouf::falsifier
