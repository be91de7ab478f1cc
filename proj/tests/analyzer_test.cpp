#include <rouf/analyzer/analysis.hpp>
#include <rouf/analyzer/approx.hpp>
#include <rouf/analyzer/regions.hpp>
#include <rouf/analyzer/space.hpp>
#include <rouf/ml/classifier.hpp>
#include <rouf/sampling.hpp>

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace rouf;
using namespace rouf::analyzer;

namespace {

const ml::Box kPlanted{{0.4, 0.0, 0.15}, {0.5, 1.0, 0.25}};

AbstractSpace unit_space(std::size_t n) {
  std::vector<AbstractDim> dims;
  for (std::size_t j = 0; j < n; ++j) dims.push_back({"a" + std::to_string(j), {0, 1}, "", {0, 1}});
  return AbstractSpace(dims);
}

AbstractSpace scene_space() {
  return AbstractSpace({{"x", {0, 1}, "", {0, 1}}, {"distance", {0, 60}, "m", {0, 1}}, {"brightness", {0, 1}, "", {0, 1}}});
}

bool in_planted(std::span<const double> a) {
  for (std::size_t j = 0; j < 3; ++j) {
    if (a[j] < kPlanted.lo[j] || a[j] > kPlanted.hi[j]) return false;
  }
  return true;
}

// Connected components of the "distance <= r" graph by breadth-first search.
std::vector<std::set<std::size_t>> linkage_oracle(const std::vector<std::vector<double>>& pts, double r) {
  std::vector<int> comp(pts.size(), -1);
  std::vector<std::set<std::size_t>> out;
  for (std::size_t s = 0; s < pts.size(); ++s) {
    if (comp[s] >= 0) continue;
    out.emplace_back();
    std::vector<std::size_t> todo{s};
    comp[s] = static_cast<int>(out.size() - 1);
    while (!todo.empty()) {
      const std::size_t i = todo.back();
      todo.pop_back();
      out.back().insert(i);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (comp[k] < 0 && std::hypot(pts[i][0] - pts[k][0], pts[i][1] - pts[k][1]) <= r) {
          comp[k] = comp[s];
          todo.push_back(k);
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST(SampleAndLabel, EmptyBatchGivesEmptySet) {
  const auto space = unit_space(3);
  ml::SyntheticClassifier f(3, 1);
  EXPECT_TRUE(sample_and_label(space, Concretizer(space), f, sampling::halton(0, 3)).empty());
}

TEST(SampleAndLabel, ConstantClassifierLabelsEverythingAlike) {
  const auto space = unit_space(3);
  ml::SyntheticClassifier f(3, 0);
  for (const auto& p : sample_and_label(space, Concretizer(space), f, sampling::halton(200, 3))) EXPECT_EQ(p.label, 0);
}

TEST(SampleAndLabel, PlantedBoxOnGridMatchesMembershipCount) {
  const auto space = unit_space(3);
  ml::SyntheticClassifier f(3, 1, {kPlanted});
  const auto batch = sampling::grid(10, 3);
  std::size_t expected = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) expected += in_planted(batch.point(i));
  std::size_t zeros = 0;
  for (const auto& p : sample_and_label(space, Concretizer(space), f, batch)) zeros += p.label == 0;
  EXPECT_EQ(zeros, expected);
  // x = 0.45 and brightness in {0.15, 0.25} on the closed box, every distance
  EXPECT_EQ(expected, 20u);
}

TEST(SampleAndLabel, PointsLandInsideTheWindow) {
  const auto space = unit_space(2).with_window(1, {0.5, 1.0});
  ml::SyntheticClassifier f(2, 1);
  for (const auto& p : sample_and_label(space, Concretizer(space), f, sampling::halton(100, 2))) {
    EXPECT_TRUE(space.contains(p.a));
    EXPECT_GE(p.a[1], 0.5);
  }
}

TEST(SampleAndLabel, DimensionMismatchIsConfigError) {
  const auto space = unit_space(3);
  ml::SyntheticClassifier f(3, 1);
  EXPECT_THROW(sample_and_label(space, Concretizer(space), f, sampling::halton(5, 2)), ConfigError);
}

TEST(Concretizer, SemanticModeRescales) {
  const auto space = scene_space();
  Concretizer g(space, Concretizer::Mode::kSemantic);
  const auto x = g(std::vector<double>{0.5, 0.5, 0.25});
  EXPECT_DOUBLE_EQ(x[1], 30.0);
  EXPECT_DOUBLE_EQ(x[2], 0.25);
  EXPECT_THROW(g(std::vector<double>{0.5}), DomainError);
}

TEST(ApproxClassifier, InterpolatesTrainingSet) {
  const auto space = unit_space(3);
  ml::SyntheticClassifier f(3, 1, {kPlanted});
  const auto training = sample_and_label(space, Concretizer(space), f, sampling::halton(500, 3));
  ApproxClassifier approx(training);
  for (const auto& p : training) EXPECT_EQ(approx(p.a), p.label);
  EXPECT_EQ(approx.error(training), 0.0);
}

TEST(ApproxClassifier, TiesGoToLowestIndex) {
  ApproxClassifier approx({{{0.0}, 1}, {{1.0}, 0}});
  EXPECT_EQ(approx.nearest(std::vector<double>{0.5}), 0u);
  EXPECT_EQ(approx(std::vector<double>{0.6}), 0);
  EXPECT_THROW(ApproxClassifier({}), DomainError);
}

TEST(Approximate, ConstantClassifierConvergesInOneIteration) {
  const auto space = unit_space(3);
  ml::SyntheticClassifier f(3, 1);
  const auto r = approximate(space, Concretizer(space), f, {});
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.error, 0.0);
  ASSERT_EQ(r.batches.size(), 1u);
}

TEST(Approximate, ZeroEpsilonExhaustsTheBudget) {
  const auto space = unit_space(3);
  ml::SyntheticClassifier f(3, 1, {kPlanted});
  ApproxOptions o;
  o.epsilon = 0;
  o.max_iters = 2;
  try {
    approximate(space, Concretizer(space), f, o);
    FAIL() << "expected a budget error";
  } catch (const BudgetError& e) {
    EXPECT_EQ(e.best().batches.size(), e.best().iterations);
    EXPECT_GT(e.best().error, 0.0);
    EXPECT_LE(e.best().iterations, 2u);
  }
}

TEST(Approximate, TrainingBatchesDoNotRepeat) {
  ApproxOptions o;
  for (auto kind : {sampling::Kind::kHalton, sampling::Kind::kLattice, sampling::Kind::kUniform}) {
    o.sampler = kind;
    const auto a = analyzer::detail::training_batch(o, 2, 0);
    const auto b = analyzer::detail::training_batch(o, 2, 1);
    std::set<std::vector<double>> pts;
    for (std::size_t i = 0; i < a.size(); ++i) pts.insert(std::vector<double>(a.point(i).begin(), a.point(i).end()));
    std::size_t dup = 0;
    for (std::size_t i = 0; i < b.size(); ++i) dup += pts.count(std::vector<double>(b.point(i).begin(), b.point(i).end()));
    EXPECT_EQ(dup, 0u) << sampling::kind_name(kind);
  }
  o.sampler = sampling::Kind::kGrid;
  EXPECT_LT(analyzer::detail::training_batch(o, 2, 0).size(), analyzer::detail::training_batch(o, 2, 1).size());
}

TEST(Approximate, PlantedBoxReachesEpsilon) {
  const auto space = unit_space(3);
  ml::SyntheticClassifier f(3, 1, {kPlanted});
  ApproxOptions o;
  o.epsilon = 0.05;
  const auto r = approximate(space, Concretizer(space), f, o);
  EXPECT_LE(r.error, 0.05);
  EXPECT_EQ(r.f.samples().size(), r.iterations * o.batch);
}

TEST(Approximate, RejectsBadOptions) {
  const auto space = unit_space(1);
  ml::SyntheticClassifier f(1, 1);
  ApproxOptions o;
  o.epsilon = 2;
  EXPECT_THROW(approximate(space, Concretizer(space), f, o), ConfigError);
  o = {};
  o.batch = 0;
  EXPECT_THROW(approximate(space, Concretizer(space), f, o), ConfigError);
}

TEST(Misclassified, PerfectAlwaysWrongAndPlanted) {
  const auto space = unit_space(3);
  const auto gamma = Concretizer(space);
  const auto batch = sampling::halton(300, 3);
  auto perfect = std::make_shared<ml::SyntheticClassifier>(3, 1);
  ml::FlippedClassifier wrong(perfect);
  ml::SyntheticClassifier planted(3, 1, {kPlanted});
  EXPECT_TRUE(misclassified(sample_and_label(space, gamma, *perfect, batch), constant_truth(1)).empty());
  EXPECT_EQ(misclassified(sample_and_label(space, gamma, wrong, batch), constant_truth(1)).size(), 300u);
  const auto pts = sample_and_label(space, gamma, planted, batch);
  const auto bad = misclassified(pts, constant_truth(1));
  std::size_t inside = 0;
  for (const auto& p : pts) inside += in_planted(p.a);
  EXPECT_EQ(bad.size(), inside);
  for (const auto& a : bad) EXPECT_TRUE(in_planted(a));
}

TEST(Regions, EmptyAndSingleton) {
  EXPECT_TRUE(extract_regions({}).empty());
  const auto r = extract_regions({{0.3, 0.3}});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].tag, Region::Tag::kCornerCase);
  EXPECT_STREQ(tag_name(r[0].tag), "corner-case");
  EXPECT_TRUE(r[0].contains(std::vector<double>{0.3, 0.3}));
}

TEST(Regions, ClosePairIsOneCluster) {
  const auto r = extract_regions({{0.2, 0.2}, {0.25, 0.2}}, 0.1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].tag, Region::Tag::kCluster);
  EXPECT_EQ(r[0].members.size(), 2u);
  // padded by half of the 0.05 spacing
  EXPECT_NEAR(r[0].lo[0], 0.175, 1e-12);
  EXPECT_NEAR(r[0].hi[0], 0.275, 1e-12);
}

TEST(Regions, BoxesAreClampedToTheUnitCube) {
  const auto r = extract_regions({{0.0, 1.0}, {0.05, 0.95}});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].lo[0], 0.0);
  EXPECT_EQ(r[0].hi[1], 1.0);
}

TEST(Regions, DenseCornerClusterPlusIsolatedPoint) {
  std::vector<std::vector<double>> pts;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 0.15);
  for (int i = 0; i < 40; ++i) pts.push_back({u(rng), u(rng)});
  pts.push_back({0.8, 0.7});
  const auto regions = extract_regions(pts, 0.1);
  const auto oracle = linkage_oracle(pts, 0.1);
  ASSERT_EQ(regions.size(), oracle.size());
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(regions[0].tag, Region::Tag::kCluster);
  EXPECT_EQ(regions[0].members.size(), 40u);
  EXPECT_EQ(regions[1].tag, Region::Tag::kCornerCase);
  for (const auto& p : pts) {
    int hits = 0;
    for (const auto& r : regions) hits += r.contains(p);
    EXPECT_GE(hits, 1);
  }
}

TEST(Regions, RandomPointsMatchLinkageOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<double>> pts(5 + trial);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const auto regions = extract_regions(pts, 0.15);
    const auto oracle = linkage_oracle(pts, 0.15);
    ASSERT_EQ(regions.size(), oracle.size());
    std::size_t total = 0;
    for (const auto& r : regions) total += r.members.size();
    EXPECT_EQ(total, pts.size());
  }
}

TEST(Regions, PlantedBoxRecoveredOnFineGrid) {
  const auto space = unit_space(3);
  ml::SyntheticClassifier f(3, 1, {kPlanted});
  const std::size_t k = 20;
  const auto pts = sample_and_label(space, Concretizer(space), f, sampling::grid(k, 3));
  const auto regions = extract_regions(misclassified(pts, constant_truth(1)), 0.1);
  ASSERT_EQ(regions.size(), 1u);
  const auto& r = regions[0];
  // symmetric difference with the planted box stays within two cell layers per face
  const double cell = 1.0 / static_cast<double>(k);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_LE(std::abs(r.lo[j] - kPlanted.lo[j]), 2 * cell) << j;
    EXPECT_LE(std::abs(r.hi[j] - kPlanted.hi[j]), 2 * cell) << j;
  }
}

TEST(RestrictToRou, DistanceHullRescales) {
  const auto space = scene_space();
  const ParamBox box({{"v0", {0, 17.8816}, "m/s"}, {"d0", {0, 60}, "m"}});
  const Binding binding{{{1, "d0"}}};
  const std::vector<CellBounds> cells{{{5, 6}, {30, 31}}, {{5, 6}, {59, 60}}, {{7, 8}, {45, 46}}};
  const auto r = restrict_to_rou(space, box, cells, binding);
  ASSERT_TRUE(r.has_value());
  EXPECT_DOUBLE_EQ(r->dim(1).window.lo, 0.5);
  EXPECT_DOUBLE_EQ(r->dim(1).window.hi, 1.0);
  EXPECT_EQ(r->dim(0).window, (Range{0, 1}));
  EXPECT_EQ(r->dim(2).window, (Range{0, 1}));
}

TEST(RestrictToRou, UnboundFullAndEmpty) {
  const auto space = scene_space();
  const ParamBox box({{"v0", {0, 17.8816}, "m/s"}, {"d0", {0, 60}, "m"}});
  const std::vector<CellBounds> full{{{0, 1}, {0, 1}}, {{0, 1}, {59, 60}}};
  EXPECT_TRUE(restrict_to_rou(space, box, full, Binding{})->full());
  EXPECT_TRUE(restrict_to_rou(space, box, full, Binding{{{1, "d0"}}})->full());
  EXPECT_FALSE(restrict_to_rou(space, box, {}, Binding{{{1, "d0"}}}).has_value());
}

TEST(ProjectToCps, PlantedRegionKeepsSceneSubBox) {
  const auto space = scene_space();
  Region reg{{0.4, 0.0, 0.15}, {0.5, 1.0, 0.25}, {{0.45, 0.5, 0.2}}, Region::Tag::kCluster};
  const auto u = project_to_cps({reg}, Binding{{{1, "d0"}}}, space);
  ASSERT_EQ(u.size(), 1u);
  EXPECT_DOUBLE_EQ(u[0].params.at("d0").lo, 0.0);
  EXPECT_DOUBLE_EQ(u[0].params.at("d0").hi, 60.0);
  EXPECT_EQ(u[0].scene_lo, reg.lo);
  EXPECT_EQ(u[0].scene_hi, reg.hi);
  EXPECT_EQ(u[0].representatives.front(), reg.center());
  EXPECT_TRUE(project_to_cps({}, Binding{{{1, "d0"}}}, space).empty());
}

TEST(ProjectToCps, CornerCaseGivesOneCandidateDistance) {
  const auto space = scene_space();
  const std::vector<double> p{0.1933, 0.0244, 0.4589};
  const auto regions = extract_regions({p});
  const auto u = project_to_cps(regions, Binding{{{1, "d0"}}}, space);
  ASSERT_EQ(u.size(), 1u);
  EXPECT_EQ(u[0].tag, Region::Tag::kCornerCase);
  EXPECT_NEAR(u[0].params.at("d0").lo, 1.464, 1e-12);
  EXPECT_NEAR(u[0].params.at("d0").hi, 1.464, 1e-12);
  ASSERT_EQ(u[0].representatives.size(), 1u);
  EXPECT_EQ(u[0].representatives[0], p);
}

TEST(ProjectToCps, RepresentativesAreCappedAtCentrePlusEight) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({0.3 + 0.002 * i, 0.5, 0.5});
  const auto u = project_to_cps(extract_regions(pts), Binding{}, scene_space());
  ASSERT_EQ(u.size(), 1u);
  EXPECT_EQ(u[0].representatives.size(), 1 + kMaxMemberRepresentatives);
  EXPECT_TRUE(u[0].params.empty());
}

TEST(RestrictThenProject, RoundTripsBoundIntervalWithinACell) {
  const auto space = scene_space();
  const ParamBox box({{"v0", {0, 17.8816}, "m/s"}, {"d0", {0, 60}, "m"}});
  const Binding binding{{{1, "d0"}}};
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int a = static_cast<int>(rng() % 60), b = static_cast<int>(rng() % 60);
    const int lo = std::min(a, b), hi = std::max(a, b);
    const std::vector<CellBounds> cells{{{0, 1}, {double(lo), lo + 1.0}}, {{0, 1}, {double(hi), hi + 1.0}}};
    const auto r = restrict_to_rou(space, box, cells, binding);
    ASSERT_TRUE(r);
    const auto& w = r->dim(1).window;
    Region whole{{0, w.lo, 0}, {1, w.hi, 1}, {{0.5, w.lo, 0.5}, {0.5, w.hi, 0.5}}, Region::Tag::kCluster};
    const auto u = project_to_cps({whole}, binding, *r);
    EXPECT_NEAR(u[0].params.at("d0").lo, lo, 1.0);
    EXPECT_NEAR(u[0].params.at("d0").hi, hi + 1.0, 1.0);
  }
}

TEST(Analyze, ConstantClassifierHasNoMisclassifications) {
  const auto space = unit_space(3);
  ml::SyntheticClassifier f(3, 1);
  const auto a = analyze(space, Concretizer(space), f, constant_truth(1), {});
  EXPECT_TRUE(a.converged);
  EXPECT_TRUE(a.misclassified.empty());
  EXPECT_TRUE(a.regions.empty());
  const auto j = analysis_json(a);
  EXPECT_EQ(j["misclassified_count"], 0);
  EXPECT_EQ(j["samples"].size(), a.samples().size());
}

TEST(Analyze, PlantedBoxGivesRegionsAndKeepsUnconvergedResult) {
  const auto space = unit_space(3);
  const ml::Box corner{{0, 0, 0}, {0.5, 0.5, 0.5}};
  ml::SyntheticClassifier f(3, 1, {corner});
  AnalysisOptions o;
  o.approx.epsilon = 0;
  o.approx.max_iters = 2;
  o.approx.batch = 20;
  const auto a = analyze(space, Concretizer(space), f, constant_truth(1), o);
  EXPECT_FALSE(a.converged);
  EXPECT_FALSE(a.note.empty());
  EXPECT_FALSE(a.regions.empty());
  for (const auto& m : a.misclassified) {
    for (double x : m) EXPECT_LE(x, 0.5);
  }
  const auto csv = samples_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "a0,a1,a2,label,truth");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), a.samples().size() + 1);
}
