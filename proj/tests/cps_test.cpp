#include <rouf/cps/aebs.hpp>
#include <rouf/ml/classifier.hpp>
#include <rouf/stl/monitor.hpp>
#include <rouf/stl/parser.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>

using namespace rouf;
using namespace rouf::cps;

namespace {

analyzer::AbstractSpace scene_space() {
  return analyzer::AbstractSpace(
      {{"x", {0, 1}, "", {0, 1}}, {"distance", {0, 60}, "m", {0, 1}}, {"brightness", {0, 1}, "", {0, 1}}});
}

Concrete concrete(ml::ClassifierPtr f) { return Concrete{std::move(f), analyzer::Concretizer(scene_space()), 1}; }

const Scene kScene{{0.5, 0.5, 0.5}, SceneMode::kStatic};

// Straight re-statement of the plant and controller with every detection taken
// from `seen(dist)`; returns the minimum gap.
template <class Seen>
double oracle_min_dist(const AebsParams& p, double v, double d, Seen seen) {
  double lowest = d;
  for (std::size_t k = 0; k + 1 < p.steps() && d > 0; ++k) {
    double a = 0;
    if (seen(d)) {
      const double ttc = d / std::max(v, 1e-6);
      if (ttc <= p.ttc_mitigation) a = -p.decel_mitigation;
      else if (ttc <= p.ttc_braking) a = -p.decel_braking;
    }
    v = std::max(0.0, v + a * p.dt);
    d -= v * p.dt;
    lowest = std::min(lowest, d);
  }
  return lowest;
}

std::vector<double> sig(const Trace& t, const char* name) {
  const auto v = t.at(name).values();
  return {v.begin(), v.end()};
}

bool same(const Signal& a, const Signal& b) { return std::equal(a.values().begin(), a.values().end(), b.values().begin(), b.values().end()); }

double min_dist(const Trace& t) {
  const auto v = sig(t, "dist");
  return *std::min_element(v.begin(), v.end());
}

class CountingClassifier : public ml::Classifier {
 public:
  explicit CountingClassifier(std::size_t n) : n_(n) {}
  std::size_t arity() const noexcept override { return n_; }
  ml::Verdict classify(std::span<const double> x) const override {
    check_arity(x);
    ++calls;
    return {1, 1.0};
  }
  mutable std::atomic<int> calls{0};

 private:
  std::size_t n_;
};

}  // namespace

TEST(Aebs, StandingStillKeepsTheGap) {
  const auto f = stl::parse("G(dist > 0)");
  for (MLMode ml : {MLMode{Perfect{}}, MLMode{AlwaysWrong{}}}) {
    for (double d0 : {0.5, 20.0, 45.0}) {
      const Trace t = simulate(AebsModel{{}, ml}, 0.0, d0);
      for (double d : sig(t, "dist")) EXPECT_EQ(d, d0);
      EXPECT_DOUBLE_EQ(stl::eval_robustness(f, t, 0.0), d0);
    }
  }
}

TEST(Aebs, TraceLayout) {
  const Trace t = simulate(AebsModel{}, 10.0, 50.0);
  EXPECT_EQ(t.grid().size(), 101u);
  EXPECT_DOUBLE_EQ(t.grid().dt(), 0.1);
  for (const auto& name : trace_signal_names()) EXPECT_NE(t.find(name), nullptr) << name;
  EXPECT_EQ(t.at("mode").interp(), Interp::kHold);
  EXPECT_EQ(t.at("dist").interp(), Interp::kLinear);
}

TEST(Aebs, PerfectPerceptionStopsFromModerateSpeed) {
  const AebsModel m{{}, Perfect{}};
  const Trace t = simulate(m, 11.2, 40.0);
  const double lowest = min_dist(t);
  EXPECT_GT(lowest, 0.0);
  EXPECT_DOUBLE_EQ(lowest, oracle_min_dist(m.params, 11.2, 40.0, [](double) { return true; }));
  EXPECT_NEAR(lowest, 1.83, 0.01);
  // stopping from 11.2 m/s at the softer deceleration needs less than the gap
  EXPECT_LT(11.2 * 11.2 / (2 * m.params.decel_braking), 40.0);
}

TEST(Aebs, AlwaysWrongCollidesFromHighSpeed) {
  const AebsModel m{{}, AlwaysWrong{}};
  const Trace t = simulate(m, 17.0, 60.0);
  const double lowest = min_dist(t);
  EXPECT_LE(lowest, 0.0);
  EXPECT_DOUBLE_EQ(lowest, oracle_min_dist(m.params, 17.0, 60.0, [&](double d) { return d <= m.params.radar_range; }));
  EXPECT_NEAR(lowest, -0.58, 0.01);
}

TEST(Aebs, CollisionLatchesEverySignal) {
  const Trace t = simulate(AebsModel{{}, AlwaysWrong{}}, 17.0, 60.0);
  const auto d = sig(t, "dist");
  const auto k = static_cast<std::size_t>(std::find_if(d.begin(), d.end(), [](double x) { return x <= 0; }) - d.begin());
  ASSERT_LT(k, d.size());
  for (const auto& s : t.signals()) {
    for (std::size_t i = k + 1; i < d.size(); ++i) EXPECT_EQ(s[i], s[k]) << s.name();
  }
}

TEST(Aebs, AlwaysWrongSeesOnlyWithRadar) {
  const Trace t = simulate(AebsModel{{}, AlwaysWrong{}}, 15.0, 59.0);
  const auto d = sig(t, "dist");
  const auto det = sig(t, "detected");
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] > 0) EXPECT_EQ(det[k], d[k] <= 30.0 ? 1.0 : 0.0) << k;
  }
}

TEST(Aebs, PerfectEqualsUnlimitedRadar) {
  AebsParams wide;
  wide.radar_range = 1e9;
  for (double v0 : {3.0, 9.0, 17.5}) {
    for (double d0 : {5.0, 33.0, 60.0}) {
      const Trace a = simulate(AebsModel{{}, Perfect{}}, v0, d0);
      const Trace b = simulate(AebsModel{wide, AlwaysWrong{}}, v0, d0);
      for (std::size_t s = 0; s < a.signals().size(); ++s) {
        EXPECT_TRUE(same(a.signals()[s], b.signals()[s]));
      }
    }
  }
}

TEST(Aebs, ModeFollowsTtcBands) {
  const AebsModel m{{}, Perfect{}};
  const Trace t = simulate(m, 15.0, 55.0);
  const auto v = sig(t, "v_s");
  const auto d = sig(t, "dist");
  const auto mode = sig(t, "mode");
  for (std::size_t k = 0; k < v.size() && d[k] > 0; ++k) {
    const double ttc = d[k] / std::max(v[k], 1e-6);
    const double want = ttc <= 1 ? 3 : ttc <= 3 ? 2 : ttc <= 4 ? 1 : 0;
    EXPECT_EQ(mode[k], want) << k;
  }
}

TEST(Aebs, DeterministicBitwise) {
  auto f = std::make_shared<ml::SyntheticClassifier>(3, 1, std::vector<ml::Box>{{{0.4, 0.0, 0.15}, {0.5, 1.0, 0.25}}});
  const AebsModel m{{}, concrete(f)};
  const Scene scene{{0.45, 0.5, 0.2}, SceneMode::kTracked};
  const Trace a = simulate(m, 14.0, 52.0, scene);
  const Trace b = simulate(m, 14.0, 52.0, scene);
  for (std::size_t s = 0; s < a.signals().size(); ++s) EXPECT_TRUE(same(a.signals()[s], b.signals()[s]));
}

TEST(Aebs, PerfectSafetyIsMonotoneInTheGap) {
  const AebsModel m{{}, Perfect{}};
  for (int i = 0; i <= 20; ++i) {
    const double v0 = 17.9 * i / 20.0;
    bool safe_before = false;
    for (int k = 0; k <= 60; ++k) {
      const bool safe = min_dist(simulate(m, v0, static_cast<double>(k))) > 0;
      if (safe_before) EXPECT_TRUE(safe) << v0 << " " << k;
      safe_before = safe_before || safe;
    }
  }
}

TEST(Aebs, GapNeverGrows) {
  for (MLMode ml : {MLMode{Perfect{}}, MLMode{AlwaysWrong{}}}) {
    for (double v0 = 0; v0 <= 17.9; v0 += 2.5) {
      for (double d0 = 0; d0 <= 60; d0 += 7.5) {
        const auto d = sig(simulate(AebsModel{{}, ml}, v0, d0), "dist");
        for (std::size_t k = 1; k < d.size(); ++k) EXPECT_LE(d[k], d[k - 1]);
        const auto v = sig(simulate(AebsModel{{}, ml}, v0, d0), "v_s");
        for (double x : v) EXPECT_GE(x, 0.0);
      }
    }
  }
}

TEST(Aebs, ConstantOneClassifierMatchesPerfect) {
  const AebsModel perfect{{}, Perfect{}};
  const AebsModel conc = make_variant(perfect, concrete(std::make_shared<ml::SyntheticClassifier>(3, 1)));
  for (int i = 0; i < 10; ++i) {
    for (int k = 0; k < 10; ++k) {
      const double v0 = 17.9 * i / 9.0, d0 = 60.0 * k / 9.0;
      for (SceneMode mode : {SceneMode::kStatic, SceneMode::kTracked}) {
        const Trace a = simulate(perfect, v0, d0, {{0.3, 0.3, 0.3}, mode});
        const Trace b = simulate(conc, v0, d0, {{0.3, 0.3, 0.3}, mode});
        for (std::size_t s = 0; s < a.signals().size(); ++s) EXPECT_TRUE(same(a.signals()[s], b.signals()[s]));
      }
    }
  }
}

TEST(Aebs, StaticSceneClassifiesOnceTrackedEveryStep) {
  auto f = std::make_shared<CountingClassifier>(3);
  const AebsModel m{{}, concrete(f)};
  simulate(m, 0.0, 50.0, {{0.5, 0.5, 0.5}, SceneMode::kStatic});
  EXPECT_EQ(f->calls.load(), 1);
  f->calls = 0;
  const Trace t = simulate(m, 0.0, 50.0, {{0.5, 0.5, 0.5}, SceneMode::kTracked});
  EXPECT_EQ(f->calls.load(), static_cast<int>(t.grid().size()));
  f->calls = 0;
  simulate(m, 5.0, 20.0, {{0.5, 0.5, 0.5}, SceneMode::kTracked});
  EXPECT_EQ(f->calls.load(), 0);  // radar covers every step
}

TEST(Aebs, TrackedSceneFollowsTheLiveGap) {
  // misclassifies only while the gap is 36..42 m
  auto f = std::make_shared<ml::SyntheticClassifier>(3, 1, std::vector<ml::Box>{{{0, 0.6, 0}, {1, 0.7, 1}}});
  const AebsModel m{{}, concrete(f)};
  const Trace t = simulate(m, 10.0, 50.0, {{0.9, 0.1, 0.9}, SceneMode::kTracked});
  const auto d = sig(t, "dist");
  const auto det = sig(t, "detected");
  for (std::size_t k = 0; k < d.size(); ++k) {
    const bool blind = d[k] > 30 && d[k] >= 36 && d[k] <= 42;
    EXPECT_EQ(det[k], blind ? 0.0 : 1.0) << d[k];
  }
  const Trace s = simulate(m, 10.0, 40.0, {{0.9, 0.1, 0.9}, SceneMode::kStatic});
  const auto ds = sig(s, "dist");
  const auto dets = sig(s, "detected");
  for (std::size_t k = 0; k < ds.size(); ++k) {
    if (ds[k] > 30) EXPECT_EQ(dets[k], 0.0) << ds[k];
  }
}

TEST(Aebs, MissingObstacleInvertsAbstractions) {
  AebsModel m{{}, Perfect{}, false};
  const auto det = sig(simulate(m, 5.0, 50.0), "detected");
  EXPECT_EQ(det.front(), 0.0);
  m.ml = AlwaysWrong{};
  EXPECT_EQ(sig(simulate(m, 5.0, 50.0), "detected").front(), 1.0);
}

TEST(Aebs, InputErrors) {
  const AebsModel m{};
  EXPECT_THROW(simulate(m, -1.0, 10.0), InputError);
  EXPECT_THROW(simulate(m, 18.0, 10.0), InputError);
  EXPECT_THROW(simulate(m, 5.0, 61.0), InputError);
  EXPECT_THROW(simulate(m, 5.0, std::nan("")), InputError);
  const AebsModel c{{}, concrete(std::make_shared<ml::SyntheticClassifier>(3, 1))};
  EXPECT_THROW(simulate(c, 5.0, 40.0, {{0.5, 0.5}, SceneMode::kStatic}), InputError);
  EXPECT_THROW(simulate(c, 5.0, 40.0, {{0.5, 1.5, 0.5}, SceneMode::kStatic}), InputError);
  const AebsModel none{{}, Concrete{nullptr, analyzer::Concretizer(scene_space()), 1}};
  EXPECT_THROW(simulate(none, 5.0, 40.0, kScene), ConfigError);
}

TEST(Aebs, ParamValidation) {
  AebsParams p;
  p.dt = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.ttc_braking = 5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.horizon = 0.05;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_EQ(AebsParams{}.steps(), 101u);
}

TEST(Aebs, VariantNames) {
  EXPECT_STREQ(ml_mode_name(Perfect{}), "perfect");
  EXPECT_STREQ(ml_mode_name(AlwaysWrong{}), "always-wrong");
  EXPECT_STREQ(mode_name(Mode::kMitigation), "mitigation");
  const AebsModel base{};
  EXPECT_TRUE(std::holds_alternative<AlwaysWrong>(make_variant(base, AlwaysWrong{}).ml));
}
