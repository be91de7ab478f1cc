#include <rouf/trace.hpp>

#include <gtest/gtest.h>

#include <random>

using rouf::Interp;
using rouf::Signal;
using rouf::TimeGrid;
using rouf::Trace;

TEST(TimeGrid, RejectsBadArguments) {
  EXPECT_THROW(TimeGrid(0, 0, 3), rouf::DomainError);
  EXPECT_THROW(TimeGrid(0, -1, 3), rouf::DomainError);
  EXPECT_THROW(TimeGrid(0, 0.1, 0), rouf::DomainError);
}

TEST(TimeGrid, IndexOfSnapsOnlyToGridPoints) {
  TimeGrid g(0, 0.1, 11);
  EXPECT_EQ(g.index_of(0.3), 3u);
  EXPECT_EQ(g.index_of(1.0), 10u);
  EXPECT_FALSE(g.index_of(0.35).has_value());
  EXPECT_FALSE(g.index_of(1.1).has_value());
}

TEST(ValueAt, ConstantSignal) {
  Signal s("c", TimeGrid(0, 0.5, 5), std::vector<double>(5, 7.0));
  for (double t : {0.0, 0.3, 1.25, 2.0}) EXPECT_EQ(rouf::value_at(s, t), 7.0);
}

TEST(ValueAt, LinearMidpoint) {
  Signal s("x", TimeGrid(0, 1, 2), {0.0, 2.0}, Interp::kLinear);
  EXPECT_DOUBLE_EQ(rouf::value_at(s, 0.5), 1.0);
}

TEST(ValueAt, HoldPrevious) {
  Signal s("m", TimeGrid(0, 1, 2), {3.0, 7.0}, Interp::kHold);
  EXPECT_EQ(rouf::value_at(s, 0.5), 3.0);
  EXPECT_EQ(rouf::value_at(s, 1.0), 7.0);
}

TEST(ValueAt, OutOfDomain) {
  Signal s("x", TimeGrid(0, 1, 2), {0.0, 2.0});
  EXPECT_THROW(rouf::value_at(s, -0.5), rouf::DomainError);
  EXPECT_THROW(rouf::value_at(s, 1.5), rouf::DomainError);
}

TEST(ValueAt, GridTimesAreExactInBothModes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-100, 100);
  TimeGrid g(0.3, 0.07, 40);
  std::vector<double> v(40);
  for (double& x : v) x = u(rng);
  for (Interp mode : {Interp::kHold, Interp::kLinear}) {
    Signal s("s", g, v, mode);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(rouf::value_at(s, g.time(k)), v[k]);
  }
}

TEST(ValueAt, LinearIsLipschitzWithMaxAdjacentSlope) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  TimeGrid g(0, 0.25, 30);
  std::vector<double> v(30);
  for (double& x : v) x = u(rng);
  double lip = 0;
  for (std::size_t k = 1; k < v.size(); ++k) lip = std::max(lip, std::abs(v[k] - v[k - 1]) / g.dt());
  Signal s("s", g, v, Interp::kLinear);
  std::uniform_real_distribution<double> ut(0, g.end() - 1e-3);
  for (int i = 0; i < 500; ++i) {
    const double t = ut(rng);
    const double eps = 1e-3;
    EXPECT_LE(std::abs(rouf::value_at(s, t) - rouf::value_at(s, t + eps)), lip * eps * (1 + 1e-9) + 1e-12);
  }
}

TEST(Signal, RejectsLengthMismatchAndNonFinite) {
  EXPECT_THROW(Signal("x", TimeGrid(0, 1, 3), {1.0, 2.0}), rouf::DomainError);
  EXPECT_THROW(Signal("x", TimeGrid(0, 1, 2), {1.0, std::nan("")}), rouf::DomainError);
}

TEST(Trace, SharedGridAndUniqueNames) {
  Trace tr(TimeGrid(0, 1, 2));
  tr.add(Signal("a", TimeGrid(0, 1, 2), {1, 2}));
  EXPECT_THROW(tr.add(Signal("a", TimeGrid(0, 1, 2), {1, 2})), rouf::DomainError);
  EXPECT_THROW(tr.add(Signal("b", TimeGrid(0, 0.5, 2), {1, 2})), rouf::DomainError);
  EXPECT_THROW(tr.at("zz"), rouf::UnknownSignalError);
}

TEST(TraceCsv, TwoRowsOneSignal) {
  const Trace tr = rouf::trace_from_csv("time,x\n0,1.5\n0.1,2.5\n");
  EXPECT_EQ(tr.grid().size(), 2u);
  EXPECT_DOUBLE_EQ(tr.grid().dt(), 0.1);
  EXPECT_EQ(tr.at("x")[1], 2.5);
}

TEST(TraceCsv, RoundTripTenStepsThreeSignals) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  TimeGrid g(0, 0.1, 10);
  Trace tr(g);
  for (const char* name : {"v_s", "dist", "mode"}) {
    std::vector<double> v(10);
    for (double& x : v) x = u(rng);
    tr.add(Signal(name, g, v));
  }
  const std::string csv = rouf::trace_to_csv(tr);
  const Trace back = rouf::trace_from_csv(csv);
  EXPECT_EQ(rouf::trace_to_csv(back), csv);
  for (const auto& s : tr.signals()) {
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(back.at(s.name())[k], s[k]);
  }
  EXPECT_NEAR(back.grid().dt(), 0.1, 1e-15);
}

TEST(TraceCsv, InterpolationDeclaredPerSignal) {
  rouf::InterpMap modes{{"mode", Interp::kHold}};
  const Trace tr = rouf::trace_from_csv("time,mode,x\n0,0,0\n1,1,1\n", modes);
  EXPECT_EQ(tr.at("mode").interp(), Interp::kHold);
  EXPECT_EQ(tr.at("x").interp(), Interp::kLinear);
}

TEST(TraceCsv, NonUniformTimesNameTheRow) {
  try {
    rouf::trace_from_csv("time,x\n0,1\n0.1,1\n0.25,1\n");
    FAIL() << "expected a parse error";
  } catch (const rouf::ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(TraceCsv, RaggedAndNonFiniteRows) {
  EXPECT_THROW(rouf::trace_from_csv("time,x\n0,1\n1\n"), rouf::ParseError);
  EXPECT_THROW(rouf::trace_from_csv("time,x\n0,1\n1,nan\n"), rouf::ParseError);
  EXPECT_THROW(rouf::trace_from_csv("time,x\n0,1\n1,inf\n"), rouf::ParseError);
  EXPECT_THROW(rouf::trace_from_csv("time,x\n0,1\n1,abc\n"), rouf::ParseError);
  EXPECT_THROW(rouf::trace_from_csv("t,x\n0,1\n"), rouf::ParseError);
  EXPECT_THROW(rouf::trace_from_csv("time,x\n1,1\n0,1\n"), rouf::ParseError);
}
