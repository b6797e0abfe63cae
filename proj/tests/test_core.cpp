#include "support.hpp"

#include <gtest/gtest.h>

using namespace gdfl;
using testsupport::Gen;
using testsupport::uniform_box;

TEST(Box, RejectsBadBounds) {
  EXPECT_THROW(Box(Vector::Constant(1, 1.0), Vector::Constant(1, 0.0), IntVector::Zero(1), IntVector::Ones(1)),
               UsageError);
  EXPECT_THROW(Box(Vector::Zero(1), Vector::Ones(1), IntVector::Constant(1, 2), IntVector::Constant(1, 1)),
               UsageError);
  EXPECT_THROW(Box(Vector::Zero(1), Vector::Ones(2), IntVector::Zero(1), IntVector::Ones(1)), UsageError);
  EXPECT_THROW(Box(Vector::Zero(1), Vector::Ones(1), IntVector(0), IntVector(0)), UsageError);
  Vector inf = Vector::Constant(1, std::numeric_limits<double>::infinity());
  EXPECT_THROW(Box(Vector::Zero(1), inf, IntVector::Zero(1), IntVector::Ones(1)), UsageError);
}

TEST(Box, Contains) {
  const Box box = uniform_box(2, -1, 1, 1, 0, 3);
  EXPECT_TRUE(box.contains({Vector::Zero(2), IntVector::Constant(1, 3)}));
  EXPECT_FALSE(box.contains({Vector::Constant(2, 1.5), IntVector::Zero(1)}));
  EXPECT_FALSE(box.contains({Vector::Zero(2), IntVector::Constant(1, 4)}));
  EXPECT_FALSE(box.contains({Vector::Zero(3), IntVector::Zero(1)}));
}

TEST(ProjectBox, ClampsComponentwise) {
  Vector lx(3), ux(3), x(3);
  lx << 0, 0, 0;
  ux << 1, 1, 1;
  x << -0.5, 0.5, 2.0;
  Vector expect(3);
  expect << 0, 0.5, 1;
  EXPECT_EQ(project_box(x, lx, ux), expect);
  EXPECT_THROW(project_box(Vector::Zero(2), lx, ux), UsageError);
}

TEST(ProjectBox, IdempotentAndNonExpansive) {
  Gen gen(7);
  for (int t = 0; t < 200; ++t) {
    const Vector lx = gen.vec(5, -3, 0);
    const Vector ux = lx + gen.vec(5, 0, 3);
    const Vector a = gen.vec(5, -6, 6), b = gen.vec(5, -6, 6);
    const Vector pa = project_box(a, lx, ux), pb = project_box(b, lx, ux);
    EXPECT_EQ(project_box(pa, lx, ux), pa);
    EXPECT_LE((pa - pb).norm(), (a - b).norm() + 1e-15);
  }
}

TEST(Stationarity, ResidualExamples) {
  const Box box = uniform_box(2, 0, 1, 1, 0, 1);
  Vector x(2), g(2);
  // Interior point with zero gradient.
  x << 0.5, 0.5;
  g << 0, 0;
  EXPECT_EQ(stationarity_residual(x, g, box), 0.0);
  // Lower bound, gradient pushing outward: stationary.
  x << 0.0, 0.5;
  g << 3.0, 0.0;
  EXPECT_EQ(stationarity_residual(x, g, box), 0.0);
  // Interior, nonzero gradient: residual min(|g|, distance to the bound).
  x << 0.5, 0.5;
  g << 0.2, -2.0;
  EXPECT_DOUBLE_EQ(stationarity_residual(x, g, box), 0.5);
}

TEST(Evaluator, CountsAndMemoizes) {
  const Box box = uniform_box(1, -1, 1, 1, -2, 2);
  const Problem p = testsupport::separable_quadratic(box, Vector::Ones(1), Vector::Zero(1), Vector::Ones(1),
                                                     Vector::Zero(1));
  Evaluator plain(p);
  const MixedPoint q{Vector::Constant(1, 0.5), IntVector::Constant(1, 1)};
  plain.f(q);
  plain.f(q);
  plain.grad(q);
  EXPECT_EQ(plain.n_f(), 2u);
  EXPECT_EQ(plain.n_g(), 1u);

  Evaluator memo(p, true);
  EXPECT_DOUBLE_EQ(memo.f(q), 1.25);
  memo.f(q);
  memo.grad(q);
  memo.grad(q);
  EXPECT_EQ(memo.n_f(), 1u);
  EXPECT_EQ(memo.n_g(), 1u);
}

TEST(Evaluator, NonFiniteObjectiveIsOracleError) {
  const Box box = uniform_box(1, -1, 1, 1, 0, 1);
  Problem p(
      "nan", box, [](const Vector& x, const IntVector&) { return x[0] > 0 ? std::nan("") : 0.0; },
      [](const Vector& x, const IntVector&) { return Vector::Zero(x.size()); });
  Evaluator ev(p);
  EXPECT_NO_THROW(ev.f(Vector::Constant(1, -0.5), IntVector::Zero(1)));
  try {
    ev.f(Vector::Constant(1, 0.5), IntVector::Zero(1));
    FAIL() << "expected OracleError";
  } catch (const OracleError& e) {
    EXPECT_NE(std::string(e.what()).find("x=[0.5]"), std::string::npos);
  }
}

TEST(Problem, StartingPointsAreFeasibleAndSeeded) {
  const Box box = uniform_box(4, -2, 3, 3, -5, 7);
  const Problem p = testsupport::separable_quadratic(box, Vector::Ones(4), Vector::Zero(4), Vector::Ones(3),
                                                     Vector::Zero(3));
  for (std::uint64_t s = 0; s < 50; ++s) {
    const MixedPoint a = p.starting_point(s);
    EXPECT_TRUE(box.contains(a));
    EXPECT_EQ(a, p.starting_point(s));
  }
  EXPECT_FALSE(p.starting_point(0) == p.starting_point(1));
}

TEST(Problem, InfeasibleStartRuleRejected) {
  const Box box = uniform_box(1, 0, 1, 1, 0, 1);
  Problem p = testsupport::separable_quadratic(box, Vector::Ones(1), Vector::Zero(1), Vector::Ones(1),
                                               Vector::Zero(1));
  p.set_start_rule([](const Box&, std::uint64_t) { return MixedPoint{Vector::Constant(1, 2.0), IntVector::Zero(1)}; });
  EXPECT_THROW(p.starting_point(0), UsageError);
}

TEST(SolverConfig, ValidatesAndResolvesSteps) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.resolved_p_steps(100), 10);
  EXPECT_EQ(c.resolved_p_steps(101), 11);
  EXPECT_EQ(c.resolved_p_steps(3), 1);
  c.p_steps = 4;
  EXPECT_EQ(c.resolved_p_steps(100), 4);
  c.eta = 1.0;
  EXPECT_THROW(c.validate(), UsageError);
  c = SolverConfig{};
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), UsageError);
}
