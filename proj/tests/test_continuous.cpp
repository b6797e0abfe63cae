#include "support.hpp"

#include <gtest/gtest.h>

using namespace gdfl;
using testsupport::Gen;
using testsupport::uniform_box;

namespace {

Problem quad1d(double lo, double hi) {
  return testsupport::separable_quadratic(uniform_box(1, lo, hi, 1, 0, 0), Vector::Ones(1), Vector::Zero(1),
                                          Vector::Ones(1), Vector::Zero(1));
}

// Random convex quadratic 0.5 x^T A x + b^T x on [-1, 1]^n (z is inert).
Problem random_convex_quadratic(Gen& gen, Eigen::Index n, Eigen::MatrixXd* A_out = nullptr) {
  Eigen::MatrixXd R(n, n);
  for (Eigen::Index i = 0; i < n; ++i) R.col(i) = gen.vec(n, -1, 1);
  Eigen::MatrixXd A = R.transpose() * R + 0.1 * Eigen::MatrixXd::Identity(n, n);
  Vector b = gen.vec(n, -3, 3);
  if (A_out) *A_out = A;
  return Problem(
      "cq", uniform_box(n, -1, 1, 1, 0, 0),
      [A, b](const Vector& x, const IntVector&) { return 0.5 * x.dot(A * x) + b.dot(x); },
      [A, b](const Vector& x, const IntVector&) -> Vector { return A * x + b; });
}

}  // namespace

TEST(Armijo, AcceptsFullStepOnQuadratic) {
  const Problem p = quad1d(-10, 10);
  Evaluator ev(p);
  const MixedPoint x0{Vector::Constant(1, 2.0), IntVector::Zero(1)};
  const Vector g = ev.grad(x0);
  const Vector v = Vector::Constant(1, -2.0);  // exact minimizer step
  const auto r = armijo_backtrack(ev, x0, 4.0, g, v, 1e-4, 0.5);
  ASSERT_TRUE(r.success);
  EXPECT_EQ(r.alpha, 1.0);
  EXPECT_EQ(r.f_new, 0.0);
}

TEST(Armijo, BacktracksAndFails) {
  const Problem p = quad1d(-1000, 1000);
  Evaluator ev(p);
  const MixedPoint x0{Vector::Constant(1, 1.0), IntVector::Zero(1)};
  const Vector g = ev.grad(x0);
  const Vector v = Vector::Constant(1, -100.0);
  const auto r = armijo_backtrack(ev, x0, 1.0, g, v, 1e-4, 0.5);
  ASSERT_TRUE(r.success);
  // f(1 - 100 a) <= 1 - 0.02 a first holds at a = 2^-6.
  EXPECT_EQ(r.alpha, 1.0 / 64.0);
  const auto fail = armijo_backtrack(ev, x0, 1.0, g, v, 1e-4, 0.5, 1.0, 0);
  EXPECT_FALSE(fail.success);
  EXPECT_EQ(fail.alpha, 0.0);
  EXPECT_EQ(fail.x_new, x0.x);
  EXPECT_THROW(armijo_backtrack(ev, x0, 1.0, g, Vector::Constant(1, 1.0), 1e-4, 0.5), UsageError);
}

TEST(DfLineSearch, ExpandsOnLinearDecrease) {
  // f = -x on [0, 100]: from 0 along +1 with alpha 1, expansion doubles while
  // -a <= -gamma a^2, i.e. a <= 1/gamma; with gamma = 0.01 the last passing
  // power of two is 64.
  Problem p(
      "lin", uniform_box(1, 0, 100, 1, 0, 0), [](const Vector& x, const IntVector&) { return -x[0]; },
      [](const Vector& x, const IntVector&) { return Vector::Constant(x.size(), -1.0); });
  Evaluator ev(p);
  const MixedPoint x0{Vector::Zero(1), IntVector::Zero(1)};
  const auto r = df_linesearch_continuous(ev, x0, 0.0, Vector::Ones(1), 1.0, 0.01, 0.5, 0.5);
  ASSERT_TRUE(r.success);
  EXPECT_EQ(r.alpha, 64.0);
  EXPECT_EQ(r.x_new[0], 64.0);
}

TEST(DfLineSearch, TriesNegativeDirectionThenShrinks) {
  const Problem p = quad1d(-10, 10);
  Evaluator ev(p);
  const MixedPoint x0{Vector::Constant(1, 1.0), IntVector::Zero(1)};
  const auto r = df_linesearch_continuous(ev, x0, 1.0, Vector::Ones(1), 0.5, 1e-4, 0.5, 0.5);
  ASSERT_TRUE(r.success);
  EXPECT_LT(r.x_new[0], 1.0);

  const MixedPoint at_min{Vector::Zero(1), IntVector::Zero(1)};
  const auto f = df_linesearch_continuous(ev, at_min, 0.0, Vector::Ones(1), 0.5, 1e-4, 0.5, 0.5);
  EXPECT_FALSE(f.success);
  EXPECT_EQ(f.alpha, 0.25);
  EXPECT_EQ(f.x_new, at_min.x);
}

TEST(Directions, ProjectedGradientAndFrankWolfe) {
  const Box box = uniform_box(3, 0, 1, 1, 0, 0);
  Vector x(3), g(3);
  x << 0.5, 0.0, 1.0;
  g << 0.2, 1.0, -1.0;
  Vector pg(3);
  pg << -0.2, 0.0, 0.0;
  EXPECT_TRUE(pg_direction(x, g, box).isApprox(pg));
  Vector fw(3);
  fw << -0.5, 0.0, 0.0;
  EXPECT_EQ(fw_direction(x, g, box), fw);
}

TEST(Directions, FeasibleDescentProperty) {
  Gen gen(11);
  for (int t = 0; t < 50; ++t) {
    const Problem p = random_convex_quadratic(gen, 8);
    Evaluator ev(p);
    LbfgsMemory mem(5);
    Vector x = gen.in_box_x(p.box());
    const IntVector z = IntVector::Zero(1);
    Vector g = ev.grad(x, z);
    for (int k = 0; k < 6; ++k) {
      for (Engine e : {Engine::ProjectedGradient, Engine::FrankWolfe, Engine::Lbfgsb}) {
        const Vector v = engine_direction(e, x, g, p.box(), &mem);
        EXPECT_TRUE(p.box().contains_x(x + v)) << "engine " << static_cast<int>(e);
        if (stationarity_residual(x, g, p.box()) > 1e-12) EXPECT_LT(g.dot(v), 0.0);
      }
      const Vector v = lbfgsb_direction(x, g, p.box(), mem);
      if (!(g.dot(v) < 0)) break;
      const auto ls = armijo_backtrack(ev, {x, z}, ev.f(x, z), g, v, 1e-4, 0.5);
      if (!ls.success) break;
      const Vector gn = ev.grad(ls.x_new, z);
      mem.update(ls.x_new - x, gn - g);
      x = ls.x_new;
      g = gn;
    }
  }
}

TEST(Lbfgsb, EmptyMemoryIsScaledProjectedGradient) {
  Gen gen(3);
  for (int t = 0; t < 20; ++t) {
    const Problem p = random_convex_quadratic(gen, 20);
    const Vector x = gen.in_box_x(p.box());
    const Vector g = p.gradient(x, IntVector::Zero(1));
    for (double theta : {1.0, 0.3, 7.0}) {
      LbfgsMemory mem(10, theta);
      const Vector v = lbfgsb_direction(x, g, p.box(), mem);
      const Vector ref = project_box(x - g / theta, p.box()) - x;
      EXPECT_LE((v - ref).norm(), 1e-10 * std::max(1.0, ref.norm()));
    }
  }
}

TEST(Lbfgsb, MemoryRejectsNonPositiveCurvature) {
  LbfgsMemory mem(2);
  EXPECT_FALSE(mem.update(Vector::Ones(2), -Vector::Ones(2)));
  EXPECT_TRUE(mem.update(Vector::Ones(2), 2.0 * Vector::Ones(2)));
  EXPECT_DOUBLE_EQ(mem.theta(), 2.0);
  mem.update(Vector::Ones(2), Vector::Ones(2));
  mem.update(Vector::Ones(2), Vector::Ones(2));
  EXPECT_EQ(mem.size(), 2u);
  mem.clear();
  EXPECT_TRUE(mem.empty());
  EXPECT_EQ(mem.theta(), 1.0);
}

TEST(Lbfgsb, InteriorNewtonStepWithExactCurvature) {
  // On a 2-D quadratic with pairs along both axes the compact matrix equals
  // the Hessian; from the interior the direction is the Newton step.
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.0, 0.0, 5.0;
  const Box box = uniform_box(2, -100, 100, 1, 0, 0);
  LbfgsMemory mem(5);
  mem.update((Vector(2) << 1, 0).finished(), (Vector(2) << 2, 0).finished());
  mem.update((Vector(2) << 0, 1).finished(), (Vector(2) << 0, 5).finished());
  Vector x(2);
  x << 1.0, 1.0;
  const Vector g = A * x;
  const Vector v = lbfgsb_direction(x, g, box, mem);
  EXPECT_TRUE(v.isApprox(-x, 1e-10)) << v.transpose();
}

TEST(LocalSearch, ReachesStationarityOnSeparableQuadratic) {
  Vector a(4), c(4);
  a << 1, 2, 3, 4;
  c << 0.5, -0.5, 2.0, 0.1;  // c[2] outside [-1, 1]
  const Problem p =
      testsupport::separable_quadratic(uniform_box(4, -1, 1, 1, 0, 0), a, c, Vector::Ones(1), Vector::Zero(1));
  Evaluator ev(p);
  SolverConfig cfg;
  const IntVector z = IntVector::Zero(1);
  const Vector x0 = Vector::Constant(4, -0.9);
  for (Engine e : {Engine::Lbfgsb, Engine::ProjectedGradient}) {
    const auto r = continuous_local_search(ev, z, x0, ev.f(x0, z), ev.grad(x0, z), e, 200, cfg);
    EXPECT_TRUE(r.stationary) << static_cast<int>(e);
    EXPECT_NEAR(r.x[2], 1.0, 1e-12);
    EXPECT_NEAR(r.x[0], 0.5, 1e-7);
    for (const auto& s : r.accepted) EXPECT_TRUE(satisfies_armijo(s, cfg.gamma));
  }
  const MixedPoint out = lbfgsb_run(ev, {x0, z}, 50, 1e-9);
  EXPECT_LE(stationarity_residual(out.x, ev.grad(out), p.box()), 1e-9);
}
