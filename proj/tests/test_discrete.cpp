#include "support.hpp"

#include <gtest/gtest.h>

using namespace gdfl;
using testsupport::Gen;
using testsupport::uniform_box;

namespace {

// f = sum (z - c)^2 with no continuous variables of interest (n = 1, inert).
Problem zquad(Eigen::Index m, std::int64_t lo, std::int64_t hi, const Vector& c) {
  return testsupport::separable_quadratic(uniform_box(1, 0, 0, m, lo, hi), Vector::Zero(1), Vector::Zero(1),
                                          Vector::Ones(m), c);
}

MixedPoint at(std::initializer_list<std::int64_t> z) {
  IntVector v(static_cast<Eigen::Index>(z.size()));
  Eigen::Index i = 0;
  for (auto e : z) v[i++] = e;
  return {Vector::Zero(1), v};
}

}  // namespace

TEST(MaxFeasibleStep, Values) {
  const Box box = uniform_box(0, 0, 0, 2, -3, 3);
  IntVector z(2), d(2);
  z << 0, 1;
  d << 1, 1;
  EXPECT_EQ(max_feasible_step(z, d, box), 2);
  d << -1, 2;
  EXPECT_EQ(max_feasible_step(z, d, box), 1);
  z << 3, 0;
  d << 1, 0;
  EXPECT_EQ(max_feasible_step(z, d, box), 0);
}

TEST(DiscreteSearch, ExpansionExample) {
  // f = z^2, z = 2, z in [-5, 5], d = -1 first, memory 1, xi = 0.5.
  const Problem p = zquad(1, -5, 5, Vector::Zero(1));
  Evaluator ev(p);
  PrimitiveSet dirs(1, 0.5, 300, 0);
  dirs.insert(IntVector::Constant(1, -1));
  dirs.insert(IntVector::Constant(1, 1));
  const auto out = discrete_search(ev, at({2}), 4.0, dirs, 0.5);
  EXPECT_TRUE(out.improved);
  EXPECT_EQ(out.point.z[0], 0);
  EXPECT_EQ(out.f, 0.0);
  EXPECT_EQ(dirs.alpha(0), 2);
  EXPECT_EQ(dirs.alpha(1), 1);
  EXPECT_EQ(dirs.xi(), 0.5);
  EXPECT_FALSE(out.xi_reduced);
}

TEST(DiscreteSearch, FailureAtMinimizerReducesXiWithoutGrowth) {
  const Problem p = zquad(1, -5, 5, Vector::Zero(1));
  Evaluator ev(p);
  PrimitiveSet dirs = initial_direction_set(1, 300, 0.5);
  const auto out = discrete_search(ev, at({0}), 0.0, dirs, 0.5);
  EXPECT_FALSE(out.improved);
  EXPECT_TRUE(out.xi_reduced);
  EXPECT_TRUE(out.saturated);
  EXPECT_EQ(out.added, 0u);
  EXPECT_EQ(dirs.size(), 2u);
  EXPECT_EQ(dirs.xi(), 0.25);
  EXPECT_EQ(out.point, at({0}));
}

TEST(DiscreteSearch, InfeasibleDirectionSkippedWithMemoryKept) {
  const Problem p = zquad(1, -5, 5, Vector::Constant(1, 5.0));
  Evaluator ev(p);
  PrimitiveSet dirs = initial_direction_set(1, 300, 0.5);
  dirs.set_alpha(0, 4);  // +1, infeasible at the upper bound
  const auto out = discrete_search(ev, at({5}), 0.0, dirs, 0.5);
  EXPECT_FALSE(out.improved);
  EXPECT_EQ(dirs.alpha(0), 4);
  EXPECT_EQ(out.probed, 1u);
  EXPECT_TRUE(out.xi_reduced);
}

TEST(DiscreteSearch, HalvingBeforeXiReduction) {
  const Problem p = zquad(2, -10, 10, Vector::Zero(2));
  Evaluator ev(p);
  PrimitiveSet dirs = initial_direction_set(2, 300, 1.0);
  for (std::size_t i = 0; i < dirs.size(); ++i) dirs.set_alpha(i, 4);
  auto out = discrete_search(ev, at({0, 0}), 0.0, dirs, 0.5);
  EXPECT_FALSE(out.xi_reduced);
  for (auto a : dirs.alphas()) EXPECT_EQ(a, 2);
  out = discrete_search(ev, at({0, 0}), 0.0, dirs, 0.5);
  EXPECT_TRUE(out.xi_reduced);
  EXPECT_EQ(dirs.xi(), 0.5);
  // Enrichment adds feasible primitive directions and resets all memories.
  EXPECT_EQ(out.added, kEnrichmentBatch);
  EXPECT_EQ(dirs.size(), 4 + kEnrichmentBatch);
  for (auto a : dirs.alphas()) EXPECT_EQ(a, 1);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    EXPECT_TRUE(is_feasible_direction(dirs.direction(i), IntVector::Zero(2), p.box()));
  }
}

TEST(DiscreteSearch, EnrichmentStopsAtCap) {
  const Problem p = zquad(2, -10, 10, Vector::Zero(2));
  Evaluator ev(p);
  PrimitiveSet dirs = initial_direction_set(2, 5, 1.0);
  auto out = discrete_search(ev, at({0, 0}), 0.0, dirs, 0.5);
  EXPECT_EQ(out.added, 1u);
  EXPECT_TRUE(dirs.full());
  out = discrete_search(ev, at({0, 0}), 0.0, dirs, 0.5);
  EXPECT_TRUE(out.saturated);
}

TEST(DiscreteSearch, SmallBoxSaturatesOnceAllFeasibleDirectionsAreKnown) {
  // z in {0, 1}^2 at the origin: the only feasible primitive directions are
  // (1, 0), (0, 1) and (1, 1).
  const Problem p = zquad(2, 0, 1, Vector::Zero(2));
  Evaluator ev(p);
  PrimitiveSet dirs = initial_direction_set(2, 300, 1.0);
  bool saturated = false;
  for (int k = 0; k < 10 && !saturated; ++k) saturated = discrete_search(ev, at({0, 0}), 0.0, dirs, 0.5).saturated;
  EXPECT_TRUE(saturated);
  EXPECT_TRUE(dirs.contains((IntVector(2) << 1, 1).finished()));
}

TEST(DiscreteSearch, PropertiesOnRandomInstances) {
  Gen gen(5);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index m = gen.integer(1, 4);
    const Vector c = gen.vec(m, -6, 6);
    auto log = std::make_shared<testsupport::CallLog>();
    const Problem p = testsupport::logged(zquad(m, -4, 4, c), log);
    Evaluator ev(p);
    PrimitiveSet dirs = initial_direction_set(static_cast<std::size_t>(m), 300, gen.uniform(0.01, 3.0),
                                              static_cast<std::uint64_t>(t));
    MixedPoint cur{Vector::Zero(1), gen.in_box_z(p.box())};
    double f = ev.f(cur);
    for (int k = 0; k < 25; ++k) {
      const double xi_in = dirs.xi();
      const auto out = discrete_search(ev, cur, f, dirs, 0.5);
      if (out.improved) {
        EXPECT_LE(out.f, f - xi_in);
        EXPECT_EQ(dirs.xi(), xi_in);
      } else {
        EXPECT_EQ(out.point, cur);
        EXPECT_EQ(out.xi_reduced, dirs.xi() < xi_in);
      }
      EXPECT_LE(dirs.xi(), xi_in);
      for (auto a : dirs.alphas()) EXPECT_GE(a, 1);
      cur = out.point;
      f = out.f;
    }
    for (const auto& q : log->f_calls) EXPECT_TRUE(p.box().contains_z(q.z));
  }
}

TEST(DiscreteSearch, AgreesWithReferenceOnRandomSweeps) {
  Gen gen(17);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index m = gen.integer(1, 3);
    const Vector c = gen.vec(m, -5, 5);
    const Problem p = zquad(m, -3, 3, c);
    Evaluator ev(p);
    PrimitiveSet dirs = initial_direction_set(static_cast<std::size_t>(m), 300, gen.uniform(0.05, 2.0),
                                              static_cast<std::uint64_t>(t));
    MixedPoint cur{Vector::Zero(1), gen.in_box_z(p.box())};
    double f = ev.f(cur);
    auto fz = [&](const std::vector<std::int64_t>& z) {
      return p.objective(Vector::Zero(1), Eigen::Map<const IntVector>(z.data(), static_cast<Eigen::Index>(z.size())));
    };
    std::vector<std::int64_t> lo(static_cast<std::size_t>(m), -3), hi(static_cast<std::size_t>(m), 3);
    for (int k = 0; k < 20; ++k) {
      std::vector<std::vector<std::int64_t>> rd;
      for (const auto& d : dirs.directions()) rd.emplace_back(d.data(), d.data() + d.size());
      const auto ref = testsupport::reference_discrete_search(
          fz, std::vector<std::int64_t>(cur.z.data(), cur.z.data() + m), rd, dirs.alphas(), dirs.xi(), 0.5, lo, hi);
      const std::size_t before = dirs.size();
      const auto out = discrete_search(ev, cur, f, dirs, 0.5);
      ASSERT_EQ(std::vector<std::int64_t>(out.point.z.data(), out.point.z.data() + m), ref.z);
      ASSERT_EQ(out.improved, ref.improved);
      ASSERT_EQ(dirs.xi(), ref.xi);
      if (dirs.size() > before) {
        for (auto a : dirs.alphas()) ASSERT_EQ(a, 1);
      } else {
        ASSERT_EQ(dirs.alphas(), ref.memories);
      }
      cur = out.point;
      f = out.f;
    }
  }
}
