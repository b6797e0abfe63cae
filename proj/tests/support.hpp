#pragma once

// Shared helpers for the test binaries: seeded generators, small analytic
// problems and an independent discrete-search reference.

#include "gdfl/gdfl.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace testsupport {

using gdfl::Box;
using gdfl::IntVector;
using gdfl::MixedPoint;
using gdfl::Problem;
using gdfl::Vector;

struct Gen {
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  std::int64_t integer(std::int64_t a, std::int64_t b) { return std::uniform_int_distribution<std::int64_t>(a, b)(rng); }

  Vector vec(Eigen::Index n, double a, double b) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
  }

  IntVector ivec(Eigen::Index m, std::int64_t a, std::int64_t b) {
    IntVector v(m);
    for (Eigen::Index i = 0; i < m; ++i) v[i] = integer(a, b);
    return v;
  }

  Vector in_box_x(const Box& box) {
    Vector v(box.n());
    for (Eigen::Index i = 0; i < box.n(); ++i) v[i] = uniform(box.lx()[i], box.ux()[i]);
    return v;
  }

  IntVector in_box_z(const Box& box) {
    IntVector v(box.m());
    for (Eigen::Index i = 0; i < box.m(); ++i) v[i] = integer(box.lz()[i], box.uz()[i]);
    return v;
  }

  std::mt19937_64 rng;
};

inline Box uniform_box(Eigen::Index n, double lx, double ux, Eigen::Index m, std::int64_t lz, std::int64_t uz) {
  return Box(Vector::Constant(n, lx), Vector::Constant(n, ux), IntVector::Constant(m, lz), IntVector::Constant(m, uz));
}

/// f = sum_i a_i (x_i - cx_i)^2 + sum_j b_j (z_j - cz_j)^2.
inline Problem separable_quadratic(const Box& box, Vector a, Vector cx, Vector b, Vector cz,
                                   const std::string& name = "sepquad") {
  auto f = [a, cx, b, cz](const Vector& x, const IntVector& z) {
    const Vector dz = z.cast<double>() - cz;
    return (a.array() * (x - cx).array().square()).sum() + (b.array() * dz.array().square()).sum();
  };
  auto g = [a, cx](const Vector& x, const IntVector&) -> Vector { return 2.0 * a.array() * (x - cx).array(); };
  return Problem(name, box, f, g);
}

/// Records every oracle call so tests can check feasibility and integrality.
struct CallLog {
  std::vector<MixedPoint> f_calls;
  std::vector<MixedPoint> g_calls;
};

inline Problem logged(const Problem& base, std::shared_ptr<CallLog> log) {
  auto f = [base, log](const Vector& x, const IntVector& z) {
    log->f_calls.push_back({x, z});
    return base.objective(x, z);
  };
  auto g = [base, log](const Vector& x, const IntVector& z) {
    log->g_calls.push_back({x, z});
    return base.gradient(x, z);
  };
  Problem p(base.name(), base.box(), f, g);
  if (base.known_minimum()) p.set_known_minimum(*base.known_minimum());
  return p;
}

/// Written directly from the pseudo-code of the discrete search, with plain
/// std::vector state. One call; directions with no feasible step are skipped
/// and excluded from the "all memories equal one" test.
struct RefDsResult {
  std::vector<std::int64_t> z;
  std::vector<std::int64_t> memories;
  double xi = 0.0;
  bool improved = false;
  bool xi_reduced = false;
};

template <class F>
RefDsResult reference_discrete_search(const F& f_of_z, std::vector<std::int64_t> z,
                                      const std::vector<std::vector<std::int64_t>>& dirs,
                                      std::vector<std::int64_t> memories, double xi, double eta,
                                      const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi) {
  const std::size_t m = z.size();
  const double f0 = f_of_z(z);
  auto feasible = [&](const std::vector<std::int64_t>& w) {
    for (std::size_t i = 0; i < m; ++i)
      if (w[i] < lo[i] || w[i] > hi[i]) return false;
    return true;
  };
  auto step = [&](const std::vector<std::int64_t>& d, std::int64_t a) {
    std::vector<std::int64_t> w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = z[i] + a * d[i];
    return w;
  };
  RefDsResult r;
  bool any_probed_above_one = false;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    // Largest feasible stepsize, by linear scan.
    std::int64_t amax = 0;
    while (feasible(step(dirs[k], amax + 1))) ++amax;
    if (amax == 0) continue;
    const std::int64_t a_ini = std::min(memories[k], amax);
    if (f_of_z(step(dirs[k], a_ini)) <= f0 - xi) {
      std::int64_t a = a_ini;
      for (std::int64_t h = 1;; ++h) {
        const std::int64_t cand = a_ini << h;
        if (!feasible(step(dirs[k], cand)) || !(f_of_z(step(dirs[k], cand)) <= f0 - xi)) break;
        a = cand;
      }
      memories[k] = a;
      r.z = step(dirs[k], a);
      r.memories = memories;
      r.xi = xi;
      r.improved = true;
      return r;
    }
    memories[k] = std::max<std::int64_t>(1, memories[k] / 2);
    if (memories[k] != 1) any_probed_above_one = true;
  }
  r.z = z;
  r.memories = memories;
  r.xi = xi;
  if (!any_probed_above_one) {
    r.xi = eta * xi;
    r.xi_reduced = true;
  }
  return r;
}

}  // namespace testsupport
