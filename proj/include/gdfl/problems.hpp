#pragma once

// Benchmark objectives with analytic gradients and the mixed-integer
// transformation: of N variables y, the last m are integer-constrained.
// Every formula below is written on y in R^N; the solver sees x = y[0..n)
// and z = y[n..N). Integer bounds are [ceil l, floor u] of the source bounds.

#include "gdfl/core.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

namespace gdfl {

struct ProblemSpec {
  std::string name;
  Eigen::Index N = 0;
  Eigen::Index m = 0;
};

namespace detail {

using FullObjective = std::function<double(const Vector&)>;
using FullGradient = std::function<Vector(const Vector&)>;

inline Vector join(const Vector& x, const IntVector& z) {
  Vector y(x.size() + z.size());
  y.head(x.size()) = x;
  y.tail(z.size()) = z.cast<double>();
  return y;
}

inline Problem mixed_from_full(const std::string& name, Eigen::Index N, Eigen::Index m, double lo, double hi,
                               FullObjective f, FullGradient g) {
  const Eigen::Index n = N - m;
  const auto lz = static_cast<std::int64_t>(std::ceil(lo));
  const auto uz = static_cast<std::int64_t>(std::floor(hi));
  Box box(Vector::Constant(n, lo), Vector::Constant(n, hi), IntVector::Constant(m, lz), IntVector::Constant(m, uz));
  return Problem(
      name, std::move(box), [f](const Vector& x, const IntVector& z) { return f(join(x, z)); },
      [g, n](const Vector& x, const IntVector& z) -> Vector { return g(join(x, z)).head(n); });
}

}  // namespace detail

/// Builds an instance for (N, m). Throws UsageError on unsupported sizes.
using ProblemFactory = std::function<Problem(Eigen::Index N, Eigen::Index m)>;

/// Named problem factories. Plugins call add() at startup; the registry is
/// not synchronized, so registration must finish before concurrent use.
class ProblemRegistry {
 public:
  void add(const std::string& name, ProblemFactory factory, Eigen::Index min_N = 1) {
    if (name.empty()) throw UsageError("ProblemRegistry: empty name");
    if (!factory) throw UsageError("ProblemRegistry: null factory for '" + name + "'");
    entries_[name] = Entry{std::move(factory), min_N};
  }

  bool contains(const std::string& name) const { return entries_.count(name) > 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) out.push_back(k);
    return out;
  }

  Problem make(const ProblemSpec& spec) const {
    auto it = entries_.find(spec.name);
    if (it == entries_.end()) throw UsageError("unknown problem '" + spec.name + "'");
    if (spec.m < 1 || spec.m > spec.N)
      throw UsageError("problem '" + spec.name + "': need 1 <= m <= N, got N=" + std::to_string(spec.N) +
                       " m=" + std::to_string(spec.m));
    if (spec.N < it->second.min_N)
      throw UsageError("problem '" + spec.name + "' needs N >= " + std::to_string(it->second.min_N));
    return it->second.factory(spec.N, spec.m);
  }

 private:
  struct Entry {
    ProblemFactory factory;
    Eigen::Index min_N = 1;
  };
  std::map<std::string, Entry> entries_;
};

namespace problems {

inline constexpr double tp = 2.0 * std::numbers::pi;

/// Rastrigin: 10N + sum(y_i^2 - 10 cos(2 pi y_i)), y in [-5.12, 5.12].
/// Source: Rastrigin (1974), standard form. Global minimum 0 at y = 0.
inline Problem rastrigin(Eigen::Index N, Eigen::Index m) {
  auto f = [N](const Vector& y) {
    return 10.0 * static_cast<double>(N) + (y.array().square() - 10.0 * (tp * y.array()).cos()).sum();
  };
  auto g = [](const Vector& y) -> Vector { return 2.0 * y.array() + 10.0 * tp * (tp * y.array()).sin(); };
  return detail::mixed_from_full("rastrigin", N, m, -5.12, 5.12, f, g).set_known_minimum(0.0);
}

/// Ackley: -20 exp(-0.2 sqrt(mean y_i^2)) - exp(mean cos(2 pi y_i)) + 20 + e,
/// y in [-32.768, 32.768]. Source: Ackley (1987), constants a=20, b=0.2,
/// c=2pi. Global minimum 0 at y = 0, where the gradient is taken as 0.
inline Problem ackley(Eigen::Index N, Eigen::Index m) {
  const double dN = static_cast<double>(N);
  auto f = [dN](const Vector& y) {
    const double r = std::sqrt(y.squaredNorm() / dN);
    const double c = (tp * y.array()).cos().sum() / dN;
    return -20.0 * std::exp(-0.2 * r) - std::exp(c) + 20.0 + std::numbers::e;
  };
  auto g = [dN](const Vector& y) -> Vector {
    const double r = std::sqrt(y.squaredNorm() / dN);
    const double ec = std::exp((tp * y.array()).cos().sum() / dN);
    Vector out = (tp * ec / dN) * (tp * y.array()).sin();
    if (r > 0.0) out += (4.0 * std::exp(-0.2 * r) / (dN * r)) * y;
    return out;
  };
  return detail::mixed_from_full("ackley", N, m, -32.768, 32.768, f, g).set_known_minimum(0.0);
}

/// Dixon-Price: (y_1 - 1)^2 + sum_{i>=2} i (2 y_i^2 - y_{i-1})^2, y in [-10, 10].
/// Source: Dixon & Price (1989). Continuous minimum 0 is not integer-feasible.
inline Problem dixon_price(Eigen::Index N, Eigen::Index m) {
  auto f = [N](const Vector& y) {
    double s = (y[0] - 1.0) * (y[0] - 1.0);
    for (Eigen::Index i = 1; i < N; ++i) {
      const double t = 2.0 * y[i] * y[i] - y[i - 1];
      s += static_cast<double>(i + 1) * t * t;
    }
    return s;
  };
  auto g = [N](const Vector& y) -> Vector {
    Vector out = Vector::Zero(N);
    out[0] = 2.0 * (y[0] - 1.0);
    for (Eigen::Index i = 1; i < N; ++i) {
      const double t = 2.0 * y[i] * y[i] - y[i - 1];
      const double w = 2.0 * static_cast<double>(i + 1) * t;
      out[i] += w * 4.0 * y[i];
      out[i - 1] -= w;
    }
    return out;
  };
  return detail::mixed_from_full("dixon-price", N, m, -10.0, 10.0, f, g);
}

/// MCCORMCK (CUTEst): sum_{i<N} (-1.5 y_i + 2.5 y_{i+1} + 1 + (y_i - y_{i+1})^2
/// + sin(y_i + y_{i+1})), y in [-1.5, 3]. Needs N >= 2.
inline Problem mccormck(Eigen::Index N, Eigen::Index m) {
  auto f = [N](const Vector& y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + 1 < N; ++i) {
      const double d = y[i] - y[i + 1];
      s += -1.5 * y[i] + 2.5 * y[i + 1] + 1.0 + d * d + std::sin(y[i] + y[i + 1]);
    }
    return s;
  };
  auto g = [N](const Vector& y) -> Vector {
    Vector out = Vector::Zero(N);
    for (Eigen::Index i = 0; i + 1 < N; ++i) {
      const double d = y[i] - y[i + 1];
      const double c = std::cos(y[i] + y[i + 1]);
      out[i] += -1.5 + 2.0 * d + c;
      out[i + 1] += 2.5 - 2.0 * d + c;
    }
    return out;
  };
  return detail::mixed_from_full("mccormck", N, m, -1.5, 3.0, f, g);
}

/// NONSCOMP (CUTEst): (y_1 - 1)^2 + sum_{i>=2} 4 (y_i - y_{i-1}^2)^2,
/// y in [-100, 100]. Global minimum 0 at y = 1 (integer-feasible).
inline Problem nonscomp(Eigen::Index N, Eigen::Index m) {
  auto f = [N](const Vector& y) {
    double s = (y[0] - 1.0) * (y[0] - 1.0);
    for (Eigen::Index i = 1; i < N; ++i) {
      const double t = y[i] - y[i - 1] * y[i - 1];
      s += 4.0 * t * t;
    }
    return s;
  };
  auto g = [N](const Vector& y) -> Vector {
    Vector out = Vector::Zero(N);
    out[0] = 2.0 * (y[0] - 1.0);
    for (Eigen::Index i = 1; i < N; ++i) {
      const double t = y[i] - y[i - 1] * y[i - 1];
      out[i] += 8.0 * t;
      out[i - 1] -= 16.0 * t * y[i - 1];
    }
    return out;
  };
  return detail::mixed_from_full("nonscomp", N, m, -100.0, 100.0, f, g).set_known_minimum(0.0);
}

namespace detail_bqp {

// Term i (1-based) couples y_i, y_{mod(2i-1,N)+1}, y_{mod(3i-1,N)+1}; its sign
// is +1 for i <= nplus and -1 after.
inline Problem bqp(const std::string& name, Eigen::Index N, Eigen::Index m, Eigen::Index nplus) {
  auto idx = [N](Eigen::Index i1) {
    return std::array<Eigen::Index, 3>{i1 - 1, (2 * i1 - 1) % N, (3 * i1 - 1) % N};
  };
  auto f = [N, nplus, idx](const Vector& y) {
    double s = 0.0;
    for (Eigen::Index i1 = 1; i1 <= N; ++i1) {
      const auto k = idx(i1);
      const double t = y[k[0]] + y[k[1]] + y[k[2]];
      const double sign = i1 <= nplus ? 1.0 : -1.0;
      s += sign * 0.5 * static_cast<double>(i1) * t * t;
    }
    return s;
  };
  auto g = [N, nplus, idx](const Vector& y) -> Vector {
    Vector out = Vector::Zero(N);
    for (Eigen::Index i1 = 1; i1 <= N; ++i1) {
      const auto k = idx(i1);
      const double t = y[k[0]] + y[k[1]] + y[k[2]];
      const double w = (i1 <= nplus ? 1.0 : -1.0) * static_cast<double>(i1) * t;
      for (auto j : k) out[j] += w;
    }
    return out;
  };
  return gdfl::detail::mixed_from_full(name, N, m, 0.1, 10.0, f, g);
}

}  // namespace detail_bqp

/// CVXBQP1 (CUTEst): sum_i 0.5 i (y_i + y_{mod(2i-1,N)+1} + y_{mod(3i-1,N)+1})^2,
/// y in [0.1, 10]. Convex.
inline Problem cvxbqp1(Eigen::Index N, Eigen::Index m) { return detail_bqp::bqp("cvxbqp1", N, m, N); }

/// NCVXBQP1 (CUTEst): as CVXBQP1 with the terms i > N/2 negated.
inline Problem ncvxbqp1(Eigen::Index N, Eigen::Index m) { return detail_bqp::bqp("ncvxbqp1", N, m, N / 2); }

/// EXPLIN (CUTEst): sum_{i<=M} exp(0.1 y_i y_{i+1}) - 10 sum_i i y_i,
/// y in [0, 10], with M = max(1, floor(N/12)) (CUTEst ships N=120, M=10).
/// Needs N >= 2.
inline Problem explin(Eigen::Index N, Eigen::Index m) {
  const Eigen::Index M = std::max<Eigen::Index>(1, N / 12);
  auto f = [N, M](const Vector& y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < M; ++i) s += std::exp(0.1 * y[i] * y[i + 1]);
    for (Eigen::Index i = 0; i < N; ++i) s -= 10.0 * static_cast<double>(i + 1) * y[i];
    return s;
  };
  auto g = [N, M](const Vector& y) -> Vector {
    Vector out(N);
    for (Eigen::Index i = 0; i < N; ++i) out[i] = -10.0 * static_cast<double>(i + 1);
    for (Eigen::Index i = 0; i < M; ++i) {
      const double e = std::exp(0.1 * y[i] * y[i + 1]);
      out[i] += 0.1 * y[i + 1] * e;
      out[i + 1] += 0.1 * y[i] * e;
    }
    return out;
  };
  return detail::mixed_from_full("explin", N, m, 0.0, 10.0, f, g);
}

/// EXPLIN2 (CUTEst): sum_{i<=M} exp(0.1 i y_i y_{i+1} / M) - 10 sum_i i y_i,
/// y in [0, 10], M as in EXPLIN. Needs N >= 2.
inline Problem explin2(Eigen::Index N, Eigen::Index m) {
  const Eigen::Index M = std::max<Eigen::Index>(1, N / 12);
  const double dM = static_cast<double>(M);
  auto f = [N, M, dM](const Vector& y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < M; ++i) s += std::exp(0.1 * static_cast<double>(i + 1) * y[i] * y[i + 1] / dM);
    for (Eigen::Index i = 0; i < N; ++i) s -= 10.0 * static_cast<double>(i + 1) * y[i];
    return s;
  };
  auto g = [N, M, dM](const Vector& y) -> Vector {
    Vector out(N);
    for (Eigen::Index i = 0; i < N; ++i) out[i] = -10.0 * static_cast<double>(i + 1);
    for (Eigen::Index i = 0; i < M; ++i) {
      const double c = 0.1 * static_cast<double>(i + 1) / dM;
      const double e = std::exp(c * y[i] * y[i + 1]);
      out[i] += c * y[i + 1] * e;
      out[i + 1] += c * y[i] * e;
    }
    return out;
  };
  return detail::mixed_from_full("explin2", N, m, 0.0, 10.0, f, g);
}

/// BDEXP (CUTEst): sum_{i<=N-2} (y_i + y_{i+1}) exp(-y_{i+2} (y_i + y_{i+1})),
/// y >= 0; the upper bound 10 is imposed here so the box is finite.
/// Needs N >= 3.
inline Problem bdexp(Eigen::Index N, Eigen::Index m) {
  auto f = [N](const Vector& y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + 2 < N; ++i) {
      const double a = y[i] + y[i + 1];
      s += a * std::exp(-y[i + 2] * a);
    }
    return s;
  };
  auto g = [N](const Vector& y) -> Vector {
    Vector out = Vector::Zero(N);
    for (Eigen::Index i = 0; i + 2 < N; ++i) {
      const double a = y[i] + y[i + 1];
      const double e = std::exp(-y[i + 2] * a);
      const double da = e * (1.0 - y[i + 2] * a);
      out[i] += da;
      out[i + 1] += da;
      out[i + 2] -= a * a * e;
    }
    return out;
  };
  return detail::mixed_from_full("bdexp", N, m, 0.0, 10.0, f, g);
}

}  // namespace problems

inline void register_builtin_problems(ProblemRegistry& reg) {
  reg.add("rastrigin", problems::rastrigin);
  reg.add("ackley", problems::ackley);
  reg.add("dixon-price", problems::dixon_price);
  reg.add("mccormck", problems::mccormck, 2);
  reg.add("nonscomp", problems::nonscomp);
  reg.add("cvxbqp1", problems::cvxbqp1);
  reg.add("ncvxbqp1", problems::ncvxbqp1);
  reg.add("explin", problems::explin, 2);
  reg.add("explin2", problems::explin2, 2);
  reg.add("bdexp", problems::bdexp, 3);
}

/// Process-wide registry holding the built-in problems.
inline ProblemRegistry& default_registry() {
  static ProblemRegistry reg = [] {
    ProblemRegistry r;
    register_builtin_problems(r);
    return r;
  }();
  return reg;
}

inline Problem make_problem(const ProblemSpec& spec) { return default_registry().make(spec); }

/// The 19 benchmark names of the reference experiment.
inline const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = {
      "rastrigin", "ackley",   "dixon-price", "expquad",  "mccormck", "qudlin",   "probpenl",
      "sineali",   "nonscomp", "explin",      "explin2",  "biggsb1",  "bdexp",    "cvxbqp1",
      "ncvxbqp1",  "ncvxbqp2", "ncvxbqp3",    "chenhark", "pentdi"};
  return names;
}

struct GridConfig {
  Eigen::Index N = 0;
  Eigen::Index m = 0;
  bool two_percent = false;  // m = N / 50
};

/// The 16 (N, m) configurations.
inline const std::vector<GridConfig>& table1_configurations() {
  static const std::vector<GridConfig> cfgs = [] {
    std::vector<GridConfig> out;
    auto row = [&](Eigen::Index N, std::initializer_list<Eigen::Index> ms) {
      for (auto m : ms) out.push_back({N, m, m * 50 == N});
    };
    row(100, {2, 5, 7, 10, 20, 40});
    row(200, {4});
    row(500, {10});
    row(1000, {2, 5, 10, 20, 50, 100});
    row(2000, {40});
    row(5000, {100});
    return out;
  }();
  return cfgs;
}

struct Grid {
  std::vector<ProblemSpec> specs;
  std::vector<std::string> missing;  // benchmark names absent from the registry
};

/// Benchmark names x configurations, restricted to registered problems.
inline Grid config_grid(const ProblemRegistry& reg = default_registry()) {
  Grid g;
  for (const auto& name : benchmark_names()) {
    if (!reg.contains(name)) {
      g.missing.push_back(name);
      continue;
    }
    for (const auto& c : table1_configurations()) g.specs.push_back({name, c.N, c.m});
  }
  return g;
}

}  // namespace gdfl
