#pragma once

// Domain types shared by every solver: the bound box, mixed points, the
// problem oracle pair with evaluation accounting, box projection and the
// continuous stationarity measure.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

namespace gdfl {

using Vector = Eigen::VectorXd;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Raised on contract violations by the caller (bad dimensions, bad ranges,
/// unknown names). The CLI maps it to exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an objective or gradient oracle returns a non-finite value.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_point(const Vector& x, const IntVector& z) {
  std::ostringstream os;
  os.precision(17);
  os << "x=[";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << "] z=[";
  for (Eigen::Index i = 0; i < z.size(); ++i) os << (i ? "," : "") << z[i];
  os << "]";
  return os.str();
}

struct MixedPoint {
  Vector x;
  IntVector z;

  Eigen::Index n() const { return x.size(); }
  Eigen::Index m() const { return z.size(); }

  friend bool operator==(const MixedPoint& a, const MixedPoint& b) {
    return a.x.size() == b.x.size() && a.z.size() == b.z.size() && a.x == b.x && a.z == b.z;
  }
};

/// Bounds l_x <= x <= u_x (real) and l_z <= z <= u_z (integer).
class Box {
 public:
  Box(Vector lx, Vector ux, IntVector lz, IntVector uz)
      : lx_(std::move(lx)), ux_(std::move(ux)), lz_(std::move(lz)), uz_(std::move(uz)) {
    if (lx_.size() != ux_.size()) throw UsageError("Box: lx and ux differ in length");
    if (lz_.size() != uz_.size()) throw UsageError("Box: lz and uz differ in length");
    if (lz_.size() < 1) throw UsageError("Box: at least one integer variable is required");
    for (Eigen::Index i = 0; i < lx_.size(); ++i) {
      if (!(lx_[i] <= ux_[i]) || !std::isfinite(lx_[i]) || !std::isfinite(ux_[i]))
        throw UsageError("Box: continuous bounds must be finite with lx <= ux");
    }
    for (Eigen::Index i = 0; i < lz_.size(); ++i) {
      if (lz_[i] > uz_[i]) throw UsageError("Box: integer bounds must satisfy lz <= uz");
    }
  }

  Eigen::Index n() const { return lx_.size(); }
  Eigen::Index m() const { return lz_.size(); }

  const Vector& lx() const { return lx_; }
  const Vector& ux() const { return ux_; }
  const IntVector& lz() const { return lz_; }
  const IntVector& uz() const { return uz_; }

  bool contains_x(const Vector& x) const {
    if (x.size() != n()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x[i] >= lx_[i] && x[i] <= ux_[i])) return false;
    return true;
  }

  bool contains_z(const IntVector& z) const {
    if (z.size() != m()) return false;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      if (z[i] < lz_[i] || z[i] > uz_[i]) return false;
    return true;
  }

  bool contains(const MixedPoint& p) const { return contains_x(p.x) && contains_z(p.z); }

 private:
  Vector lx_, ux_;
  IntVector lz_, uz_;
};

/// Componentwise clamp of x into [lx, ux].
inline Vector project_box(const Vector& x, const Vector& lx, const Vector& ux) {
  if (x.size() != lx.size() || x.size() != ux.size())
    throw UsageError("project_box: dimension mismatch");
  return x.cwiseMax(lx).cwiseMin(ux);
}

inline Vector project_box(const Vector& x, const Box& box) { return project_box(x, box.lx(), box.ux()); }

/// ||P(x - g) - x||_inf. Zero exactly when x satisfies the box variational
/// inequality g^T (y - x) >= 0 for all feasible y.
inline double stationarity_residual(const Vector& x, const Vector& grad, const Box& box) {
  if (x.size() == 0) return 0.0;
  return (project_box(x - grad, box) - x).lpNorm<Eigen::Infinity>();
}

/// Objective f(x, z) and its continuous gradient, plus the box.
///
/// A Problem is immutable after construction and may be shared between
/// threads; evaluation counting lives in Evaluator.
class Problem {
 public:
  using Objective = std::function<double(const Vector&, const IntVector&)>;
  using Gradient = std::function<Vector(const Vector&, const IntVector&)>;
  using StartRule = std::function<MixedPoint(const Box&, std::uint64_t seed)>;

  Problem(std::string name, Box box, Objective objective, Gradient gradient)
      : name_(std::move(name)), box_(std::move(box)), objective_(std::move(objective)),
        gradient_(std::move(gradient)) {
    if (!objective_) throw UsageError("Problem: objective callback is required");
    if (!gradient_ && box_.n() > 0) throw UsageError("Problem: gradient callback is required when n > 0");
  }

  const std::string& name() const { return name_; }
  const Box& box() const { return box_; }
  Eigen::Index n() const { return box_.n(); }
  Eigen::Index m() const { return box_.m(); }

  double objective(const Vector& x, const IntVector& z) const { return objective_(x, z); }
  Vector gradient(const Vector& x, const IntVector& z) const {
    if (n() == 0) return Vector();
    return gradient_(x, z);
  }

  /// Known global minimum value, if documented for the instance.
  const std::optional<double>& known_minimum() const { return known_minimum_; }
  Problem& set_known_minimum(double v) {
    known_minimum_ = v;
    return *this;
  }

  Problem& set_start_rule(StartRule rule) {
    start_rule_ = std::move(rule);
    return *this;
  }
  MixedPoint starting_point(std::uint64_t seed) const;

 private:
  std::string name_;
  Box box_;
  Objective objective_;
  Gradient gradient_;
  StartRule start_rule_;
  std::optional<double> known_minimum_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t v) {
  v += 0x9e3779b97f4a7c15ULL;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
  return v ^ (v >> 31);
}

// Uniform in [0, 1) from (seed, index).
inline double hash_unit(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(splitmix64(splitmix64(seed) ^ (index * 0x2545f4914f6cdd1dULL)) >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Box midpoint, shifted per coordinate by up to a quarter of the box width
/// using a hash of (seed, coordinate). Integer coordinates are rounded and
/// clamped.
inline MixedPoint midpoint_start(const Box& box, std::uint64_t seed) {
  MixedPoint p{Vector(box.n()), IntVector(box.m())};
  std::uint64_t k = 0;
  for (Eigen::Index i = 0; i < box.n(); ++i, ++k) {
    const double width = box.ux()[i] - box.lx()[i];
    const double mid = 0.5 * (box.lx()[i] + box.ux()[i]);
    const double shift = 0.25 * width * (2.0 * detail::hash_unit(seed, k) - 1.0);
    p.x[i] = std::clamp(mid + shift, box.lx()[i], box.ux()[i]);
  }
  for (Eigen::Index i = 0; i < box.m(); ++i, ++k) {
    const double lo = static_cast<double>(box.lz()[i]);
    const double hi = static_cast<double>(box.uz()[i]);
    const double mid = 0.5 * (lo + hi);
    const double shift = 0.25 * (hi - lo) * (2.0 * detail::hash_unit(seed, k) - 1.0);
    const auto v = static_cast<std::int64_t>(std::llround(mid + shift));
    p.z[i] = std::clamp(v, box.lz()[i], box.uz()[i]);
  }
  return p;
}

inline MixedPoint Problem::starting_point(std::uint64_t seed) const {
  MixedPoint p = start_rule_ ? start_rule_(box_, seed) : midpoint_start(box_, seed);
  if (!box_.contains(p)) throw UsageError("Problem '" + name_ + "': starting point is infeasible");
  return p;
}

/// Per-run view of a Problem that counts oracle calls.
///
/// With memoization enabled, repeated queries at bit-identical points are
/// served from a cache and do not increment the counters.
class Evaluator {
 public:
  explicit Evaluator(const Problem& problem, bool memoize = false) : problem_(&problem), memoize_(memoize) {}

  const Problem& problem() const { return *problem_; }
  const Box& box() const { return problem_->box(); }

  double f(const Vector& x, const IntVector& z) {
    if (memoize_) {
      auto key = make_key(x, z);
      if (auto it = f_cache_.find(key); it != f_cache_.end()) return it->second;
      const double v = call_f(x, z);
      f_cache_.emplace(std::move(key), v);
      return v;
    }
    return call_f(x, z);
  }
  double f(const MixedPoint& p) { return f(p.x, p.z); }

  Vector grad(const Vector& x, const IntVector& z) {
    if (memoize_) {
      auto key = make_key(x, z);
      if (auto it = g_cache_.find(key); it != g_cache_.end()) return it->second;
      Vector g = call_g(x, z);
      g_cache_.emplace(std::move(key), g);
      return g;
    }
    return call_g(x, z);
  }
  Vector grad(const MixedPoint& p) { return grad(p.x, p.z); }

  std::uint64_t n_f() const { return n_f_; }
  std::uint64_t n_g() const { return n_g_; }

 private:
  static std::string make_key(const Vector& x, const IntVector& z) {
    std::string key(sizeof(double) * x.size() + sizeof(std::int64_t) * z.size(), '\0');
    if (x.size()) std::memcpy(key.data(), x.data(), sizeof(double) * x.size());
    if (z.size()) std::memcpy(key.data() + sizeof(double) * x.size(), z.data(), sizeof(std::int64_t) * z.size());
    return key;
  }

  double call_f(const Vector& x, const IntVector& z) {
    ++n_f_;
    const double v = problem_->objective(x, z);
    if (!std::isfinite(v))
      throw OracleError("objective of '" + problem_->name() + "' is not finite at " + format_point(x, z));
    return v;
  }

  Vector call_g(const Vector& x, const IntVector& z) {
    ++n_g_;
    Vector g = problem_->gradient(x, z);
    if (g.size() != x.size())
      throw OracleError("gradient of '" + problem_->name() + "' has wrong length at " + format_point(x, z));
    if (!g.allFinite())
      throw OracleError("gradient of '" + problem_->name() + "' is not finite at " + format_point(x, z));
    return g;
  }

  const Problem* problem_;
  bool memoize_;
  std::uint64_t n_f_ = 0;
  std::uint64_t n_g_ = 0;
  std::unordered_map<std::string, double> f_cache_;
  std::unordered_map<std::string, Vector> g_cache_;
};

enum class Engine { Lbfgsb, ProjectedGradient, FrankWolfe };

/// Tunables shared by both solvers. Defaults follow the published protocol
/// where one exists.
struct SolverConfig {
  double gamma = 1e-4;  // sufficient-decrease constant (Armijo and derivative-free)
  double delta = 0.5;   // backtracking / expansion factor
  double eta = 0.5;     // xi reduction and derivative-free stepsize reduction
  double xi0 = 1.0;     // initial discrete sufficient decrease
  double alpha0_c = 1.0;
  double eps_stat = 1e-7;
  int max_discrete_dirs = 300;
  std::optional<int> p_steps;  // unset: ceil(N / 10)
  Engine engine = Engine::Lbfgsb;

  // Self-stop thresholds.
  double xi_min = 1e-6;
  double alpha_stop = 1e-6;  // derivative-free continuous stepsize floor
  bool stop_at_direction_cap = false;

  // Budgets; unset means unlimited.
  std::optional<double> budget_seconds;
  std::optional<double> budget_evals;  // n_f + gradient_weight * n_g
  double gradient_weight = 1.0;
  std::optional<std::uint64_t> max_iterations;

  std::uint64_t seed = 0;
  bool memoize = false;
  bool record_trace = true;

  int resolved_p_steps(Eigen::Index N) const {
    if (p_steps) return *p_steps;
    return std::max<int>(1, static_cast<int>((N + 9) / 10));
  }

  void validate() const {
    auto open01 = [](double v) { return v > 0.0 && v < 1.0; };
    if (!open01(gamma)) throw UsageError("gamma must lie in (0, 1)");
    if (!open01(delta)) throw UsageError("delta must lie in (0, 1)");
    if (!open01(eta)) throw UsageError("eta must lie in (0, 1)");
    if (!(xi0 > 0.0)) throw UsageError("xi0 must be positive");
    if (!(alpha0_c > 0.0)) throw UsageError("alpha0_c must be positive");
    if (!(eps_stat > 0.0)) throw UsageError("eps_stat must be positive");
    if (max_discrete_dirs < 1) throw UsageError("max_discrete_dirs must be at least 1");
    if (p_steps && *p_steps < 1) throw UsageError("p_steps must be at least 1");
    if (budget_seconds && *budget_seconds < 0.0) throw UsageError("budget_seconds must be nonnegative");
    if (budget_evals && *budget_evals < 0.0) throw UsageError("budget_evals must be nonnegative");
    if (!(gradient_weight >= 0.0)) throw UsageError("gradient_weight must be nonnegative");
  }
};

}  // namespace gdfl
