#pragma once

// Continuous-variable machinery: line searches and feasible descent
// directions on the box Omega_x.

#include "gdfl/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <utility>
#include <vector>

namespace gdfl {

struct LineSearchResult {
  double alpha = 0.0;
  Vector x_new;
  double f_new = 0.0;
  std::uint64_t n_evals = 0;
  bool success = false;
};

/// Armijo backtracking along a feasible direction v = x_tilde - x.
///
/// Returns the largest alpha in {alpha0 * delta^h : h = 0..max_backtracks}
/// with f(x + alpha v) <= f0 + gamma * alpha * grad^T v. Trial points are
/// clamped to the box to absorb round-off in x + v. On failure alpha is 0 and
/// x_new = x.
inline LineSearchResult armijo_backtrack(Evaluator& ev, const MixedPoint& p, double f0, const Vector& grad,
                                         const Vector& v, double gamma, double delta, double alpha0 = 1.0,
                                         int max_backtracks = 50) {
  if (v.size() != p.x.size() || grad.size() != p.x.size()) throw UsageError("armijo_backtrack: dimension mismatch");
  const double slope = grad.dot(v);
  if (!(slope < 0.0)) throw UsageError("armijo_backtrack: v is not a descent direction");
  LineSearchResult out;
  double alpha = alpha0;
  for (int h = 0; h <= max_backtracks; ++h, alpha *= delta) {
    Vector trial = project_box(p.x + alpha * v, ev.box());
    const double ft = ev.f(trial, p.z);
    ++out.n_evals;
    if (ft <= f0 + gamma * alpha * slope) {
      out.alpha = alpha;
      out.x_new = std::move(trial);
      out.f_new = ft;
      out.success = true;
      return out;
    }
  }
  out.x_new = p.x;
  out.f_new = f0;
  return out;
}

/// Derivative-free line search with expansion along +v then -v.
///
/// Success test: f(P(x + rho * a * v)) <= f0 - gamma * a^2. On success the
/// step is expanded by 1/delta while the test keeps holding and the last
/// passing stepsize is returned. On failure alpha = eta * alpha_c and x is
/// unchanged.
inline LineSearchResult df_linesearch_continuous(Evaluator& ev, const MixedPoint& p, double f0, const Vector& v_unit,
                                                 double alpha_c, double gamma, double delta, double eta,
                                                 int max_expansions = 200) {
  if (v_unit.size() != p.x.size()) throw UsageError("df_linesearch_continuous: dimension mismatch");
  if (!(alpha_c > 0.0)) throw UsageError("df_linesearch_continuous: alpha_c must be positive");
  LineSearchResult out;
  auto trial = [&](double rho, double a) { return project_box(p.x + (rho * a) * v_unit, ev.box()); };
  for (double rho : {1.0, -1.0}) {
    Vector xt = trial(rho, alpha_c);
    double ft = ev.f(xt, p.z);
    ++out.n_evals;
    if (!(ft <= f0 - gamma * alpha_c * alpha_c)) continue;
    double a = alpha_c;
    for (int h = 0; h < max_expansions; ++h) {
      const double a_next = a / delta;
      Vector x_next = trial(rho, a_next);
      const double f_next = ev.f(x_next, p.z);
      ++out.n_evals;
      if (!(f_next <= f0 - gamma * a_next * a_next)) break;
      a = a_next;
      xt = std::move(x_next);
      ft = f_next;
    }
    out.alpha = a;
    out.x_new = std::move(xt);
    out.f_new = ft;
    out.success = true;
    return out;
  }
  out.alpha = eta * alpha_c;
  out.x_new = p.x;
  out.f_new = f0;
  return out;
}

/// v = P(x - s * grad) - x.
inline Vector pg_direction(const Vector& x, const Vector& grad, const Box& box, double step_s = 1.0) {
  return project_box(x - step_s * grad, box) - x;
}

/// Frank-Wolfe direction: the box vertex minimizing grad^T y, minus x.
/// Coordinates with zero gradient stay put.
inline Vector fw_direction(const Vector& x, const Vector& grad, const Box& box) {
  Vector target = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (grad[i] > 0.0)
      target[i] = box.lx()[i];
    else if (grad[i] < 0.0)
      target[i] = box.ux()[i];
  }
  return target - x;
}

/// Limited-memory BFGS pairs for the compact form B = theta*I - W M W^T.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(std::size_t capacity = 10, double initial_scale = 1.0)
      : capacity_(capacity), initial_scale_(initial_scale), theta_(initial_scale) {
    if (capacity < 1) throw UsageError("LbfgsMemory: capacity must be at least 1");
    if (!(initial_scale > 0.0)) throw UsageError("LbfgsMemory: initial scale must be positive");
  }

  /// Stores (s, y) if s^T y > 1e-10 ||s|| ||y||; returns whether it was stored.
  bool update(const Vector& s, const Vector& y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-10 * s.norm() * y.norm()) || !std::isfinite(sy)) return false;
    if (s_.size() == capacity_) {
      s_.pop_front();
      y_.pop_front();
    }
    s_.push_back(s);
    y_.push_back(y);
    theta_ = y.squaredNorm() / sy;
    return true;
  }

  void clear() {
    s_.clear();
    y_.clear();
    theta_ = initial_scale_;
  }

  std::size_t size() const { return s_.size(); }
  bool empty() const { return s_.empty(); }
  std::size_t capacity() const { return capacity_; }
  double theta() const { return theta_; }
  const std::deque<Vector>& s() const { return s_; }
  const std::deque<Vector>& y() const { return y_; }

 private:
  std::size_t capacity_;
  double initial_scale_;
  double theta_;
  std::deque<Vector> s_;
  std::deque<Vector> y_;
};

namespace detail {

struct CompactForm {
  Eigen::MatrixXd W;  // n x 2k, [Y, theta*S]
  Eigen::MatrixXd M;  // 2k x 2k
  double theta = 1.0;
};

inline CompactForm compact_form(const LbfgsMemory& mem, Eigen::Index n) {
  CompactForm cf;
  cf.theta = mem.theta();
  const auto k = static_cast<Eigen::Index>(mem.size());
  cf.W.resize(n, 2 * k);
  cf.M.resize(2 * k, 2 * k);
  if (k == 0) return cf;
  Eigen::MatrixXd S(n, k), Y(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    S.col(j) = mem.s()[static_cast<std::size_t>(j)];
    Y.col(j) = mem.y()[static_cast<std::size_t>(j)];
  }
  cf.W << Y, cf.theta * S;
  const Eigen::MatrixXd SY = S.transpose() * Y;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < i; ++j) L(i, j) = SY(i, j);
  Eigen::MatrixXd inner(2 * k, 2 * k);
  inner << -Eigen::MatrixXd(SY.diagonal().asDiagonal()), L.transpose(), L, cf.theta * (S.transpose() * S);
  cf.M = inner.fullPivLu().inverse();
  return cf;
}

// Generalized Cauchy point along P(x - t g). Also returns c = W^T (xcp - x).
inline std::pair<Vector, Vector> cauchy_point(const Vector& x, const Vector& g, const Box& box, const CompactForm& cf) {
  const Eigen::Index n = x.size();
  const double inf = std::numeric_limits<double>::infinity();
  Vector d = -g;
  Vector xcp = x;
  std::vector<std::pair<double, Eigen::Index>> breaks;
  breaks.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = inf;
    if (g[i] < 0.0)
      t = (x[i] - box.ux()[i]) / g[i];
    else if (g[i] > 0.0)
      t = (x[i] - box.lx()[i]) / g[i];
    if (t <= 0.0)
      d[i] = 0.0;
    else if (t < inf)
      breaks.emplace_back(t, i);
  }
  std::sort(breaks.begin(), breaks.end());

  const Eigen::Index k2 = cf.W.cols();
  Vector p = cf.W.transpose() * d;
  Vector c = Vector::Zero(k2);
  double fp = -d.squaredNorm();
  if (!(fp < 0.0)) return {xcp, c};
  double fpp = -cf.theta * fp - (k2 ? p.dot(cf.M * p) : 0.0);
  auto min_step = [&] { return fpp > 0.0 ? -fp / fpp : inf; };
  double dt_min = min_step();
  double t_old = 0.0;

  for (const auto& [tb, b] : breaks) {
    const double dt = tb - t_old;
    if (dt_min < dt) break;
    xcp[b] = d[b] > 0.0 ? box.ux()[b] : box.lx()[b];
    const double zb = xcp[b] - x[b];
    const double gb = g[b];
    if (k2) {
      c += dt * p;
      const Vector wb = cf.W.row(b).transpose();
      const Vector Mwb = cf.M * wb;
      fp += dt * fpp + gb * gb + cf.theta * gb * zb - gb * Mwb.dot(c);
      fpp += -cf.theta * gb * gb - 2.0 * gb * Mwb.dot(p) - gb * gb * wb.dot(Mwb);
      p += gb * wb;
    } else {
      fp += dt * fpp + gb * gb + cf.theta * gb * zb;
      fpp += -cf.theta * gb * gb;
    }
    d[b] = 0.0;
    t_old = tb;
    dt_min = min_step();
  }
  if (!std::isfinite(dt_min)) dt_min = 0.0;
  dt_min = std::max(dt_min, 0.0);
  t_old += dt_min;
  for (Eigen::Index i = 0; i < n; ++i)
    if (d[i] != 0.0) xcp[i] = std::clamp(x[i] + t_old * d[i], box.lx()[i], box.ux()[i]);
  if (k2) c += dt_min * p;
  return {xcp, c};
}

// Minimizes the quadratic model over the variables free at the Cauchy point
// and truncates the step to the box.
inline Vector subspace_step(const Vector& x, const Vector& g, const Box& box, const CompactForm& cf, const Vector& xcp,
                            const Vector& c) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i)
    if (xcp[i] > box.lx()[i] && xcp[i] < box.ux()[i]) free.push_back(i);
  if (free.empty()) return xcp;
  const auto nf = static_cast<Eigen::Index>(free.size());
  const Eigen::Index k2 = cf.W.cols();

  Vector r(nf);
  Vector Mc = k2 ? Vector(cf.M * c) : Vector();
  Eigen::MatrixXd WF(nf, k2);
  for (Eigen::Index j = 0; j < nf; ++j) {
    const Eigen::Index i = free[static_cast<std::size_t>(j)];
    r[j] = g[i] + cf.theta * (xcp[i] - x[i]);
    if (k2) {
      WF.row(j) = cf.W.row(i);
      r[j] -= cf.W.row(i).dot(Mc);
    }
  }

  Vector du;
  constexpr Eigen::Index kDirectLimit = 200;
  if (nf <= kDirectLimit) {
    Eigen::MatrixXd BFF = cf.theta * Eigen::MatrixXd::Identity(nf, nf);
    if (k2) BFF.noalias() -= WF * cf.M * WF.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(BFF);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return xcp;
    du = ldlt.solve(-r);
  } else {
    // Conjugate gradient on B_FF du = -r, capped at 50 iterations.
    auto apply = [&](const Vector& v) -> Vector {
      Vector out = cf.theta * v;
      if (k2) out.noalias() -= WF * (cf.M * (WF.transpose() * v));
      return out;
    };
    du = Vector::Zero(nf);
    Vector res = -r;
    Vector dir = res;
    double rr = res.squaredNorm();
    const double tol = 1e-20 * std::max(1.0, r.squaredNorm());
    for (int it = 0; it < 50 && rr > tol; ++it) {
      const Vector Ad = apply(dir);
      const double dAd = dir.dot(Ad);
      if (!(dAd > 0.0)) break;
      const double a = rr / dAd;
      du += a * dir;
      res -= a * Ad;
      const double rr_new = res.squaredNorm();
      dir = res + (rr_new / rr) * dir;
      rr = rr_new;
    }
  }
  if (!du.allFinite()) return xcp;

  double step = 1.0;
  for (Eigen::Index j = 0; j < nf; ++j) {
    const Eigen::Index i = free[static_cast<std::size_t>(j)];
    if (du[j] > 0.0)
      step = std::min(step, (box.ux()[i] - xcp[i]) / du[j]);
    else if (du[j] < 0.0)
      step = std::min(step, (box.lx()[i] - xcp[i]) / du[j]);
  }
  step = std::max(step, 0.0);
  Vector xhat = xcp;
  for (Eigen::Index j = 0; j < nf; ++j) {
    const Eigen::Index i = free[static_cast<std::size_t>(j)];
    xhat[i] = std::clamp(xcp[i] + step * du[j], box.lx()[i], box.ux()[i]);
  }
  return xhat;
}

}  // namespace detail

/// Box-constrained limited-memory quasi-Newton direction v = x_hat - x.
///
/// x_hat is obtained from the generalized Cauchy point of the quadratic model
/// followed by minimization over the free variables and truncation to the
/// box. With empty memory (B = theta*I) this equals P(x - g/theta) - x.
inline Vector lbfgsb_direction(const Vector& x, const Vector& grad, const Box& box, const LbfgsMemory& mem) {
  if (x.size() != grad.size() || x.size() != box.n()) throw UsageError("lbfgsb_direction: dimension mismatch");
  const auto cf = detail::compact_form(mem, x.size());
  const Vector fallback = pg_direction(x, grad, box, 1.0 / mem.theta());
  if (!cf.M.allFinite()) return fallback;
  auto [xcp, c] = detail::cauchy_point(x, grad, box, cf);
  if (!xcp.allFinite() || !c.allFinite()) return fallback;
  Vector v = detail::subspace_step(x, grad, box, cf, xcp, c) - x;
  if (!v.allFinite()) return fallback;
  if (!(grad.dot(v) < 0.0)) return fallback;
  return v;
}

inline Vector lbfgsb_direction(Evaluator& ev, const MixedPoint& p, const LbfgsMemory& mem) {
  return lbfgsb_direction(p.x, ev.grad(p), ev.box(), mem);
}

/// One accepted Armijo step, kept for post hoc verification.
struct ArmijoStep {
  double alpha = 0.0;
  double slope = 0.0;  // grad^T v at the base point
  double f_before = 0.0;
  double f_after = 0.0;
};

inline bool satisfies_armijo(const ArmijoStep& s, double gamma) {
  return s.f_after <= s.f_before + gamma * s.alpha * s.slope;
}

inline Vector engine_direction(Engine engine, const Vector& x, const Vector& grad, const Box& box,
                               const LbfgsMemory* mem) {
  switch (engine) {
    case Engine::ProjectedGradient:
      return pg_direction(x, grad, box, 1.0);
    case Engine::FrankWolfe:
      return fw_direction(x, grad, box);
    case Engine::Lbfgsb:
      return mem ? lbfgsb_direction(x, grad, box, *mem) : lbfgsb_direction(x, grad, box, LbfgsMemory());
  }
  return pg_direction(x, grad, box, 1.0);
}

struct LocalSearchResult {
  Vector x;
  double f = 0.0;
  Vector grad;  // gradient at x
  int steps = 0;
  bool stationary = false;
  std::vector<ArmijoStep> accepted;
};

/// Up to `steps` Armijo-accepted iterations of `engine` from (x, z) with z
/// fixed. Stops early when the stationarity residual drops to eps_stat or
/// the line search fails. `grad` must be the gradient at x.
inline LocalSearchResult continuous_local_search(Evaluator& ev, const IntVector& z, Vector x, double f, Vector grad,
                                                 Engine engine, int steps, const SolverConfig& cfg,
                                                 LbfgsMemory* memory = nullptr) {
  LocalSearchResult out;
  LbfgsMemory local;
  LbfgsMemory* mem = memory ? memory : &local;
  const Box& box = ev.box();
  for (int it = 0; it < steps; ++it) {
    if (stationarity_residual(x, grad, box) <= cfg.eps_stat) {
      out.stationary = true;
      break;
    }
    const Vector v = engine_direction(engine, x, grad, box, mem);
    const double slope = grad.dot(v);
    if (!(slope < 0.0)) break;
    auto ls = armijo_backtrack(ev, MixedPoint{x, z}, f, grad, v, cfg.gamma, cfg.delta, 1.0);
    if (!ls.success) break;
    out.accepted.push_back({ls.alpha, slope, f, ls.f_new});
    Vector g_new = ev.grad(ls.x_new, z);
    if (engine == Engine::Lbfgsb) mem->update(ls.x_new - x, g_new - grad);
    x = std::move(ls.x_new);
    f = ls.f_new;
    grad = std::move(g_new);
    ++out.steps;
  }
  if (!out.stationary && x.size() > 0) out.stationary = stationarity_residual(x, grad, box) <= cfg.eps_stat;
  out.x = std::move(x);
  out.f = f;
  out.grad = std::move(grad);
  return out;
}

/// Runs up to `steps` quasi-Newton iterations from p with z fixed.
inline MixedPoint lbfgsb_run(Evaluator& ev, const MixedPoint& p, int steps, double eps_stat) {
  if (steps < 1) throw UsageError("lbfgsb_run: steps must be at least 1");
  SolverConfig cfg;
  cfg.eps_stat = eps_stat;
  const double f = ev.f(p);
  auto res = continuous_local_search(ev, p.z, p.x, f, ev.grad(p), Engine::Lbfgsb, steps, cfg);
  return MixedPoint{std::move(res.x), p.z};
}

}  // namespace gdfl
