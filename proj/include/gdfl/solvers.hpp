#pragma once

// Alternating mixed-integer local search.
//
//   G-DFL:  discrete search, then one Armijo step along a feasible descent
//           direction of the configured engine (plus p-1 further steps in
//           the multi-step "+" variant).
//   DFNDFL: derivative-free continuous line search along a dense unit
//           direction (or cycling coordinates), then discrete search.

#include "gdfl/continuous.hpp"
#include "gdfl/core.hpp"
#include "gdfl/discrete.hpp"
#include "gdfl/qmc.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gdfl {

enum class Algorithm { Gdfl, GdflPlus, Dfndfl, DfndflCoordinate };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Gdfl: return "gdfl";
    case Algorithm::GdflPlus: return "gdfl+";
    case Algorithm::Dfndfl: return "dfndfl";
    case Algorithm::DfndflCoordinate: return "dfndfl-c";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "gdfl") return Algorithm::Gdfl;
  if (s == "gdfl+") return Algorithm::GdflPlus;
  if (s == "dfndfl") return Algorithm::Dfndfl;
  if (s == "dfndfl-c") return Algorithm::DfndflCoordinate;
  throw UsageError("unknown algorithm '" + s + "'");
}

inline std::string to_string(Engine e) {
  switch (e) {
    case Engine::Lbfgsb: return "lbfgsb";
    case Engine::ProjectedGradient: return "pg";
    case Engine::FrankWolfe: return "fw";
  }
  return "?";
}

inline Engine parse_engine(const std::string& s) {
  if (s == "lbfgsb") return Engine::Lbfgsb;
  if (s == "pg") return Engine::ProjectedGradient;
  if (s == "fw") return Engine::FrankWolfe;
  throw UsageError("unknown engine '" + s + "'");
}

enum class StopReason { BudgetTime, BudgetEvals, Converged, DirsExhausted, IterationLimit, Failed };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::BudgetTime: return "budget_time";
    case StopReason::BudgetEvals: return "budget_evals";
    case StopReason::Converged: return "converged";
    case StopReason::DirsExhausted: return "dirs_exhausted";
    case StopReason::IterationLimit: return "iteration_limit";
    case StopReason::Failed: return "failed";
  }
  return "?";
}

inline StopReason parse_stop_reason(const std::string& s) {
  for (auto r : {StopReason::BudgetTime, StopReason::BudgetEvals, StopReason::Converged, StopReason::DirsExhausted,
                 StopReason::IterationLimit, StopReason::Failed})
    if (to_string(r) == s) return r;
  throw UsageError("unknown stop reason '" + s + "'");
}

/// Per-iteration telemetry. Only the first block is exported to trace files;
/// the rest supports invariant checks.
struct IterationRecord {
  std::uint64_t k = 0;
  double f = 0.0;
  double xi = 0.0;
  double alpha_c = 0.0;
  std::uint64_t n_f = 0;
  std::uint64_t n_g = 0;
  double t = 0.0;

  double f_before = 0.0;
  double xi_before = 0.0;
  bool ds_improved = false;
  bool ds_xi_reduced = false;
  bool ds_all_unit = false;
  bool ds_saturated = false;
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<ArmijoStep> armijo;
};

struct BestSoFar {
  MixedPoint point;
  double f = std::numeric_limits<double>::infinity();
  double t = 0.0;
  std::uint64_t n_it = 0;
  std::uint64_t n_f = 0;
  std::uint64_t n_g = 0;
};

using Clock = std::chrono::steady_clock;

struct SolverState {
  std::uint64_t k = 0;
  MixedPoint current;
  double f = 0.0;
  std::optional<Vector> grad;  // gradient at current, when known
  double alpha_c = 1.0;
  Vector alpha_coord;
  Eigen::Index coord_cursor = 0;
  PrimitiveSet dirs;
  DenseDirectionStream dense{1, 0};
  BestSoFar best;
  Clock::time_point started = Clock::now();
  bool converged = false;
  bool dirs_exhausted = false;

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - started).count(); }
};

/// Optional extra discrete improvement applied when the discrete search moved
/// z (the "find z^d" hook). Returning a candidate with a value no larger than
/// the current one replaces z; anything else is ignored.
struct SolverHooks {
  std::function<std::optional<IntVector>(Evaluator&, const Vector& x, const IntVector& z, double f)>
      discrete_improvement;
};

inline SolverState make_initial_state(Evaluator& ev, const MixedPoint& start, const SolverConfig& cfg) {
  const Box& box = ev.box();
  if (!box.contains(start)) throw UsageError("starting point is infeasible");
  SolverState s;
  s.started = Clock::now();
  s.current = start;
  s.f = ev.f(start);
  s.alpha_c = cfg.alpha0_c;
  s.alpha_coord = Vector::Constant(box.n(), cfg.alpha0_c);
  s.dirs = initial_direction_set(static_cast<std::size_t>(box.m()), static_cast<std::size_t>(cfg.max_discrete_dirs),
                                 cfg.xi0, cfg.seed);
  s.dense = DenseDirectionStream(static_cast<std::size_t>(std::max<Eigen::Index>(box.n(), 1)), cfg.seed);
  s.best = BestSoFar{start, s.f, s.elapsed(), 0, ev.n_f(), ev.n_g()};
  return s;
}

namespace detail {

inline void apply_discrete_outcome(SolverState& s, Evaluator& ev, const DsOutcome& ds, const SolverHooks* hooks) {
  if (!ds.improved) return;
  s.current.z = ds.point.z;
  s.f = ds.f;
  s.grad.reset();
  if (hooks && hooks->discrete_improvement) {
    if (auto cand = hooks->discrete_improvement(ev, s.current.x, s.current.z, s.f)) {
      if (ev.box().contains_z(*cand)) {
        const double fc = ev.f(s.current.x, *cand);
        if (fc <= s.f) {
          s.current.z = *cand;
          s.f = fc;
        }
      }
    }
  }
}

inline void finish_iteration(SolverState& s, Evaluator& ev, IterationRecord& rec) {
  ++s.k;
  rec.k = s.k;
  rec.f = s.f;
  rec.xi = s.dirs.xi();
  rec.n_f = ev.n_f();
  rec.n_g = ev.n_g();
  rec.t = s.elapsed();
  if (s.f < s.best.f) s.best = BestSoFar{s.current, s.f, rec.t, s.k, rec.n_f, rec.n_g};
}

}  // namespace detail

/// One G-DFL iteration, in place. `multi_step` selects the "+" variant.
inline IterationRecord gdfl_iterate(SolverState& s, Evaluator& ev, const SolverConfig& cfg, bool multi_step,
                                    const SolverHooks* hooks = nullptr) {
  const Box& box = ev.box();
  IterationRecord rec;
  rec.f_before = s.f;
  rec.xi_before = s.dirs.xi();

  const DsOutcome ds = discrete_search(ev, s.current, s.f, s.dirs, cfg.eta);
  rec.ds_improved = ds.improved;
  rec.ds_xi_reduced = ds.xi_reduced;
  rec.ds_all_unit = ds.all_unit;
  rec.ds_saturated = ds.saturated;
  detail::apply_discrete_outcome(s, ev, ds, hooks);

  bool x_stationary = true;
  if (box.n() > 0) {
    if (!s.grad) s.grad = ev.grad(s.current);
    rec.residual = stationarity_residual(s.current.x, *s.grad, box);
    x_stationary = rec.residual <= cfg.eps_stat;
    if (!x_stationary) {
      LbfgsMemory mem;
      const Vector v = engine_direction(cfg.engine, s.current.x, *s.grad, box, &mem);
      const double slope = s.grad->dot(v);
      // A non-negative slope here only arises from round-off; it is handled
      // as a zero direction for this iteration.
      if (slope < 0.0) {
        auto ls = armijo_backtrack(ev, s.current, s.f, *s.grad, v, cfg.gamma, cfg.delta, 1.0);
        if (ls.success) {
          rec.armijo.push_back({ls.alpha, slope, s.f, ls.f_new});
          rec.alpha_c = ls.alpha;
          if (multi_step) {
            Vector g_new = ev.grad(ls.x_new, s.current.z);
            if (cfg.engine == Engine::Lbfgsb) mem.update(ls.x_new - s.current.x, g_new - *s.grad);
            s.grad = std::move(g_new);
          } else {
            s.grad.reset();
          }
          s.current.x = std::move(ls.x_new);
          s.f = ls.f_new;

          const int extra = cfg.resolved_p_steps(box.n() + box.m()) - 1;
          if (multi_step && extra > 0) {
            auto local = continuous_local_search(ev, s.current.z, s.current.x, s.f, *s.grad, cfg.engine, extra, cfg,
                                                 &mem);
            rec.armijo.insert(rec.armijo.end(), local.accepted.begin(), local.accepted.end());
            s.current.x = std::move(local.x);
            s.f = local.f;
            s.grad = std::move(local.grad);
          }
        }
      }
    }
  }

  s.converged = !ds.improved && ds.xi_reduced && ds.saturated && s.dirs.xi() < cfg.xi_min && x_stationary;
  s.dirs_exhausted = cfg.stop_at_direction_cap && !ds.improved && ds.all_unit && s.dirs.full();
  detail::finish_iteration(s, ev, rec);
  return rec;
}

/// One DFNDFL iteration, in place. `coordinate` cycles +-e_i with a stepsize
/// per coordinate instead of dense Sobol directions.
inline IterationRecord dfndfl_iterate(SolverState& s, Evaluator& ev, const SolverConfig& cfg, bool coordinate,
                                      const SolverHooks* hooks = nullptr) {
  const Box& box = ev.box();
  const Eigen::Index n = box.n();
  IterationRecord rec;
  rec.f_before = s.f;
  rec.xi_before = s.dirs.xi();

  bool x_small_step = true;
  if (n > 0) {
    LineSearchResult ls;
    if (coordinate) {
      const Eigen::Index i = s.coord_cursor;
      Vector e = Vector::Zero(n);
      e[i] = 1.0;
      ls = df_linesearch_continuous(ev, s.current, s.f, e, s.alpha_coord[i], cfg.gamma, cfg.delta, cfg.eta);
      s.alpha_coord[i] = ls.alpha;
      s.coord_cursor = (i + 1) % n;
      rec.alpha_c = s.alpha_coord.maxCoeff();
    } else {
      const Vector v = s.dense.next();
      ls = df_linesearch_continuous(ev, s.current, s.f, v, s.alpha_c, cfg.gamma, cfg.delta, cfg.eta);
      s.alpha_c = ls.alpha;
      rec.alpha_c = s.alpha_c;
    }
    if (ls.success) {
      s.current.x = std::move(ls.x_new);
      s.f = ls.f_new;
    }
    x_small_step = rec.alpha_c <= cfg.alpha_stop;
  }

  const DsOutcome ds = discrete_search(ev, s.current, s.f, s.dirs, cfg.eta);
  rec.ds_improved = ds.improved;
  rec.ds_xi_reduced = ds.xi_reduced;
  rec.ds_all_unit = ds.all_unit;
  rec.ds_saturated = ds.saturated;
  detail::apply_discrete_outcome(s, ev, ds, hooks);

  s.converged = !ds.improved && ds.xi_reduced && ds.saturated && s.dirs.xi() < cfg.xi_min && x_small_step;
  s.dirs_exhausted = cfg.stop_at_direction_cap && !ds.improved && ds.all_unit && s.dirs.full();
  detail::finish_iteration(s, ev, rec);
  return rec;
}

/// Outcome of one solver run. Best-point counters are taken at the end of the
/// iteration that produced the best value.
struct RunRecord {
  std::string problem;
  std::string algorithm;
  std::uint64_t seed = 0;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  double f_star = std::numeric_limits<double>::quiet_NaN();
  double T = 0.0;
  std::uint64_t N_it = 0;
  std::uint64_t n_f = 0;
  std::uint64_t n_g = 0;
  double T_best = 0.0;
  std::uint64_t N_it_best = 0;
  std::uint64_t n_f_best = 0;
  std::uint64_t n_g_best = 0;
  StopReason stop_reason = StopReason::Failed;
  bool ok = true;
  std::string error;

  MixedPoint x_star;
  std::vector<IterationRecord> trace;
};

inline RunRecord run(const Problem& prob, SolverConfig cfg, Algorithm algorithm, std::uint64_t seed,
                     const std::optional<MixedPoint>& start = std::nullopt, const SolverHooks* hooks = nullptr) {
  cfg.seed = seed;
  cfg.validate();
  RunRecord rec;
  rec.problem = prob.name();
  rec.algorithm = to_string(algorithm);
  rec.seed = seed;
  rec.n = prob.n();
  rec.m = prob.m();

  Evaluator ev(prob, cfg.memoize);
  std::optional<SolverState> state;
  auto fill = [&](const SolverState& s) {
    rec.f_star = s.best.f;
    rec.x_star = s.best.point;
    rec.T = s.elapsed();
    rec.N_it = s.k;
    rec.n_f = ev.n_f();
    rec.n_g = ev.n_g();
    rec.T_best = s.best.t;
    rec.N_it_best = s.best.n_it;
    rec.n_f_best = s.best.n_f;
    rec.n_g_best = s.best.n_g;
  };
  try {
    state.emplace(make_initial_state(ev, start ? *start : prob.starting_point(seed), cfg));
    SolverState& s = *state;
    for (;;) {
      IterationRecord it;
      switch (algorithm) {
        case Algorithm::Gdfl: it = gdfl_iterate(s, ev, cfg, false, hooks); break;
        case Algorithm::GdflPlus: it = gdfl_iterate(s, ev, cfg, true, hooks); break;
        case Algorithm::Dfndfl: it = dfndfl_iterate(s, ev, cfg, false, hooks); break;
        case Algorithm::DfndflCoordinate: it = dfndfl_iterate(s, ev, cfg, true, hooks); break;
      }
      if (cfg.record_trace) rec.trace.push_back(std::move(it));

      if (s.converged) {
        rec.stop_reason = StopReason::Converged;
        break;
      }
      if (s.dirs_exhausted) {
        rec.stop_reason = StopReason::DirsExhausted;
        break;
      }
      if (cfg.budget_seconds && s.elapsed() >= *cfg.budget_seconds) {
        rec.stop_reason = StopReason::BudgetTime;
        break;
      }
      if (cfg.budget_evals &&
          static_cast<double>(ev.n_f()) + cfg.gradient_weight * static_cast<double>(ev.n_g()) >= *cfg.budget_evals) {
        rec.stop_reason = StopReason::BudgetEvals;
        break;
      }
      if (cfg.max_iterations && s.k >= *cfg.max_iterations) {
        rec.stop_reason = StopReason::IterationLimit;
        break;
      }
    }
    fill(s);
  } catch (const OracleError& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.stop_reason = StopReason::Failed;
    if (state) fill(*state);
  }
  return rec;
}

/// One JSON object per line: k, f, xi, alpha_c, n_f, n_g, t.
inline void write_trace(std::ostream& os, const std::vector<IterationRecord>& trace) {
  for (const auto& r : trace) {
    nlohmann::json j = {{"k", r.k},     {"f", r.f},     {"xi", r.xi}, {"alpha_c", r.alpha_c},
                        {"n_f", r.n_f}, {"n_g", r.n_g}, {"t", r.t}};
    os << j.dump() << '\n';
  }
}

}  // namespace gdfl
