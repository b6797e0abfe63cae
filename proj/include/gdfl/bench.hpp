#pragma once

// Experiment harness: run matrices, seed averaging, gradient-cost weighting,
// performance profiles, relative-gap distributions and record files.

#include "gdfl/problems.hpp"
#include "gdfl/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace gdfl {

// ---------------------------------------------------------------- weights

/// Gradient-to-objective cost ratio w(n) per continuous dimension n.
class WeightTable {
 public:
  WeightTable() = default;
  explicit WeightTable(std::map<Eigen::Index, double> entries) : entries_(std::move(entries)) {
    for (const auto& [n, w] : entries_)
      if (!(w >= 1.0)) throw UsageError("WeightTable: weights must be at least 1");
  }

  /// Ratios measured on the reference hardware (maximum per size).
  static WeightTable defaults() {
    return WeightTable({{95, 2.47}, {195, 2.852}, {495, 4.999}, {995, 7.543}, {1995, 10.908}, {4995, 44.513}});
  }

  /// Weight of the nearest tabulated size at or above n; the largest entry
  /// beyond the table.
  double operator()(Eigen::Index n) const {
    if (entries_.empty()) throw UsageError("WeightTable: empty table");
    auto it = entries_.lower_bound(n);
    if (it == entries_.end()) return std::prev(it)->second;
    return it->second;
  }

  const std::map<Eigen::Index, double>& entries() const { return entries_; }

 private:
  std::map<Eigen::Index, double> entries_;
};

inline double weighted_evals(const RunRecord& rec, const WeightTable& w) {
  return static_cast<double>(rec.n_f) + w(rec.n) * static_cast<double>(rec.n_g);
}

inline double weighted_evals_best(const RunRecord& rec, const WeightTable& w) {
  return static_cast<double>(rec.n_f_best) + w(rec.n) * static_cast<double>(rec.n_g_best);
}

// --------------------------------------------------------------- profiles

/// Dolan-More profile. rho[s][j] is the fraction of kept problems whose
/// ratio for solver s is at most taus[j]; between breakpoints rho is constant
/// (right-continuous step function).
struct PerformanceProfile {
  std::vector<double> taus;
  std::vector<std::vector<double>> rho;
  std::vector<std::size_t> kept;     // problem rows used
  std::vector<std::size_t> dropped;  // rows where every solver was infinite
  std::vector<std::vector<double>> ratios;  // per kept problem, per solver

  double at(std::size_t s, double tau) const {
    if (kept.empty()) return 0.0;
    std::size_t c = 0;
    for (const auto& r : ratios)
      if (r[s] <= tau) ++c;
    return static_cast<double>(c) / static_cast<double>(kept.size());
  }
};

/// costs[p][s] > 0, +inf for "did not solve". NaN marks a missing entry: with
/// cap_missing it counts as +inf, otherwise the whole problem row is dropped.
inline PerformanceProfile performance_profile(const std::vector<std::vector<double>>& costs, bool cap_missing) {
  PerformanceProfile out;
  if (costs.empty()) return out;
  const std::size_t S = costs.front().size();
  for (const auto& row : costs)
    if (row.size() != S) throw UsageError("performance_profile: ragged cost matrix");
  for (std::size_t p = 0; p < costs.size(); ++p) {
    std::vector<double> row = costs[p];
    bool missing = false;
    for (double& c : row) {
      if (std::isnan(c)) {
        missing = true;
        c = std::numeric_limits<double>::infinity();
      } else if (!(c > 0.0)) {
        throw UsageError("performance_profile: costs must be positive");
      }
    }
    const double best = *std::min_element(row.begin(), row.end());
    if ((missing && !cap_missing) || std::isinf(best)) {
      out.dropped.push_back(p);
      continue;
    }
    std::vector<double> r(S);
    for (std::size_t s = 0; s < S; ++s) r[s] = row[s] / best;
    out.kept.push_back(p);
    out.ratios.push_back(std::move(r));
  }
  std::set<double> bps;
  for (const auto& r : out.ratios)
    for (double v : r)
      if (std::isfinite(v)) bps.insert(v);
  out.taus.assign(bps.begin(), bps.end());
  out.rho.assign(S, {});
  for (std::size_t s = 0; s < S; ++s)
    for (double t : out.taus) out.rho[s].push_back(out.at(s, t));
  return out;
}

/// Per solver, the sorted relative gaps |f - f*| / max(1, |f*|) where f* is
/// the best value per problem across solvers. NaN entries (failed runs)
/// become +inf gaps.
struct GapDistribution {
  std::vector<std::vector<double>> gaps;  // [problem][solver]
  std::vector<std::vector<double>> sorted;  // [solver] ascending

  double cdf(std::size_t s, double g) const {
    const auto& v = sorted[s];
    if (v.empty()) return 0.0;
    const auto c = std::upper_bound(v.begin(), v.end(), g) - v.begin();
    return static_cast<double>(c) / static_cast<double>(v.size());
  }
};

inline double relative_gap(double f, double f_star) {
  if (std::isnan(f)) return std::numeric_limits<double>::infinity();
  return std::abs(f - f_star) / std::max(1.0, std::abs(f_star));
}

inline GapDistribution relative_gap_cdf(const std::vector<std::vector<double>>& f_values) {
  GapDistribution out;
  if (f_values.empty()) return out;
  const std::size_t S = f_values.front().size();
  out.sorted.assign(S, {});
  for (const auto& row : f_values) {
    if (row.size() != S) throw UsageError("relative_gap_cdf: ragged value matrix");
    double best = std::numeric_limits<double>::infinity();
    for (double v : row)
      if (!std::isnan(v)) best = std::min(best, v);
    std::vector<double> g(S);
    for (std::size_t s = 0; s < S; ++s) {
      g[s] = std::isfinite(best) ? relative_gap(row[s], best) : std::numeric_limits<double>::infinity();
      out.sorted[s].push_back(g[s]);
    }
    out.gaps.push_back(std::move(g));
  }
  for (auto& v : out.sorted) std::sort(v.begin(), v.end());
  return out;
}

// ---------------------------------------------------------------- records

inline std::string instance_id(const ProblemSpec& s) {
  return s.name + ":" + std::to_string(s.N) + ":" + std::to_string(s.m);
}

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {"problem", "algorithm", "seed",     "n",         "m",
                                                "f_star",  "T",         "N_it",     "n_f",       "n_g",
                                                "T_best",  "N_it_best", "n_f_best", "n_g_best", "stop_reason",
                                                "status"};
  return cols;
}

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw UsageError("bad number '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw UsageError("bad integer '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace detail

/// Comma-separated, header first, columns as in record_columns().
inline void write_records(std::ostream& os, const std::vector<RunRecord>& recs) {
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  using detail::fmt_double;
  for (const auto& r : recs) {
    os << r.problem << ',' << r.algorithm << ',' << r.seed << ',' << r.n << ',' << r.m << ',' << fmt_double(r.f_star)
       << ',' << fmt_double(r.T) << ',' << r.N_it << ',' << r.n_f << ',' << r.n_g << ',' << fmt_double(r.T_best)
       << ',' << r.N_it_best << ',' << r.n_f_best << ',' << r.n_g_best << ',' << to_string(r.stop_reason) << ','
       << (r.ok ? "ok" : "failed") << '\n';
  }
}

inline std::vector<RunRecord> read_records(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError("record file is empty");
  const auto header = detail::split(line, ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const auto& c : record_columns())
    if (!col.count(c)) throw UsageError("record file lacks column '" + c + "'");
  std::vector<RunRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != header.size()) throw UsageError("record file line " + std::to_string(lineno) + ": wrong arity");
    auto get = [&](const char* c) -> const std::string& { return f[col.at(c)]; };
    RunRecord r;
    r.problem = get("problem");
    r.algorithm = get("algorithm");
    r.seed = detail::parse_u64(get("seed"));
    r.n = static_cast<Eigen::Index>(detail::parse_u64(get("n")));
    r.m = static_cast<Eigen::Index>(detail::parse_u64(get("m")));
    r.f_star = detail::parse_double(get("f_star"));
    r.T = detail::parse_double(get("T"));
    r.N_it = detail::parse_u64(get("N_it"));
    r.n_f = detail::parse_u64(get("n_f"));
    r.n_g = detail::parse_u64(get("n_g"));
    r.T_best = detail::parse_double(get("T_best"));
    r.N_it_best = detail::parse_u64(get("N_it_best"));
    r.n_f_best = detail::parse_u64(get("n_f_best"));
    r.n_g_best = detail::parse_u64(get("n_g_best"));
    r.stop_reason = parse_stop_reason(get("stop_reason"));
    r.ok = get("status") == "ok";
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------- metrics

enum class Metric { T, Tbest, Nf, Nfbest, Nit, Nitbest, F };

inline Metric parse_metric(const std::string& s) {
  if (s == "T") return Metric::T;
  if (s == "Tbest") return Metric::Tbest;
  if (s == "Nf") return Metric::Nf;
  if (s == "Nfbest") return Metric::Nfbest;
  if (s == "Nit") return Metric::Nit;
  if (s == "Nitbest") return Metric::Nitbest;
  if (s == "f") return Metric::F;
  throw UsageError("unknown metric '" + s + "'");
}

/// Seed average per (problem, algorithm). Failed runs are excluded from the
/// means and counted.
struct AveragedRecord {
  std::string problem;
  std::string algorithm;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double f_star = std::numeric_limits<double>::quiet_NaN();
  double T = 0, N_it = 0, n_f = 0, n_g = 0;
  double T_best = 0, N_it_best = 0, n_f_best = 0, n_g_best = 0;
  double Nf = 0, Nf_best = 0;  // weighted
};

inline double metric_value(const AveragedRecord& a, Metric m) {
  switch (m) {
    case Metric::T: return a.T;
    case Metric::Tbest: return a.T_best;
    case Metric::Nf: return a.Nf;
    case Metric::Nfbest: return a.Nf_best;
    case Metric::Nit: return a.N_it;
    case Metric::Nitbest: return a.N_it_best;
    case Metric::F: return a.f_star;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Averages are accumulated in (seed, input position) order so that the
/// result does not depend on the order records arrive in.
inline std::vector<AveragedRecord> average_over_seeds(const std::vector<RunRecord>& recs, const WeightTable& w) {
  std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> groups;
  for (const auto& r : recs) groups[{r.problem, r.algorithm}].push_back(&r);
  std::vector<AveragedRecord> out;
  for (auto& [key, list] : groups) {
    std::stable_sort(list.begin(), list.end(), [](const RunRecord* a, const RunRecord* b) { return a->seed < b->seed; });
    AveragedRecord a;
    a.problem = key.first;
    a.algorithm = key.second;
    a.n = list.front()->n;
    a.m = list.front()->m;
    a.runs = list.size();
    std::size_t ok = 0;
    double f = 0;
    for (const RunRecord* r : list) {
      if (!r->ok) {
        ++a.failures;
        continue;
      }
      ++ok;
      f += r->f_star;
      a.T += r->T;
      a.N_it += static_cast<double>(r->N_it);
      a.n_f += static_cast<double>(r->n_f);
      a.n_g += static_cast<double>(r->n_g);
      a.T_best += r->T_best;
      a.N_it_best += static_cast<double>(r->N_it_best);
      a.n_f_best += static_cast<double>(r->n_f_best);
      a.n_g_best += static_cast<double>(r->n_g_best);
      a.Nf += weighted_evals(*r, w);
      a.Nf_best += weighted_evals_best(*r, w);
    }
    if (ok > 0) {
      const double k = static_cast<double>(ok);
      a.f_star = f / k;
      for (double* v : {&a.T, &a.N_it, &a.n_f, &a.n_g, &a.T_best, &a.N_it_best, &a.n_f_best, &a.n_g_best, &a.Nf,
                        &a.Nf_best})
        *v /= k;
    }
    out.push_back(std::move(a));
  }
  return out;
}

inline constexpr double kSameSolutionTol = 1e-6;

inline bool same_value(double a, double b, double tol = kSameSolutionTol) {
  if (std::isnan(a) || std::isnan(b)) return false;
  return std::abs(a - b) <= tol * std::max(1.0, std::min(std::abs(a), std::abs(b)));
}

/// Per problem: true when every algorithm in `among` has an averaged f
/// within tolerance of the best of them.
inline std::map<std::string, bool> same_solution_tags(const std::vector<AveragedRecord>& avg,
                                                      const std::vector<std::string>& among) {
  std::map<std::string, std::map<std::string, double>> fv;
  for (const auto& a : avg) fv[a.problem][a.algorithm] = a.f_star;
  std::map<std::string, bool> out;
  for (const auto& [p, byalg] : fv) {
    std::vector<double> vals;
    bool complete = true;
    for (const auto& alg : among) {
      auto it = byalg.find(alg);
      if (it == byalg.end()) {
        complete = false;
        break;
      }
      vals.push_back(it->second);
    }
    if (!complete || vals.empty()) {
      out[p] = false;
      continue;
    }
    const double best = *std::min_element(vals.begin(), vals.end());
    out[p] = std::all_of(vals.begin(), vals.end(), [&](double v) { return same_value(v, best); });
  }
  return out;
}

/// Matrix [problem][algorithm] of a metric. With cap_unsolved, entries whose
/// averaged f does not reach the best f across algorithms become +inf.
struct MetricMatrix {
  std::vector<std::string> problems;
  std::vector<std::string> algorithms;
  std::vector<std::vector<double>> values;
};

inline MetricMatrix metric_matrix(const std::vector<AveragedRecord>& avg, Metric metric, bool cap_unsolved) {
  MetricMatrix mm;
  std::set<std::string> ps, as;
  std::map<std::pair<std::string, std::string>, const AveragedRecord*> idx;
  for (const auto& a : avg) {
    ps.insert(a.problem);
    as.insert(a.algorithm);
    idx[{a.problem, a.algorithm}] = &a;
  }
  mm.problems.assign(ps.begin(), ps.end());
  mm.algorithms.assign(as.begin(), as.end());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : mm.problems) {
    std::vector<double> row, frow;
    for (const auto& alg : mm.algorithms) {
      auto it = idx.find({p, alg});
      const AveragedRecord* a = it == idx.end() ? nullptr : it->second;
      const bool usable = a && a->failures < a->runs;
      row.push_back(usable ? metric_value(*a, metric) : nan);
      frow.push_back(usable ? a->f_star : nan);
    }
    if (cap_unsolved && metric != Metric::F) {
      double best = std::numeric_limits<double>::infinity();
      for (double f : frow)
        if (!std::isnan(f)) best = std::min(best, f);
      for (std::size_t s = 0; s < row.size(); ++s)
        if (!std::isnan(frow[s]) && !same_value(frow[s], best)) row[s] = std::numeric_limits<double>::infinity();
    }
    mm.values.push_back(std::move(row));
  }
  return mm;
}

// ------------------------------------------------------------- run matrix

struct MatrixResult {
  std::vector<RunRecord> records;  // in job order: spec, algorithm, seed
  std::vector<AveragedRecord> averaged;
  std::map<std::string, bool> same_solution;
  std::size_t failures = 0;
};

/// Runs every (spec, algorithm, seed) with up to `workers` threads. Each run
/// owns its problem instance and evaluator; records keep job order.
inline MatrixResult run_matrix(const std::vector<ProblemSpec>& grid, const std::vector<Algorithm>& algorithms,
                               const std::vector<std::uint64_t>& seeds, const SolverConfig& cfg, unsigned workers,
                               const WeightTable& weights = WeightTable::defaults(),
                               const ProblemRegistry& registry = default_registry(),
                               std::function<void(const RunRecord&)> on_done = {}) {
  cfg.validate();
  struct Job {
    std::size_t spec, alg, seed;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (std::size_t a = 0; a < algorithms.size(); ++a)
      for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({p, a, s});

  MatrixResult out;
  out.records.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex cb_mutex;
  SolverConfig run_cfg = cfg;
  run_cfg.record_trace = false;

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const auto& job = jobs[j];
      const ProblemSpec& spec = grid[job.spec];
      RunRecord rec;
      try {
        const Problem prob = registry.make(spec);
        rec = run(prob, run_cfg, algorithms[job.alg], seeds[job.seed]);
      } catch (const std::exception& e) {
        rec.algorithm = to_string(algorithms[job.alg]);
        rec.seed = seeds[job.seed];
        rec.n = spec.N - spec.m;
        rec.m = spec.m;
        rec.ok = false;
        rec.error = e.what();
        rec.stop_reason = StopReason::Failed;
      }
      rec.problem = instance_id(spec);
      if (on_done) {
        std::lock_guard lock(cb_mutex);
        on_done(rec);
      }
      out.records[j] = std::move(rec);
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t + 1 < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& r : out.records)
    if (!r.ok) ++out.failures;
  out.averaged = average_over_seeds(out.records, weights);
  std::vector<std::string> names;
  for (auto a : algorithms) names.push_back(to_string(a));
  out.same_solution = same_solution_tags(out.averaged, names);
  return out;
}

// ------------------------------------------------------------- cost ratio

struct CostRatioRow {
  std::string problem;
  Eigen::Index n = 0;
  double min = 0, median = 0, max = 0;
};

struct CostRatioStudy {
  std::vector<CostRatioRow> per_problem;
  std::vector<CostRatioRow> per_size;  // problem field empty; min/median/max over all samples

  /// Weight table from the per-size maxima (clamped to at least 1).
  WeightTable weights() const {
    std::map<Eigen::Index, double> e;
    for (const auto& r : per_size) e[r.n] = std::max(1.0, r.max);
    return WeightTable(std::move(e));
  }
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace detail

/// Times T_g / T_f at n_points uniform random feasible points per problem and
/// size. Each oracle is repeated until a measurement lasts at least
/// `min_sample_seconds` so that small sizes are not dominated by timer noise.
inline CostRatioStudy cost_ratio_study(const std::vector<std::string>& names, const std::vector<ProblemSpec>& sizes,
                                       std::size_t n_points, std::uint64_t seed = 0,
                                       const ProblemRegistry& registry = default_registry(),
                                       double min_sample_seconds = 2e-5) {
  if (n_points < 1) throw UsageError("cost_ratio_study: n_points must be at least 1");
  using clk = std::chrono::steady_clock;
  CostRatioStudy out;
  std::map<Eigen::Index, std::vector<double>> by_n;
  volatile double sink = 0.0;
  for (const auto& size : sizes) {
    for (const auto& name : names) {
      const Problem prob = registry.make({name, size.N, size.m});
      const Box& box = prob.box();
      std::mt19937_64 rng(detail::splitmix64(seed ^ static_cast<std::uint64_t>(size.N * 131 + size.m)));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      auto time_reps = [&](auto&& call, int reps) {
        const auto t0 = clk::now();
        for (int r = 0; r < reps; ++r) call();
        return std::chrono::duration<double>(clk::now() - t0).count() / reps;
      };
      std::vector<double> ratios;
      for (std::size_t k = 0; k < n_points; ++k) {
        Vector x(box.n());
        for (Eigen::Index i = 0; i < box.n(); ++i) x[i] = box.lx()[i] + u(rng) * (box.ux()[i] - box.lx()[i]);
        IntVector z(box.m());
        for (Eigen::Index i = 0; i < box.m(); ++i) {
          std::uniform_int_distribution<std::int64_t> d(box.lz()[i], box.uz()[i]);
          z[i] = d(rng);
        }
        auto call_f = [&] { sink = sink + prob.objective(x, z); };
        auto call_g = [&] { sink = sink + prob.gradient(x, z)[0]; };
        int reps = 1;
        while (time_reps(call_f, reps) * reps < min_sample_seconds && reps < (1 << 20)) reps *= 2;
        const double tf = time_reps(call_f, reps);
        const double tg = time_reps(call_g, reps);
        ratios.push_back(tg / std::max(tf, 1e-12));
      }
      const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
      out.per_problem.push_back({name, box.n(), *mn, detail::median_of(ratios), *mx});
      auto& all = by_n[box.n()];
      all.insert(all.end(), ratios.begin(), ratios.end());
    }
  }
  for (const auto& [n, v] : by_n) {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    out.per_size.push_back({"", n, *mn, detail::median_of(v), *mx});
  }
  return out;
}

}  // namespace gdfl
