// gdfl: command-line front end (solve, bench, profile, cost-ratio).

#include "gdfl/gdfl.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

namespace {

using namespace gdfl;

struct SolverFlags {
  std::string engine = "lbfgsb";
  double budget_seconds = 10.0;
  double budget_evals = 0.0;
  std::uint64_t max_iterations = 0;
  int max_dirs = 300;
  double xi0 = 1.0, eta = 0.5, gamma = 1e-4, delta = 0.5, eps_stat = 1e-7;
  int p_steps = 0;

  void add(CLI::App* app) {
    app->add_option("--engine", engine, "Continuous direction engine")->check(CLI::IsMember({"lbfgsb", "pg", "fw"}));
    app->add_option("--budget-seconds", budget_seconds, "Wall-clock budget per run (0: none)");
    app->add_option("--budget-evals", budget_evals, "Budget on n_f + n_g (0: none)");
    app->add_option("--max-iterations", max_iterations, "Iteration cap (0: none)");
    app->add_option("--max-dirs", max_dirs, "Cap on stored discrete directions");
    app->add_option("--xi0", xi0, "Initial discrete sufficient decrease");
    app->add_option("--eta", eta, "Reduction factor for xi and the continuous stepsize");
    app->add_option("--gamma", gamma, "Sufficient-decrease constant");
    app->add_option("--delta", delta, "Backtracking / expansion factor");
    app->add_option("--eps-stat", eps_stat, "Continuous stationarity tolerance");
    app->add_option("--p-steps", p_steps, "Continuous steps per iteration in gdfl+ (0: ceil(N/10))");
  }

  SolverConfig config() const {
    SolverConfig c;
    c.engine = parse_engine(engine);
    if (budget_seconds > 0) c.budget_seconds = budget_seconds;
    if (budget_evals > 0) c.budget_evals = budget_evals;
    if (max_iterations > 0) c.max_iterations = max_iterations;
    c.max_discrete_dirs = max_dirs;
    c.xi0 = xi0;
    c.eta = eta;
    c.gamma = gamma;
    c.delta = delta;
    c.eps_stat = eps_stat;
    if (p_steps > 0) c.p_steps = p_steps;
    c.validate();
    if (!c.budget_seconds && !c.budget_evals && !c.max_iterations)
      std::cerr << "warning: no budget set; the run stops only on convergence\n";
    return c;
  }
};

std::ostream& open_out(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
  if (path.empty() || path == "-") return std::cout;
  holder = std::make_unique<std::ofstream>(path);
  if (!*holder) throw UsageError("cannot open '" + path + "' for writing");
  return *holder;
}

std::vector<ProblemSpec> read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open grid file '" + path + "'");
  std::vector<ProblemSpec> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    ProblemSpec s;
    if (!(is >> s.name >> s.N >> s.m)) {
      if (out.empty() && line.rfind("name", 0) == 0) continue;  // header
      throw UsageError("grid file: cannot parse '" + line + "'");
    }
    out.push_back(s);
  }
  return out;
}

WeightTable read_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open weight file '" + path + "'");
  std::map<Eigen::Index, double> e;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("n,", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    Eigen::Index n;
    double w;
    if (!(is >> n >> w)) throw UsageError("weight file: cannot parse '" + line + "'");
    e[n] = w;
  }
  return WeightTable(std::move(e));
}

int cmd_solve(const std::string& problem, Eigen::Index N, Eigen::Index m, const std::string& algo,
              std::uint64_t seed, const SolverFlags& flags, const std::string& trace_path, bool show_point) {
  const Problem prob = make_problem({problem, N, m});
  SolverConfig cfg = flags.config();
  cfg.record_trace = !trace_path.empty();
  const RunRecord rec = run(prob, cfg, parse_algorithm(algo), seed);
  write_records(std::cout, {rec});
  if (!trace_path.empty()) {
    std::ofstream tf(trace_path);
    if (!tf) throw UsageError("cannot open trace file '" + trace_path + "'");
    write_trace(tf, rec.trace);
  }
  if (show_point) std::cout << "# x* = " << format_point(rec.x_star.x, rec.x_star.z) << '\n';
  if (!rec.ok) {
    std::cerr << "run failed: " << rec.error << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-integer bound-constrained local search (G-DFL / DFNDFL)"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "Run one algorithm on one problem instance");
  std::string problem, algo = "gdfl+", trace;
  Eigen::Index N = 100, m = 2;
  std::uint64_t seed = 0;
  bool show_point = false;
  SolverFlags sflags;
  solve->add_option("--problem", problem, "Problem name")->required();
  solve->add_option("--n", N, "Total number of variables N (continuous + integer)");
  solve->add_option("--m", m, "Number of integer variables (the last m)");
  solve->add_option("--algo", algo, "Algorithm")->check(CLI::IsMember({"gdfl", "gdfl+", "dfndfl", "dfndfl-c"}));
  solve->add_option("--seed", seed, "Seed (starting point and direction sequences)");
  solve->add_option("--trace", trace, "Write per-iteration JSON lines to this path");
  solve->add_flag("--show-point", show_point, "Print the best point found");
  sflags.add(solve);

  // bench
  auto* bench = app.add_subcommand("bench", "Run a problem x algorithm x seed matrix");
  std::string grid = "table1", out_path, avg_path, bench_algos = "gdfl+,dfndfl";
  std::vector<std::string> only;
  unsigned seeds = 5, workers = std::max(1u, std::thread::hardware_concurrency());
  Eigen::Index max_N = 0;
  SolverFlags bflags;
  bflags.budget_seconds = 120.0;
  bench->add_option("--grid", grid, "'table1' or a file of 'name,N,m' lines");
  bench->add_option("--problems", only, "Restrict to these problem names")->delimiter(',');
  bench->add_option("--max-N", max_N, "Skip instances with more than this many variables");
  bench->add_option("--algos", bench_algos, "Comma-separated algorithms");
  bench->add_option("--seeds", seeds, "Seeds 0..k-1");
  bench->add_option("--workers", workers, "Concurrent runs");
  bench->add_option("--out", out_path, "Raw record file (default stdout)");
  bench->add_option("--averaged", avg_path, "Seed-averaged table");
  bflags.add(bench);

  // profile
  auto* prof = app.add_subcommand("profile", "Performance profiles / relative-gap CDFs from record files");
  std::vector<std::string> rec_files;
  std::string metric = "Nfbest", weights_path, prof_out;
  bool cap_missing = false, same_only = false;
  prof->add_option("records", rec_files, "Record files")->required();
  prof->add_option("--metric", metric, "Cost metric")
      ->check(CLI::IsMember({"T", "Tbest", "Nf", "Nfbest", "Nit", "Nitbest", "f"}));
  prof->add_flag("--cap-missing", cap_missing,
                 "Failed runs and runs not reaching the best f get infinite cost instead of dropping the problem");
  prof->add_flag("--same-solution", same_only, "Keep only problems where all algorithms reached the same f");
  prof->add_option("--weights", weights_path, "Weight table file ('n,w' lines) for Nf metrics");
  prof->add_option("--out", prof_out, "Output path (default stdout)");

  // cost-ratio
  auto* cr = app.add_subcommand("cost-ratio", "Measure T_g / T_f and emit a weight table");
  std::vector<std::string> cr_problems;
  std::vector<Eigen::Index> cr_sizes = {100, 200, 500, 1000, 2000, 5000};
  Eigen::Index cr_m = 5;
  std::size_t cr_points = 500;
  std::string cr_out, cr_weights;
  cr->add_option("--problems", cr_problems, "Problem names (default: all registered)")->delimiter(',');
  cr->add_option("--sizes", cr_sizes, "Total sizes N")->delimiter(',');
  cr->add_option("--m", cr_m, "Integer variables per instance");
  cr->add_option("--points", cr_points, "Random feasible points per problem and size");
  cr->add_option("--seed", seed, "Sampling seed");
  cr->add_option("--out", cr_out, "Per-problem table (default stdout)");
  cr->add_option("--weights-out", cr_weights, "Write the derived weight table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*solve) return cmd_solve(problem, N, m, algo, seed, sflags, trace, show_point);

    if (*bench) {
      std::vector<ProblemSpec> specs;
      if (grid == "table1") {
        const Grid g = config_grid();
        for (const auto& name : g.missing) std::cerr << "warning: problem '" << name << "' is not registered\n";
        specs = g.specs;
      } else {
        specs = read_grid_file(grid);
      }
      if (!only.empty())
        std::erase_if(specs, [&](const ProblemSpec& s) { return std::find(only.begin(), only.end(), s.name) == only.end(); });
      if (max_N > 0) std::erase_if(specs, [&](const ProblemSpec& s) { return s.N > max_N; });
      std::vector<Algorithm> algs;
      std::istringstream as(bench_algos);
      for (std::string a; std::getline(as, a, ',');) algs.push_back(parse_algorithm(a));
      std::vector<std::uint64_t> seed_list;
      for (unsigned s = 0; s < seeds; ++s) seed_list.push_back(s);
      std::size_t done = 0;
      const std::size_t total = specs.size() * algs.size() * seed_list.size();
      const MatrixResult res =
          run_matrix(specs, algs, seed_list, bflags.config(), workers, WeightTable::defaults(), default_registry(),
                     [&](const RunRecord& r) {
                       std::cerr << "[" << ++done << "/" << total << "] " << r.problem << ' ' << r.algorithm
                                 << " seed " << r.seed << ": f* = " << r.f_star << " (" << to_string(r.stop_reason)
                                 << ")\n";
                     });
      std::unique_ptr<std::ofstream> h;
      write_records(open_out(out_path, h), res.records);
      if (!avg_path.empty()) {
        std::ofstream af(avg_path);
        if (!af) throw UsageError("cannot open '" + avg_path + "'");
        af << "problem,algorithm,n,m,runs,failures,f_star,T,N_it,n_f,n_g,T_best,N_it_best,n_f_best,n_g_best,Nf,"
              "Nf_best,same_solution\n";
        for (const auto& a : res.averaged)
          af << a.problem << ',' << a.algorithm << ',' << a.n << ',' << a.m << ',' << a.runs << ',' << a.failures
             << ',' << detail::fmt_double(a.f_star) << ',' << a.T << ',' << a.N_it << ',' << a.n_f << ',' << a.n_g
             << ',' << a.T_best << ',' << a.N_it_best << ',' << a.n_f_best << ',' << a.n_g_best << ',' << a.Nf << ','
             << a.Nf_best << ',' << (res.same_solution.at(a.problem) ? 1 : 0) << '\n';
      }
      return res.failures > 0 ? 2 : 0;
    }

    if (*prof) {
      std::vector<RunRecord> recs;
      for (const auto& path : rec_files) {
        std::ifstream in(path);
        if (!in) throw UsageError("cannot open record file '" + path + "'");
        auto part = read_records(in);
        recs.insert(recs.end(), part.begin(), part.end());
      }
      const WeightTable w = weights_path.empty() ? WeightTable::defaults() : read_weights(weights_path);
      auto avg = average_over_seeds(recs, w);
      if (same_only) {
        std::set<std::string> algs;
        for (const auto& a : avg) algs.insert(a.algorithm);
        const auto tags = same_solution_tags(avg, {algs.begin(), algs.end()});
        std::erase_if(avg, [&](const AveragedRecord& a) { return !tags.at(a.problem); });
      }
      const Metric mt = parse_metric(metric);
      const MetricMatrix mm = metric_matrix(avg, mt, cap_missing);
      std::unique_ptr<std::ofstream> h;
      std::ostream& os = open_out(prof_out, h);
      if (mt == Metric::F) {
        const GapDistribution gd = relative_gap_cdf(mm.values);
        os << "algorithm,gap,fraction\n";
        for (std::size_t s = 0; s < mm.algorithms.size(); ++s)
          for (std::size_t i = 0; i < gd.sorted[s].size(); ++i)
            os << mm.algorithms[s] << ',' << detail::fmt_double(gd.sorted[s][i]) << ','
               << gd.cdf(s, gd.sorted[s][i]) << '\n';
      } else {
        const PerformanceProfile pp = performance_profile(mm.values, cap_missing);
        for (auto p : pp.dropped) std::cerr << "warning: dropped problem '" << mm.problems[p] << "'\n";
        os << "algorithm,tau,rho\n";
        for (std::size_t s = 0; s < mm.algorithms.size(); ++s)
          for (std::size_t j = 0; j < pp.taus.size(); ++j)
            os << mm.algorithms[s] << ',' << detail::fmt_double(pp.taus[j]) << ',' << pp.rho[s][j] << '\n';
      }
      return 0;
    }

    if (*cr) {
      if (cr_problems.empty()) cr_problems = default_registry().names();
      std::vector<ProblemSpec> sizes;
      for (auto n : cr_sizes) sizes.push_back({"", n, cr_m});
      const CostRatioStudy st = cost_ratio_study(cr_problems, sizes, cr_points, seed);
      std::unique_ptr<std::ofstream> h;
      std::ostream& os = open_out(cr_out, h);
      os << "problem,n,min,median,max\n";
      for (const auto& r : st.per_problem)
        os << r.problem << ',' << r.n << ',' << r.min << ',' << r.median << ',' << r.max << '\n';
      for (const auto& r : st.per_size) os << "*," << r.n << ',' << r.min << ',' << r.median << ',' << r.max << '\n';
      if (!cr_weights.empty()) {
        std::ofstream wf(cr_weights);
        if (!wf) throw UsageError("cannot open '" + cr_weights + "'");
        wf << "n,w\n";
        const WeightTable w = st.weights();
        for (const auto& [n, wv] : w.entries()) wf << n << ',' << wv << '\n';
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
