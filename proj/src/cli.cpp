// Copyright 2026 The DiAL Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dial/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dial/active_loop.hpp"
#include "dial/error.hpp"
#include "dial/kernels.hpp"
#include "dial/theory.hpp"

namespace dial {

std::string version_string() { return "dial-lab 0.1.0 (built " __DATE__ ")"; }

namespace {

namespace fs = std::filesystem;

std::vector<Acquisition> parse_acquisition_list(const std::string& text) {
  std::vector<Acquisition> out;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (!name.empty()) out.push_back(parse_acquisition(name));
  }
  if (out.empty()) throw ConfigError("empty acquisition list");
  return out;
}

std::ofstream open_output(const fs::path& dir, const std::string& file) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "'");
  std::ofstream out(dir / file);
  if (!out) throw ConfigError("cannot write '" + (dir / file).string() + "'");
  return out;
}

// Writes to the named file, or to the fallback stream when the name is empty.
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write(out);
}

struct RunArgs {
  std::string config;
  std::optional<int> budget;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string acquisitions;
  std::string out = "results";
};

struct BenchArgs {
  std::vector<int> sizes{1000, 2000, 4000};
  std::string acquisitions = "dirvar,unc-sm,vopt,vopt-lowrank,sigmaopt,sigmaopt-lowrank";
  int repetitions = 5;
  int rank = 50;
  std::string out = "results";
};

struct TheoryArgs {
  std::string schedule = "constant";
  double t_end = 1e10;
  int steps_per_decade = 400;
  int grid = 401;
  double lambda0 = 5.0;
  double gamma = 0.1;
  int k = 2;
  std::optional<double> alpha0;  // default 1 / K^2
  double eps = 0.0;
  double zeta = 1.0;
  double delta = 0.0;
  double lambda = 50.0;
  std::optional<double> w_min;  // default 1 / K
  int trials = 10000;
  int points = 200;
  std::uint64_t seed = 0;
  std::vector<int> sizes{100, 1000, 10000};
  std::string out;
};

int run_command(const RunArgs& a, std::ostream& out) {
  ExperimentConfig config = load_config(a.config);
  if (a.budget) config.budget = *a.budget;
  if (a.seed) config.seed = *a.seed;
  if (a.trials) config.trials = *a.trials;
  if (!a.acquisitions.empty()) config.acquisitions = parse_acquisition_list(a.acquisitions);
  config.validate();
  auto problem = prepare_problem(config);
  out << "n=" << problem->data.size() << " classes=" << problem->num_classes
      << " clusters=" << problem->num_clusters << " alpha0=" << problem->alpha0 << '\n';
  const auto results = run_experiment(*problem, config);
  auto curves = open_output(a.out, "curves.csv");
  write_curves(results, curves);
  auto queries = open_output(a.out, "queries.csv");
  write_queries(results, queries);
  for (const auto& r : results) {
    const CurvePoint& last = r.curve.back();
    out << acquisition_name(r.acquisition) << ": final accuracy " << last.mean_acc << " +- "
        << last.std_acc << ", coverage " << last.mean_coverage << '\n';
  }
  out << "wrote " << (fs::path(a.out) / "curves.csv").string() << " and "
      << (fs::path(a.out) / "queries.csv").string() << '\n';
  return kExitOk;
}

int bench_command(const BenchArgs& a, std::ostream& out) {
  TimingOptions options;
  options.repetitions = a.repetitions;
  options.rank = a.rank;
  auto sorted = a.sizes;
  std::sort(sorted.begin(), sorted.end());
  const auto rows = timing_benchmark(sorted, parse_acquisition_list(a.acquisitions), options);
  auto file = open_output(a.out, "timing.csv");
  write_timing(rows, file);
  write_timing(rows, out);
  return kExitOk;
}

int graph_report_command(const std::string& config_path, const std::string& edges,
                         std::ostream& out) {
  const ExperimentConfig config = load_config(config_path);
  auto problem = prepare_problem(config);
  const SimilarityGraph& g = *problem->graph;
  const ConnectivityReport conn = connectivity(g);
  const auto& deg = g.degrees();
  out << "nodes " << g.size() << "\nedges " << g.col_indices().size() / 2 << "\ncomponents "
      << conn.num_components << "\ndegree min " << deg.minCoeff() << " mean " << deg.mean()
      << " max " << deg.maxCoeff() << "\nalpha0 " << problem->alpha0 << '\n';
  if (config.propagation.kind == PropagationKind::kPoisson) {
    const PropagationColumn& col = problem->cache->get(0);
    out << "poisson column 0: cg iterations " << col.solver.iterations << ", residual "
        << col.solver.relative_residual << ", raw peak " << col.raw_peak << '\n';
  }
  if (!edges.empty()) {
    emit(edges, out, [&](std::ostream& o) { write_edge_list(g, o); });
  }
  return kExitOk;
}

int theory_ode(const TheoryArgs& a, std::ostream& out) {
  const theory::Mixture1D mixture = theory::default_mixture();
  const auto grid = theory::uniform_grid(mixture.lower, mixture.upper, a.grid);
  theory::OdeOptions options;
  options.t_end = a.t_end;
  options.steps_per_decade = a.steps_per_decade;
  const auto r =
      theory::evolve_alpha(mixture, grid, theory::LambdaSchedule::parse(a.schedule), options);
  emit(a.out, out, [&](std::ostream& o) {
    o << "x,G,q";
    for (Eigen::Index k = 0; k < r.eta.cols(); ++k) o << ",eta_" << k;
    for (const auto& s : r.snapshots) o << ",q_t1e" << std::lround(std::log10(s.t));
    o << '\n';
    o.precision(12);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      o << grid[i] << ',' << r.uncertainty[i] << ',' << r.q[i];
      for (Eigen::Index k = 0; k < r.eta.cols(); ++k) o << ',' << r.eta(i, k);
      for (const auto& s : r.snapshots) o << ',' << s.q[i];
      o << '\n';
    }
  });
  return kExitOk;
}

int theory_qbar(const TheoryArgs& a, std::ostream& out, std::ostream& err) {
  const theory::Mixture1D mixture = theory::default_mixture();
  const auto grid = theory::uniform_grid(mixture.lower, mixture.upper, a.grid);
  const Eigen::VectorXd g = theory::population_uncertainty(theory::eval_eta(mixture, grid));
  const auto r = theory::fixed_point_qbar(a.lambda0, grid, g, a.gamma);
  err << "fixed point residual " << r.residual << " after " << r.iterations << " iterations\n";
  if (!r.converged) {
    throw ConvergenceError("fixed point did not converge; retry with a smaller --gamma",
                           r.residual);
  }
  emit(a.out, out, [&](std::ostream& o) {
    o << "x,G,qbar\n";
    o.precision(12);
    for (std::size_t i = 0; i < grid.size(); ++i) o << grid[i] << ',' << g[i] << ',' << r.q[i] << '\n';
  });
  return kExitOk;
}

double default_alpha0(const TheoryArgs& a) { return a.alpha0.value_or(1.0 / (a.k * a.k)); }
double default_wmin(const TheoryArgs& a) { return a.w_min.value_or(1.0 / a.k); }

int theory_bound(const TheoryArgs& a, std::ostream& out) {
  const auto r = theory::exploration_bound(default_alpha0(a), a.eps, a.zeta, a.delta, a.k,
                                           a.lambda, default_wmin(a));
  out.precision(12);
  out << "C = " << r.c << "\nprobability_lower_bound = " << r.probability << '\n';
  return kExitOk;
}

int theory_discovery(const TheoryArgs& a, std::ostream& out) {
  const std::vector<double> weights(static_cast<std::size_t>(a.k), 1.0 / a.k);
  theory::DiscoveryOptions options;
  options.trials = a.trials;
  options.points_per_cluster = a.points;
  options.seed = a.seed;
  const double alpha0 = default_alpha0(a);
  const auto r =
      theory::monte_carlo_discovery(a.delta, a.zeta, a.eps, alpha0, a.lambda, weights, options);
  const auto b = theory::exploration_bound(alpha0, a.eps, a.zeta, a.delta, a.k, a.lambda, 1.0 / a.k);
  out.precision(12);
  out << "frequency,standard_error,trials,bound\n"
      << r.frequency << ',' << r.standard_error << ',' << r.trials << ',' << b.probability << '\n';
  return kExitOk;
}

int theory_consistency(const TheoryArgs& a, std::ostream& out) {
  theory::ConsistencyOptions options;
  options.trials = a.trials;
  options.seed = a.seed;
  auto sorted = a.sizes;
  std::sort(sorted.begin(), sorted.end());
  const auto rows = theory::empirical_consistency(theory::default_mixture(), sorted, options);
  emit(a.out, out, [&](std::ostream& o) {
    o << "n,bandwidth,mean_l1_error,std_l1_error\n";
    o.precision(10);
    for (const auto& r : rows) {
      o << r.n << ',' << r.bandwidth << ',' << r.mean_error << ',' << r.std_error << '\n';
    }
  });
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-based Dirichlet active learning lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0 = hardware count)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run an active-learning experiment");
  run_cmd->add_option("config", run.config, "experiment config (INI)")->required();
  run_cmd->add_option("--budget", run.budget, "query budget override");
  run_cmd->add_option("--seed", run.seed, "base seed override");
  run_cmd->add_option("--trials", run.trials, "trial count override");
  run_cmd->add_option("--acquisitions", run.acquisitions, "comma-separated acquisition names");
  run_cmd->add_option("--out", run.out, "output directory");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench-timing", "time one pool scoring pass per acquisition");
  bench_cmd->add_option("--sizes", bench.sizes, "graph sizes")->delimiter(',');
  bench_cmd->add_option("--acquisitions", bench.acquisitions, "comma-separated acquisition names");
  bench_cmd->add_option("--reps", bench.repetitions, "repetitions per median")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--rank", bench.rank, "low-rank eigenpair count")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench.out, "output directory");

  std::string report_config;
  std::string report_edges;
  auto* report_cmd = app.add_subcommand("graph-report", "build the graph and print diagnostics");
  report_cmd->add_option("config", report_config, "experiment config (INI)")->required();
  report_cmd->add_option("--edges", report_edges, "write the edge list CSV here");

  TheoryArgs th;
  auto* theory_cmd = app.add_subcommand("theory", "numerical checks of the exploration analysis");
  theory_cmd->require_subcommand(1);
  auto* ode = theory_cmd->add_subcommand("ode", "integrate the Dirac-kernel sampling ODE");
  ode->add_option("--schedule", th.schedule, "constant[:v] | power:p | linear:l0");
  ode->add_option("--t-end", th.t_end, "final time");
  ode->add_option("--steps-per-decade", th.steps_per_decade, "log-time steps per decade");
  ode->add_option("--grid", th.grid, "grid points");
  ode->add_option("--out", th.out, "CSV path (default stdout)");
  auto* qbar = theory_cmd->add_subcommand("qbar", "solve the steady-state fixed point");
  qbar->add_option("--lambda0", th.lambda0, "slope of lambda(t) = lambda0 t")->required();
  qbar->add_option("--gamma", th.gamma, "damping");
  qbar->add_option("--grid", th.grid, "grid points");
  qbar->add_option("--out", th.out, "CSV path (default stdout)");
  auto* bound = theory_cmd->add_subcommand("explore-bound", "exploration constant and bound");
  auto* mc = theory_cmd->add_subcommand("mc-discovery", "Monte-Carlo K-step discovery frequency");
  for (auto* sub : {bound, mc}) {
    sub->add_option("--k", th.k, "number of classes")->check(CLI::PositiveNumber);
    sub->add_option("--alpha0", th.alpha0, "prior strength (default 1/K^2)");
    sub->add_option("--eps", th.eps, "cross-class kernel bound");
    sub->add_option("--zeta", th.zeta, "within-class kernel bound");
    sub->add_option("--delta", th.delta, "background share");
    sub->add_option("--lambda", th.lambda, "sampling temperature");
  }
  bound->add_option("--wmin", th.w_min, "smallest class weight (default 1/K)");
  mc->add_option("--trials", th.trials, "Monte-Carlo trials");
  mc->add_option("--points", th.points, "point masses per cluster");
  mc->add_option("--seed", th.seed, "rng seed");
  auto* cons = theory_cmd->add_subcommand("consistency", "L1 error of the kernel trend estimate");
  cons->add_option("--sizes", th.sizes, "sample sizes")->delimiter(',');
  cons->add_option("--trials", th.trials, "trials per size");
  cons->add_option("--seed", th.seed, "rng seed");
  cons->add_option("--out", th.out, "CSV path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitConfig;
  }
  if (threads > 0) set_thread_limit(threads);

  try {
    if (run_cmd->parsed()) return run_command(run, out);
    if (bench_cmd->parsed()) return bench_command(bench, out);
    if (report_cmd->parsed()) return graph_report_command(report_config, report_edges, out);
    if (ode->parsed()) return theory_ode(th, out);
    if (qbar->parsed()) return theory_qbar(th, out, err);
    if (bound->parsed()) return theory_bound(th, out);
    if (mc->parsed()) return theory_discovery(th, out);
    if (cons->parsed()) {
      if (cons->count("--trials") == 0) th.trials = 20;
      return theory_consistency(th, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitConfig;
}

}  // namespace dial
