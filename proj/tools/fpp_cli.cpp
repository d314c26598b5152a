#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpp/config.hpp"
#include "fpp/ctbp.hpp"
#include "fpp/errors.hpp"
#include "fpp/explore.hpp"
#include "fpp/graph.hpp"
#include "fpp/montecarlo.hpp"
#include "fpp/oracle.hpp"
#include "fpp/stats.hpp"

namespace fs = std::filesystem;
using namespace fpp;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerification = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

// Flags shared by the subcommands that build a model. Unset flags leave the
// config file (or the defaults) untouched.
struct ModelFlags {
  std::string config;
  std::string graph;
  std::string degrees;
  std::string weights;
  std::string rank1_weights;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_model_flags(CLI::App* app, ModelFlags& f, bool with_threads) {
  app->add_option("--config", f.config, "Experiment config file (INI: [graph] [weights] [run] [thresholds])");
  app->add_option("--graph", f.graph, "Graph kind: cm | simple | nr | grg | cl");
  app->add_option("--degrees", f.degrees, "Degree model: regular:R | det:k=p,... | iid:k=p,... | det:@file | iid:@file");
  app->add_option("--weights", f.weights,
                  "Edge weight law: exp:1 | shifted-exp:K | power:S | uniform:A | table:PATH");
  app->add_option("--rank1-weights", f.rank1_weights, "Vertex weight law of rank-1 graphs (nr, grg, cl)");
  app->add_option("--seed", f.seed, "Master seed (unsigned 64-bit)");
  if (with_threads) app->add_option("--threads", f.threads, "Worker threads; 0 = logical cores (speed only)");
}

// Precedence: built-in defaults < config file < flags.
ExperimentConfig resolve(const ModelFlags& f, bool require_weights = true) {
  ExperimentConfig c;
  if (!f.config.empty()) c = ExperimentConfig::load(f.config);
  if (!f.graph.empty()) c.graph_kind = parse_graph_kind(f.graph);
  if (!f.degrees.empty()) c.degrees = DegreeModel::parse(f.degrees);
  if (!f.weights.empty()) c.weights_text = f.weights;
  if (!f.rank1_weights.empty()) c.rank1_weights_text = f.rank1_weights;
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (require_weights && c.weights_text.empty()) throw ConfigError("missing required field weights.dist (--weights)");
  c.validate();
  return c;
}

Experiment build_experiment(const ExperimentConfig& c) { return Experiment::from_config(c); }

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// -- constants ---------------------------------------------------------------

int cmd_constants(const ModelFlags& f, bool json) {
  const ExperimentConfig c = resolve(f);
  const Experiment exp = build_experiment(c);
  if (json) {
    std::cout << constants_json(exp.limit) << '\n';
  } else {
    std::cout << "degree law " << exp.degree_law.describe() << ", weights " << exp.weights.describe() << '\n';
    write_constants_text(std::cout, exp.limit);
  }
  return kExitPass;
}

// -- run ---------------------------------------------------------------------

void write_ecdf_pair(const fs::path& path, std::vector<double> sample, const std::function<double(double)>& ref) {
  std::sort(sample.begin(), sample.end());
  std::ofstream out(path);
  out << std::setprecision(10) << "# x empirical_cdf reference_cdf\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out << sample[i] << ' ' << static_cast<double>(i + 1) / static_cast<double>(sample.size()) << ' '
        << ref(sample[i]) << '\n';
  }
}

void write_plot_data(const ExperimentRun& run, const fs::path& dir) {
  const Thresholds& th = run.experiment.thresholds;
  for (const auto& rung : run.rungs) {
    std::vector<double> z;
    for (const TrialOutcome& o : rung) {
      if (o.connected) z.push_back(o.z_hat);
    }
    if (!z.empty()) {
      write_ecdf_pair(dir / ("plot_hopcount_n" + std::to_string(rung.front().n) + ".txt"), z, normal_cdf);
    }
  }
  const auto& last = run.rungs.back();
  if (!run.q_reference.empty()) {
    std::vector<double> ref = run.q_reference[0];
    std::sort(ref.begin(), ref.end());
    const auto ref_cdf = [&](double x) {
      return static_cast<double>(std::upper_bound(ref.begin(), ref.end(), x) - ref.begin()) /
             static_cast<double>(ref.size());
    };
    std::vector<double> q;
    for (const TrialOutcome& o : last) {
      if (o.connected) q.push_back(o.q_hat);
    }
    write_ecdf_pair(dir / "plot_weight.txt", q, ref_cdf);
  }
  std::vector<double> times;
  for (const TrialOutcome& o : last) {
    for (const StandardMark& m : o.marks) times.push_back(m.t_bar);
  }
  if (!times.empty()) {
    std::vector<std::size_t> counts(th.rate_bins, 0);
    const double width = (th.window_hi - th.window_lo) / static_cast<double>(th.rate_bins);
    for (double t : times) {
      if (t < th.window_lo || t >= th.window_hi) continue;
      counts[std::min(th.rate_bins - 1, static_cast<std::size_t>((t - th.window_lo) / width))]++;
    }
    std::ofstream out(dir / "plot_rate.txt");
    out << std::setprecision(10) << "# t_bar_bin_center log_rate_per_trial\n";
    for (std::size_t b = 0; b < counts.size(); ++b) {
      if (counts[b] == 0) continue;
      const double rate = static_cast<double>(counts[b]) / (width * static_cast<double>(last.size()));
      out << th.window_lo + (static_cast<double>(b) + 0.5) * width << ' ' << std::log(rate) << '\n';
    }
  }
}

struct RunFlags {
  std::string out;
  std::string n_ladder;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> ranked;
  std::optional<std::size_t> meta_runs;
  bool plots = false;
  std::string log;
};

int cmd_run(const ModelFlags& f, const RunFlags& r) {
  if (f.config.empty()) throw ConfigError("run needs --config");
  ExperimentConfig c = resolve(f, false);
  if (!r.out.empty()) c.out_dir = r.out;
  if (!r.n_ladder.empty()) c.n_ladder = parse_size_list(r.n_ladder);
  if (r.trials) c.trials = *r.trials;
  if (r.ranked) c.ranked = *r.ranked;
  if (r.meta_runs) c.meta_runs = *r.meta_runs;
  c.validate();

  const fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::ofstream csv(dir / "outcomes.csv");
  if (!csv) throw Error("cannot write to output directory '" + dir.string() + "'");

  const auto start = std::chrono::steady_clock::now();
  const std::string started = timestamp();
  const ExperimentRun run = run_experiment(c, &csv, &std::cerr);
  csv.close();
  std::ofstream(dir / "report.json") << run.report.to_json();
  const std::string text = run.report.to_text();
  std::ofstream(dir / "report.txt") << text;
  if (r.plots) write_plot_data(run, dir);
  std::cout << text;

  if (!r.log.empty()) {
    std::ofstream log(r.log, std::ios::app);
    log << "started " << started << "\nfinished " << timestamp() << "\nwall_seconds "
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << '\n';
    for (const auto& e : run.report.entries) log << "verifier " << e.name << " seconds " << e.runtime_s << '\n';
  }
  return run.report.all_pass() ? kExitPass : kExitVerification;
}

// -- oracle ------------------------------------------------------------------

int cmd_oracle(std::size_t count, std::uint64_t seed, bool fault, bool verbose, std::optional<std::size_t> n) {
  const std::size_t n_min = n ? *n : 10;
  const std::size_t n_max = n ? *n : 200;
  const OracleSummary s = run_oracle(count, seed, fault, &std::cout, verbose, n_min, n_max);
  std::cout << (s.pass() ? "PASS" : "FAIL") << " oracle: " << s.instances << " instances, " << s.mismatches
            << " mismatches, max relative weight error " << s.max_relative_error << '\n';
  return s.pass() ? kExitPass : kExitVerification;
}

// -- gen-graph ---------------------------------------------------------------

WeightedGraph generate(const Experiment& exp, std::size_t n, Rng& rng) {
  WeightedGraph g;
  switch (exp.kind) {
    case GraphKind::cm: g = pair_configuration(exp.degrees->realize(n, rng), rng); break;
    case GraphKind::simple:
      g = sample_uniform_simple(exp.degrees->realize(n, rng), rng, exp.simple_max_attempts).graph;
      break;
    default: {
      std::vector<double> w(n);
      for (double& x : w) x = exp.rank1_law->sample(rng);
      const Rank1Kind kind = exp.kind == GraphKind::nr    ? Rank1Kind::norros_reittu
                             : exp.kind == GraphKind::grg ? Rank1Kind::generalized
                                                          : Rank1Kind::chung_lu;
      g = sample_rank1(w, kind, rng);
    }
  }
  assign_weights(g, exp.weights, rng);
  return g;
}

int cmd_gen_graph(const ModelFlags& f, std::size_t n, const std::string& out) {
  const ExperimentConfig c = resolve(f);
  const Experiment exp = build_experiment(c);
  Rng rng(c.seed);
  const WeightedGraph g = generate(exp, n, rng);
  if (out.empty() || out == "-") {
    write_edge_list(std::cout, g, c.seed);
  } else {
    std::ofstream file(out);
    if (!file) throw Error("cannot write '" + out + "'");
    write_edge_list(file, g, c.seed);
  }
  return kExitPass;
}

// -- bp-sim ------------------------------------------------------------------

int cmd_bp_sim(const ModelFlags& f, std::size_t count, std::optional<double> horizon, bool trajectory) {
  const ExperimentConfig c = resolve(f);
  const Experiment exp = build_experiment(c);
  QSamplerConfig q = exp.w_sampler();
  if (horizon) q.bp.horizon = *horizon;
  q.bp.record_trajectory = trajectory;
  std::cout << std::setprecision(12);
  if (trajectory) {
    Rng rng(c.seed);
    const BpTrajectory t = simulate_bp(q.bp, rng);
    std::cout << "# time alive\n";
    for (const auto& [time, alive] : t.alive_counts) std::cout << time << ' ' << alive << '\n';
    std::cout << "# horizon " << q.bp.horizon << " alive " << t.alive_at_horizon << " W " << t.w_estimate
              << (t.extinct ? " extinct" : "") << '\n';
    return kExitPass;
  }
  std::vector<double> ws(count);
  parallel_for(count, c.threads, [&](std::size_t i) {
    Rng rng(derive_seed(c.seed, i));
    ws[i] = simulate_bp(q.bp, rng).w_estimate;
  });
  std::cout << "# W estimates at horizon " << q.bp.horizon << '\n';
  for (double w : ws) std::cout << w << '\n';
  const MomentSummary m = moments(ws);
  std::cerr << "mean " << m.mean << " variance " << m.variance << '\n';
  return kExitPass;
}

// -- ranked ------------------------------------------------------------------

int cmd_ranked(const ModelFlags& f, std::size_t n, std::size_t m) {
  const ExperimentConfig c = resolve(f);
  const Experiment exp = build_experiment(c);
  Rng rng(c.seed);
  const WeightedGraph g = generate(exp, n, rng);
  std::vector<Vertex> usable;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(v) > 0) usable.push_back(v);
  }
  if (usable.size() < 2) throw CapacityError("graph has fewer than two non-isolated vertices");
  const Vertex u1 = usable[rng.below(usable.size())];
  Vertex u2 = u1;
  while (u2 == u1) u2 = usable[rng.below(usable.size())];
  SwgExplorer explorer(g, u1, u2);
  explorer.finish(true, 0.0, m);
  std::vector<CollisionRecord> paths = explorer.records();
  std::stable_sort(paths.begin(), paths.end(),
                   [](const CollisionRecord& a, const CollisionRecord& b) { return a.path_weight < b.path_weight; });
  if (paths.size() > m) paths.resize(m);
  const double alpha_n = trial_constants(g.degrees(), exp.weights).alpha_n;
  const double centre = std::log(static_cast<double>(n)) / alpha_n;
  std::cout << "u1 " << u1 << " u2 " << u2 << '\n' << std::setprecision(10);
  std::cout << "rank weight recentred hops time source residual path\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const CollisionRecord& r = paths[i];
    std::cout << i + 1 << ' ' << r.path_weight << ' ' << r.path_weight - centre << ' ' << r.path_hops << ' ' << r.time
              << ' ' << r.source + 1 << ' ' << r.residual << ' ';
    const std::vector<Vertex> vs = explorer.path_vertices(r);
    for (std::size_t j = 0; j < vs.size(); ++j) std::cout << (j ? "-" : "") << vs[j];
    std::cout << '\n';
  }
  if (paths.size() < m) std::cout << "only " << paths.size() << " collision edges exist\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First passage percolation on random graphs: constants, simulation and verification."};
  app.require_subcommand(1);
  app.footer(
      "Precedence: built-in defaults < --config file < flags.\n"
      "Exit codes: 0 pass, 1 verification failure, 2 usage/config error, 3 runtime error.");

  ModelFlags model;

  CLI::App* constants = app.add_subcommand("constants", "Print the limiting constants for a degree and weight law");
  add_model_flags(constants, model, false);
  bool json = false;
  constants->add_flag("--json", json, "Print JSON instead of a table");

  CLI::App* run = app.add_subcommand("run", "Run the n-ladder, write outcomes.csv, report.json, report.txt");
  add_model_flags(run, model, true);
  RunFlags run_flags;
  run->add_option("--out", run_flags.out, "Output directory");
  run->add_option("--n-ladder", run_flags.n_ladder, "Comma-separated graph sizes, strictly increasing");
  run->add_option("--trials", run_flags.trials, "Trials per graph size");
  run->add_option("--ranked", run_flags.ranked, "Number of ranked paths per trial");
  run->add_option("--meta-runs", run_flags.meta_runs, "Verifier meta-calibration runs (0 skips)");
  run->add_flag("--plots", run_flags.plots, "Also write plot_*.txt two-column data files");
  run->add_option("--log", run_flags.log, "Append timestamps and runtimes to this sidecar log");

  CLI::App* oracle = app.add_subcommand("oracle", "Check the exploration against Dijkstra on a seeded corpus");
  std::size_t oracle_count = 500;
  std::uint64_t oracle_seed = 20240601;
  bool fault = false;
  bool verbose = false;
  std::optional<std::size_t> oracle_n;
  oracle->add_option("--count", oracle_count, "Number of instances")->capture_default_str();
  oracle->add_option("--seed", oracle_seed, "Corpus seed")->capture_default_str();
  oracle->add_option("--n", oracle_n, "Fix the graph size (default: uniform in [10, 200])");
  oracle->add_flag("--fault", fault, "Corrupt the exploration's first tie-break (the check must then fail)");
  oracle->add_flag("--verbose", verbose, "Print both paths for every instance");

  CLI::App* gen = app.add_subcommand("gen-graph", "Write one weighted graph as an edge list");
  add_model_flags(gen, model, false);
  std::size_t gen_n = 1000;
  std::string gen_out;
  gen->add_option("--n", gen_n, "Number of vertices")->capture_default_str();
  gen->add_option("--out", gen_out, "Output file (default: stdout)");

  CLI::App* bp = app.add_subcommand("bp-sim", "Simulate the branching process and print W estimates");
  add_model_flags(bp, model, true);
  std::size_t bp_count = 1000;
  std::optional<double> bp_horizon;
  bool bp_trajectory = false;
  bp->add_option("--count", bp_count, "Number of independent processes")->capture_default_str();
  bp->add_option("--horizon", bp_horizon, "Simulation horizon (default: expected size 1e4)");
  bp->add_flag("--trajectory", bp_trajectory, "Print one (time, alive) trajectory instead");

  CLI::App* ranked = app.add_subcommand("ranked", "Print the m lightest collision paths on one graph");
  add_model_flags(ranked, model, false);
  std::size_t ranked_n = 1000;
  std::size_t ranked_m = 3;
  ranked->add_option("--n", ranked_n, "Number of vertices")->capture_default_str();
  ranked->add_option("--m", ranked_m, "Number of paths")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*constants) return cmd_constants(model, json);
    if (*run) return cmd_run(model, run_flags);
    if (*oracle) return cmd_oracle(oracle_count, oracle_seed, fault, verbose, oracle_n);
    if (*gen) return cmd_gen_graph(model, gen_n, gen_out);
    if (*bp) return cmd_bp_sim(model, bp_count, bp_horizon, bp_trajectory);
    if (*ranked) return cmd_ranked(model, ranked_n, ranked_m);
  } catch (const SubcriticalError& e) {
    std::cerr << "error: subcritical configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
