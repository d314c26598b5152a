#include "fpp/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fpp/degrees.hpp"
#include "fpp/errors.hpp"

namespace fpp {
namespace {

constexpr std::size_t kMaxEndpointResamples = 100;

unsigned resolve_threads(unsigned threads, std::size_t count) {
  unsigned t = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  if (count < t) t = static_cast<unsigned>(std::max<std::size_t>(1, count));
  return t;
}

bool is_rank1(GraphKind kind) { return kind == GraphKind::nr || kind == GraphKind::grg || kind == GraphKind::cl; }

Rank1Kind rank1_kind(GraphKind kind) {
  switch (kind) {
    case GraphKind::nr: return Rank1Kind::norros_reittu;
    case GraphKind::grg: return Rank1Kind::generalized;
    default: return Rank1Kind::chung_lu;
  }
}

WeightedGraph build_graph(const Experiment& exp, std::size_t n, const DegreeSequence* fixed, Rng& rng,
                          std::size_t* attempts) {
  *attempts = 1;
  if (is_rank1(exp.kind)) {
    std::vector<double> w(n);
    for (double& x : w) x = exp.rank1_law->sample(rng);
    return sample_rank1(w, rank1_kind(exp.kind), rng);
  }
  std::optional<DegreeSequence> own;
  if (fixed == nullptr) own = exp.degrees->realize(n, rng);
  const DegreeSequence& seq = fixed != nullptr ? *fixed : *own;
  if (exp.kind == GraphKind::simple) {
    SimpleGraphSample s = sample_uniform_simple(seq, rng, exp.simple_max_attempts);
    *attempts = s.attempts;
    return std::move(s.graph);
  }
  return pair_configuration(seq, rng);
}

TrialOutcome run_trial_impl(const Experiment& exp, std::size_t n, std::size_t trial, std::uint64_t master,
                            const DegreeSequence* fixed_degrees, const TrialConstants* fixed_constants) {
  TrialOutcome o;
  o.trial = trial;
  o.n = n;
  o.seed = trial_seed(master, n, trial);
  Rng rng(o.seed);
  WeightedGraph g = build_graph(exp, n, fixed_degrees, rng, &o.graph_attempts);
  assign_weights(g, exp.weights, rng);
  o.constants = fixed_constants != nullptr ? *fixed_constants : trial_constants(g.degrees(), exp.weights);
  const double alpha_n = o.constants.alpha_n;
  const double logn = std::log(static_cast<double>(n));
  const Thresholds& th = exp.thresholds;

  for (std::size_t attempt = 0; attempt <= kMaxEndpointResamples; ++attempt) {
    const auto u1 = static_cast<Vertex>(rng.below(n));
    auto u2 = static_cast<Vertex>(rng.below(n - 1));
    if (u2 >= u1) ++u2;
    if (g.degree(u1) == 0 || g.degree(u2) == 0) {
      ++o.resamples;
      continue;
    }
    SwgExplorer explorer(g, u1, u2);
    const MartingaleProbe probe = measure_martingale(explorer, n, alpha_n);
    double horizon = 0.0;
    std::optional<MarkScale> scale;
    if (exp.marks && probe.w1 > 0.0 && probe.w2 > 0.0) {
      scale = mark_scale(n, alpha_n, o.constants.nu_bar_n, exp.limit, probe.w1, probe.w2);
      horizon = scale->t_bar_n + th.window_hi;
    }
    explorer.finish(true, horizon, exp.ranked);
    std::optional<PathResult> res = explorer.result();
    if (!res) {
      ++o.resamples;
      continue;
    }
    o.connected = true;
    o.hops = res->hops;
    o.weight = res->weight;
    o.w1 = probe.w1;
    o.w2 = probe.w2;
    const double gamma_n = 1.0 / (alpha_n * o.constants.nu_bar_n);
    o.z_hat = (static_cast<double>(o.hops) - gamma_n * logn) / std::sqrt(exp.limit.beta * logn);
    o.q_hat = o.weight - logn / alpha_n;

    std::vector<double> weights;
    weights.reserve(res->records.size());
    for (const CollisionRecord& r : res->records) weights.push_back(r.path_weight);
    std::sort(weights.begin(), weights.end());
    for (std::size_t i = 0; i < weights.size() && i < exp.ranked; ++i) o.ranked.push_back(weights[i] - logn / alpha_n);

    if (scale) {
      o.scale = scale;
      for (const StandardMark& m : standardize_marks(res->records, *scale)) {
        if (m.t_bar >= th.window_lo && m.t_bar < th.window_hi) o.marks.push_back(m);
      }
    }
    return o;
  }
  throw CapacityError("persistent disconnection: no connected endpoint pair in " +
                      std::to_string(kMaxEndpointResamples + 1) + " draws (subcritical configuration?)");
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Experiment Experiment::from_config(const ExperimentConfig& config) {
  config.validate();
  Experiment exp;
  exp.kind = config.graph_kind;
  exp.degrees = config.degrees;
  exp.rank1_law = config.rank1_law();
  exp.weights = config.weight_law();
  exp.simple_max_attempts = config.simple_max_attempts;
  exp.ranked = config.ranked;
  exp.marks = config.marks;
  exp.thresholds = config.thresholds;
  exp.degree_law = is_rank1(exp.kind) ? mixed_poisson_law(*exp.rank1_law) : exp.degrees->law();
  const double mu = exp.degree_law.mean();
  const double nu = (exp.degree_law.second_moment() - mu) / mu;
  exp.limit = compute_constants(mu, nu, exp.weights);
  return exp;
}

QSamplerConfig Experiment::w_sampler() const {
  QSamplerConfig q;
  q.bp.root_law = degree_law;
  q.bp.later_law = size_biased_pmf(degree_law);
  q.bp.lifetimes = &weights;
  q.bp.alpha = limit.alpha;
  q.bp.horizon = default_horizon(limit, degree_law.mean());
  q.bp.record_trajectory = false;
  return q;
}

TrialConstants trial_constants(std::span<const std::uint32_t> degrees, const WeightDistribution& weights) {
  double total = 0.0;
  double falling = 0.0;
  for (std::uint32_t d : degrees) {
    total += d;
    falling += static_cast<double>(d) * (static_cast<double>(d) - 1.0);
  }
  if (!(total > 0.0)) throw SubcriticalError("graph has no edges");
  TrialConstants c;
  c.mu_n = total / static_cast<double>(degrees.size());
  c.nu_n = falling / total;
  c.alpha_n = solve_malthusian(c.nu_n, weights);
  c.nu_bar_n = stable_age_moments(c.nu_n, c.alpha_n, weights).nu_bar;
  return c;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t n, std::size_t trial) {
  return derive_seed(derive_seed(master, n), trial);
}

TrialOutcome run_trial(const Experiment& exp, std::size_t n, std::size_t trial, std::uint64_t master) {
  return run_trial_impl(exp, n, trial, master, nullptr, nullptr);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned t = resolve_threads(threads, count);
  if (t <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < t; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<TrialOutcome> run_trials(const Experiment& exp, std::size_t n, std::size_t trials,
                                     std::uint64_t master, unsigned threads, std::ostream* csv) {
  if (trials == 0) throw InvalidArgument("need at least one trial");
  if (n < 3) throw InvalidArgument("n must be at least 3");

  // Deterministic degree models give the same sequence, and so the same
  // n-dependent constants, in every trial.
  std::optional<DegreeSequence> fixed;
  std::optional<TrialConstants> fixed_constants;
  if (!is_rank1(exp.kind) && exp.degrees->kind != DegreeModel::Kind::iid) {
    Rng unused(0);
    fixed = exp.degrees->realize(n, unused);
    fixed_constants = trial_constants(fixed->degrees(), exp.weights);
  }
  const DegreeSequence* seq = fixed ? &*fixed : nullptr;
  const TrialConstants* consts = fixed_constants ? &*fixed_constants : nullptr;

  std::vector<TrialOutcome> out(trials);
  std::vector<char> done(trials, 0);
  std::mutex mu;
  std::condition_variable cv;
  std::exception_ptr error;
  bool failed = false;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= trials) return;
      {
        std::lock_guard lock(mu);
        if (failed) return;
      }
      try {
        TrialOutcome o = run_trial_impl(exp, n, i, master, seq, consts);
        std::lock_guard lock(mu);
        out[i] = std::move(o);
        done[i] = 1;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  const unsigned t = resolve_threads(threads, trials);
  for (unsigned w = 0; w < t; ++w) pool.emplace_back(worker);
  {
    std::unique_lock lock(mu);
    std::size_t written = 0;
    while (written < trials) {
      cv.wait(lock, [&] { return failed || done[written]; });
      if (failed) break;
      while (written < trials && done[written]) {
        if (csv != nullptr) write_csv_row(*csv, out[written]);
        ++written;
      }
      if (csv != nullptr) csv->flush();
    }
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

void write_csv_header(std::ostream& out) { out << "trial,seed,n,H_n,L_n,Z_hat,Q_hat,W1,W2,connected\n"; }

void write_csv_row(std::ostream& out, const TrialOutcome& o) {
  out << o.trial << ',' << o.seed << ',' << o.n << ',' << o.hops << ',' << format_double(o.weight) << ','
      << format_double(o.z_hat) << ',' << format_double(o.q_hat) << ',' << format_double(o.w1) << ','
      << format_double(o.w2) << ',' << (o.connected ? 1 : 0) << '\n';
}

std::vector<double> sample_w_pool(const Experiment& exp, std::size_t count, std::uint64_t seed, unsigned threads) {
  const QSamplerConfig sampler = exp.w_sampler();
  std::vector<double> pool(count);
  parallel_for(count, threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    pool[i] = sample_martingale_limit(sampler, rng);
  });
  return pool;
}

std::vector<std::vector<double>> q_references(const CtbpConstants& consts, std::span<const double> w_pool,
                                              std::size_t count, std::size_t m, std::uint64_t seed,
                                              double c_shift) {
  if (w_pool.size() < 2 * count) throw InvalidArgument("W pool needs two values per reference draw");
  CtbpConstants shifted = consts;
  shifted.c += c_shift;
  Rng rng(seed);
  std::vector<std::vector<double>> refs(m, std::vector<double>(count));
  for (std::size_t j = 0; j < count; ++j) {
    const std::vector<double> t = sample_ranked_gumbel(m, rng);
    for (std::size_t i = 0; i < m; ++i) refs[i][j] = limit_weight(shifted, w_pool[2 * j], w_pool[2 * j + 1], -t[i]);
  }
  return refs;
}

HopcountRung hopcount_rung(std::span<const TrialOutcome> outcomes, const CtbpConstants& limit) {
  HopcountRung rung;
  bool shared = true;
  for (const TrialOutcome& o : outcomes) {
    if (!o.connected) continue;
    rung.n = o.n;
    rung.z.push_back(o.z_hat);
    rung.hops.push_back(static_cast<long>(o.hops));
    const TrialConstants& a = outcomes.front().constants;
    if (o.constants.alpha_n != a.alpha_n || o.constants.nu_bar_n != a.nu_bar_n || o.n != outcomes.front().n) {
      shared = false;
    }
  }
  if (shared && !rung.z.empty()) {
    const TrialConstants& a = outcomes.front().constants;
    const double logn = std::log(static_cast<double>(rung.n));
    rung.shared_center_scale = {logn / (a.alpha_n * a.nu_bar_n), std::sqrt(limit.beta * logn)};
  }
  return rung;
}

VerificationEntry verify_hopcount_clt(std::span<const HopcountRung> ladder, const Thresholds& th) {
  const auto start = std::chrono::steady_clock::now();
  if (ladder.empty()) throw InvalidArgument("hopcount CLT needs at least one rung");
  VerificationEntry e;
  e.name = "hopcount_clt";
  std::vector<double> ds;
  for (const HopcountRung& r : ladder) {
    if (r.z.size() < 500) {
      throw InvalidArgument("hopcount CLT needs at least 500 connected outcomes per rung, got " +
                            std::to_string(r.z.size()));
    }
    const KsResult ks = ks_one_sample(r.z, normal_cdf);
    ds.push_back(ks.d);
    e.values.emplace_back("D_n=" + std::to_string(r.n), ks.d);
    e.values.emplace_back("p_n=" + std::to_string(r.n), ks.p);
    if (r.shared_center_scale) {
      const auto [center, scale] = *r.shared_center_scale;
      const KsResult lat = ks_lattice(r.hops, [=](double h) { return normal_cdf((h - center) / scale); });
      e.values.emplace_back("D_lattice_n=" + std::to_string(r.n), lat.d);
    }
  }
  bool monotone = true;
  for (std::size_t i = 1; i < ds.size(); ++i) monotone = monotone && ds[i] < ds[i - 1];
  const HopcountRung& last = ladder.back();
  const MomentSummary m = moments(last.z);
  e.statistic = ds.back();
  e.threshold = th.clt_ks > 0.0 ? th.clt_ks : ks_critical(static_cast<double>(last.z.size()), th.clt_p);
  e.sample_size = last.z.size();
  e.values.emplace_back("mean", m.mean);
  e.values.emplace_back("variance", m.variance);
  const bool moments_ok = std::abs(m.mean) < th.clt_mean && std::abs(m.variance - 1.0) < th.clt_var;
  e.pass = e.statistic < e.threshold && monotone && moments_ok;
  std::ostringstream os;
  os << "KS(Z_hat, Phi) at n=" << last.n << (monotone ? ", decreasing" : ", NOT decreasing") << " along the ladder"
     << (moments_ok ? "" : ", moment check failed");
  e.detail = os.str();
  e.runtime_s = elapsed_since(start);
  return e;
}

VerificationEntry verify_weight_limit(std::span<const double> q_hat, std::span<const double> q_reference,
                                      const Thresholds& th) {
  const auto start = std::chrono::steady_clock::now();
  if (q_hat.size() < 500) throw InvalidArgument("weight limit needs at least 500 connected outcomes");
  VerificationEntry e;
  e.name = "weight_limit";
  const KsResult ks = ks_two_sample(q_hat, q_reference);
  e.statistic = ks.d;
  e.threshold = th.weight_ks;
  e.pass = ks.d < th.weight_ks;
  e.sample_size = q_hat.size();
  e.values.emplace_back("p", ks.p);
  e.values.emplace_back("reference_size", static_cast<double>(q_reference.size()));
  e.detail = "two-sample KS(Q_hat, Q reference)";
  e.runtime_s = elapsed_since(start);
  return e;
}

std::vector<VerificationEntry> verify_ppp(const PppInput& input, const CtbpConstants& limit,
                                          const ResidualLaw::Table& residual, const Thresholds& th) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> times;
  std::vector<double> h_or;
  std::vector<double> h_de;
  std::vector<long> raw_or;
  std::vector<long> raw_de;
  std::vector<double> rs;
  std::size_t first_source = 0;
  for (const StandardMark& m : input.marks) {
    if (m.t_bar < th.window_lo || m.t_bar >= th.window_hi) continue;
    times.push_back(m.t_bar);
    h_or.push_back(m.h_origin);
    h_de.push_back(m.h_dest);
    raw_or.push_back(static_cast<long>(m.raw_origin));
    raw_de.push_back(static_cast<long>(m.raw_dest));
    rs.push_back(m.residual);
    if (m.source == 0) ++first_source;
  }
  if (times.size() < 50) {
    throw InvalidArgument("too few collision marks in the window: " + std::to_string(times.size()));
  }
  std::vector<VerificationEntry> out;
  const std::size_t count = times.size();

  VerificationEntry slope;
  slope.name = "ppp_time_slope";
  const RateFit fit = fit_log_rate(times, th.window_lo, th.window_hi, th.rate_bins);
  const double target = 2.0 * limit.alpha;
  slope.statistic = std::abs(fit.slope / target - 1.0);
  slope.threshold = th.slope_rel;
  slope.pass = slope.statistic < th.slope_rel;
  slope.sample_size = count;
  slope.values = {{"slope", fit.slope}, {"slope_se", fit.slope_se}, {"target_2alpha", target},
                  {"marks_per_trial", input.trials ? static_cast<double>(count) / input.trials : 0.0}};
  slope.detail = "Poisson log-linear fit of the T_bar histogram, relative error vs 2 alpha";
  out.push_back(slope);

  VerificationEntry source;
  source.name = "ppp_source_balance";
  const double nn = static_cast<double>(count);
  const double z = (static_cast<double>(first_source) - nn / 2.0) / (std::sqrt(nn) / 2.0);
  source.statistic = std::abs(z);
  source.threshold = th.source_sigma;
  source.pass = source.statistic < th.source_sigma;
  source.sample_size = count;
  source.values = {{"fraction_source_1", static_cast<double>(first_source) / nn}};
  source.detail = "|z| of the source-1 count against Binomial(N, 1/2)";
  out.push_back(source);

  auto height_entry = [&](const char* name, const std::vector<double>& hs, const std::vector<long>& raw) {
    VerificationEntry e;
    e.name = name;
    const KsResult ks = ks_one_sample(hs, normal_cdf);
    e.statistic = ks.d;
    e.threshold = th.height_ks;
    e.pass = ks.d < th.height_ks;
    e.sample_size = hs.size();
    e.values = {{"p", ks.p}};
    if (input.shared_height_scale) {
      const auto [center, scale] = *input.shared_height_scale;
      const KsResult lat = ks_lattice(raw, [=](double h) { return normal_cdf((h - center) / scale); });
      e.values.emplace_back("D_lattice", lat.d);
    }
    e.detail = "KS of standardized heights against Phi";
    return e;
  };
  out.push_back(height_entry("ppp_height_origin", h_or, raw_or));
  out.push_back(height_entry("ppp_height_dest", h_de, raw_de));

  VerificationEntry res;
  res.name = "ppp_residual";
  const KsResult ks = ks_one_sample(rs, [&](double x) { return residual.cdf(x); });
  res.statistic = ks.d;
  res.threshold = th.residual_ks;
  res.pass = ks.d < th.residual_ks;
  res.sample_size = count;
  res.values = {{"p", ks.p}};
  res.detail = "KS of residual lifetimes against F_R";
  out.push_back(res);

  const double runtime = elapsed_since(start);
  for (auto& e : out) e.runtime_s = runtime;
  return out;
}

VerificationEntry verify_ranked(std::span<const std::vector<double>> per_trial,
                                std::span<const std::vector<double>> references, const Thresholds& th) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t m = references.size();
  if (m == 0) throw InvalidArgument("ranked verification needs at least one reference");
  VerificationEntry e;
  e.name = "ranked_paths";
  std::vector<std::vector<double>> by_rank(m);
  std::size_t complete = 0;
  std::size_t increasing = 0;
  std::vector<double> gap_sum(m > 1 ? m - 1 : 0, 0.0);
  for (const auto& w : per_trial) {
    for (std::size_t i = 0; i < m && i < w.size(); ++i) by_rank[i].push_back(w[i]);
    if (w.size() < m) continue;
    ++complete;
    bool up = true;
    for (std::size_t i = 1; i < m; ++i) {
      up = up && w[i] > w[i - 1];
      gap_sum[i - 1] += w[i] - w[i - 1];
    }
    if (up) ++increasing;
  }
  if (complete < 500) throw InvalidArgument("ranked verification needs at least 500 complete trials");
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const KsResult ks = ks_two_sample(by_rank[i], references[i]);
    worst = std::max(worst, ks.d);
    e.values.emplace_back("D_rank_" + std::to_string(i + 1), ks.d);
  }
  bool gaps_decreasing = true;
  for (std::size_t i = 0; i < gap_sum.size(); ++i) {
    gap_sum[i] /= static_cast<double>(complete);
    e.values.emplace_back("mean_gap_" + std::to_string(i + 1), gap_sum[i]);
    if (i > 0) gaps_decreasing = gaps_decreasing && gap_sum[i] < gap_sum[i - 1];
  }
  const double frac = static_cast<double>(increasing) / static_cast<double>(complete);
  e.values.emplace_back("fraction_strictly_increasing", frac);
  e.values.emplace_back("incomplete_trials", static_cast<double>(per_trial.size() - complete));
  e.statistic = worst;
  e.threshold = th.ranked_ks;
  e.sample_size = complete;
  e.pass = worst < th.ranked_ks && increasing == complete && gaps_decreasing;
  e.detail = "max over ranks of two-sample KS(L_n(i) - log n/alpha_n, Q_i reference)";
  e.runtime_s = elapsed_since(start);
  return e;
}

std::vector<StandardMark> synthetic_marks(std::size_t count, double alpha, const Thresholds& th,
                                          const ResidualLaw::Table& residual, Rng& rng, double slope_factor,
                                          double source_p, double height_shift, double residual_shift) {
  const double b = 2.0 * alpha * slope_factor;
  const double span = th.window_hi - th.window_lo;
  std::vector<StandardMark> out(count);
  for (StandardMark& m : out) {
    m.t_bar = th.window_lo + std::log1p(rng.uniform() * std::expm1(b * span)) / b;
    m.source = rng.uniform() < source_p ? 0 : 1;
    m.h_origin = rng.normal() + height_shift;
    m.h_dest = rng.normal() + height_shift;
    m.residual = residual.sample(rng) + residual_shift;
  }
  return out;
}

std::vector<MetaResult> meta_calibrate(const CtbpConstants& limit, std::span<const double> w_pool,
                                       const ResidualLaw::Table& residual, const Thresholds& th,
                                       const MetaOptions& options) {
  if (w_pool.size() < 2) throw InvalidArgument("meta calibration needs a W pool");
  const std::vector<std::string> names = {"hopcount_clt",       "weight_limit",       "ppp_time_slope",
                                          "ppp_source_balance", "ppp_height_origin",  "ppp_height_dest",
                                          "ppp_residual",       "ranked_paths"};
  const std::vector<std::string> perturbations = {
      "mean shift 0.5 sd", "c + log 2", "slope x 0.7", "source p = 0.55", "mean shift 0.5 sd",
      "mean shift 0.5 sd", "mean shift 0.5 sd", "c + log 2"};
  std::vector<MetaResult> out(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    out[k].verifier = names[k];
    out[k].perturbation = perturbations[k];
    out[k].runs = options.runs;
  }

  // Standard deviation of F_R, for the residual shift.
  double r_sd = 0.0;
  {
    Rng rng(derive_seed(options.seed, 0xF00D));
    std::vector<double> r(20'000);
    for (double& x : r) x = residual.sample(rng);
    r_sd = std::sqrt(moments(r).variance);
  }
  const double c_shift = std::log(2.0);
  const std::size_t m = std::max<std::size_t>(options.ranked, 1);
  Thresholds meta_th = th;

  for (std::size_t run = 0; run < options.runs; ++run) {
    Rng rng(derive_seed(options.seed, run));
    auto draw_w = [&] { return w_pool[rng.below(w_pool.size())]; };

    // Hopcount CLT.
    HopcountRung null_rung;
    null_rung.n = 0;
    null_rung.z.resize(options.clt_size);
    for (double& z : null_rung.z) z = rng.normal();
    HopcountRung shifted = null_rung;
    for (double& z : shifted.z) z += 0.5;
    if (verify_hopcount_clt(std::span(&null_rung, 1), meta_th).pass) ++out[0].null_pass;
    if (!verify_hopcount_clt(std::span(&shifted, 1), meta_th).pass) ++out[0].power_detect;

    // Weight limit and ranked paths share one synthetic population.
    std::vector<std::vector<double>> hat_trials(options.q_size);
    std::vector<double> q_hat(options.q_size);
    for (std::size_t j = 0; j < options.q_size; ++j) {
      const double w1 = draw_w();
      const double w2 = draw_w();
      const std::vector<double> t = sample_ranked_gumbel(m, rng);
      hat_trials[j].resize(m);
      for (std::size_t i = 0; i < m; ++i) hat_trials[j][i] = limit_weight(limit, w1, w2, -t[i]);
      q_hat[j] = hat_trials[j][0];
    }
    std::vector<double> ref_pool(2 * options.q_reference);
    for (double& w : ref_pool) w = draw_w();
    const std::uint64_t ref_seed = rng.next_u64();
    const auto refs = q_references(limit, ref_pool, options.q_reference, m, ref_seed);
    const auto wrong = q_references(limit, ref_pool, options.q_reference, m, ref_seed, c_shift);
    if (verify_weight_limit(q_hat, refs[0], meta_th).pass) ++out[1].null_pass;
    if (!verify_weight_limit(q_hat, wrong[0], meta_th).pass) ++out[1].power_detect;
    if (verify_ranked(hat_trials, refs, meta_th).pass) ++out[7].null_pass;
    if (!verify_ranked(hat_trials, wrong, meta_th).pass) ++out[7].power_detect;

    // Point process marks.
    const double alpha = limit.alpha;
    PppInput null_input{synthetic_marks(options.marks, alpha, th, residual, rng), 0, std::nullopt};
    const auto null_entries = verify_ppp(null_input, limit, residual, meta_th);
    for (std::size_t k = 0; k < null_entries.size(); ++k) {
      if (null_entries[k].pass) ++out[2 + k].null_pass;
    }
    const PppInput perturbed[5] = {
        {synthetic_marks(options.marks, alpha, th, residual, rng, 0.7), 0, std::nullopt},
        {synthetic_marks(options.marks, alpha, th, residual, rng, 1.0, 0.55), 0, std::nullopt},
        {synthetic_marks(options.marks, alpha, th, residual, rng, 1.0, 0.5, 0.5), 0, std::nullopt},
        {synthetic_marks(options.marks, alpha, th, residual, rng, 1.0, 0.5, 0.5), 0, std::nullopt},
        {synthetic_marks(options.marks, alpha, th, residual, rng, 1.0, 0.5, 0.0, 0.5 * r_sd), 0, std::nullopt},
    };
    for (std::size_t k = 0; k < 5; ++k) {
      if (!verify_ppp(perturbed[k], limit, residual, meta_th)[k].pass) ++out[2 + k].power_detect;
    }
  }
  return out;
}

bool VerificationReport::all_pass() const {
  for (const auto& e : entries) {
    if (!e.pass) return false;
  }
  for (const auto& m : meta) {
    if (!m.pass()) return false;
  }
  return true;
}

std::string VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["master_seed"] = master_seed;
  j["config"] = config_echo;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (const auto& [k, v] : this->summary) summary[k] = v;
  j["summary"] = summary;
  nlohmann::ordered_json tests = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json t;
    t["name"] = e.name;
    t["statistic"] = e.statistic;
    t["threshold"] = e.threshold;
    t["pass"] = e.pass;
    t["sample_size"] = e.sample_size;
    t["detail"] = e.detail;
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e.values) values[k] = v;
    t["values"] = values;
    tests.push_back(t);
  }
  j["tests"] = tests;
  nlohmann::ordered_json meta_j = nlohmann::ordered_json::array();
  for (const auto& m : meta) {
    meta_j.push_back({{"verifier", m.verifier},
                      {"perturbation", m.perturbation},
                      {"runs", m.runs},
                      {"null_pass", m.null_pass},
                      {"power_detect", m.power_detect},
                      {"pass", m.pass()}});
  }
  j["meta_calibration"] = meta_j;
  j["all_pass"] = all_pass();
  return j.dump(2) + "\n";
}

std::string VerificationReport::to_text() const {
  std::ostringstream os;
  os << "master seed " << master_seed << '\n';
  os << "thresholds are desk-scale calibrations, not limit theorems\n";
  for (const auto& [k, v] : summary) os << "  " << k << " = " << format_double(v) << '\n';
  for (const auto& e : entries) {
    os << (e.pass ? "PASS " : "FAIL ") << e.name << "  statistic=" << format_double(e.statistic)
       << "  threshold=" << format_double(e.threshold) << "  N=" << e.sample_size << "  (" << e.detail << ")\n";
    for (const auto& [k, v] : e.values) os << "      " << k << " = " << format_double(v) << '\n';
  }
  for (const auto& m : meta) {
    os << (m.pass() ? "PASS " : "FAIL ") << "meta " << m.verifier << "  null " << m.null_pass << "/" << m.runs
       << "  power(" << m.perturbation << ") " << m.power_detect << "/" << m.runs << '\n';
  }
  os << (all_pass() ? "ALL PASS" : "SOME CHECKS FAILED") << '\n';
  return os.str();
}

ExperimentRun run_experiment(const ExperimentConfig& config, std::ostream* csv, std::ostream* progress) {
  ExperimentRun run;
  run.experiment = Experiment::from_config(config);
  const Experiment& exp = run.experiment;
  const Thresholds& th = exp.thresholds;
  const CtbpConstants& limit = exp.limit;
  VerificationReport& report = run.report;
  report.config_echo = config.echo();
  report.master_seed = config.seed;
  report.summary = {{"mu", limit.mu},     {"nu", limit.nu},       {"alpha", limit.alpha}, {"nu_bar", limit.nu_bar},
                    {"sigma_bar_sq", limit.sigma_bar_sq},          {"gamma", limit.gamma}, {"beta", limit.beta},
                    {"c", limit.c},       {"f_R0", limit.f_R0},   {"B", limit.B}};

  if (csv != nullptr) write_csv_header(*csv);
  for (std::size_t n : config.n_ladder) {
    if (progress != nullptr) *progress << "running " << config.trials << " trials at n=" << n << std::endl;
    run.rungs.push_back(run_trials(exp, n, config.trials, config.seed, config.threads, csv));
    std::size_t resamples = 0;
    for (const TrialOutcome& o : run.rungs.back()) resamples += o.resamples;
    report.summary.emplace_back("disconnected_fraction_n=" + std::to_string(n),
                                static_cast<double>(resamples) / static_cast<double>(resamples + config.trials));
  }
  const std::vector<TrialOutcome>& last = run.rungs.back();
  std::size_t connected = 0;
  for (const TrialOutcome& o : last) connected += o.connected;

  auto insufficient = [&](const std::string& name, const std::string& why) {
    VerificationEntry e;
    e.name = name;
    e.detail = "insufficient sample: " + why;
    report.entries.push_back(e);
  };

  if (progress != nullptr) *progress << "verifying" << std::endl;
  std::vector<HopcountRung> ladder;
  std::string short_rung;
  for (const auto& rung : run.rungs) {
    ladder.push_back(hopcount_rung(rung, limit));
    if (ladder.back().z.size() < 500 && short_rung.empty()) {
      short_rung = std::to_string(ladder.back().z.size()) + " connected outcomes at n=" +
                   std::to_string(rung.front().n) + ", need 500";
    }
  }
  if (short_rung.empty()) {
    report.entries.push_back(verify_hopcount_clt(ladder, th));
  } else {
    insufficient("hopcount_clt", short_rung);
  }

  const std::size_t m = std::max<std::size_t>(exp.ranked, 1);
  const bool weight_ok = connected >= 500;
  if (weight_ok || config.meta_runs > 0) {
    if (progress != nullptr) *progress << "sampling " << 2 * th.q_reference << " martingale limits" << std::endl;
    run.w_pool = sample_w_pool(exp, 2 * th.q_reference, derive_seed(config.seed, 0x57'01), config.threads);
    run.q_reference = q_references(limit, run.w_pool, th.q_reference, m, derive_seed(config.seed, 0x57'02));
  }
  if (weight_ok) {
    std::vector<double> q_hat;
    for (const TrialOutcome& o : last) {
      if (o.connected) q_hat.push_back(o.q_hat);
    }
    report.entries.push_back(verify_weight_limit(q_hat, run.q_reference[0], th));
  } else {
    insufficient("weight_limit", std::to_string(connected) + " connected outcomes, need 500");
  }

  std::optional<ResidualLaw::Table> table;
  if (exp.marks || config.meta_runs > 0) table = ResidualLaw(exp.weights, limit.alpha).tabulate();
  if (exp.marks) {
    PppInput input;
    input.trials = last.size();
    bool shared = true;
    const TrialOutcome* first = nullptr;
    for (const TrialOutcome& o : last) {
      if (!o.scale) continue;
      if (first == nullptr) first = &o;
      shared = shared && o.scale->height_center == first->scale->height_center &&
               o.scale->height_scale == first->scale->height_scale;
      input.marks.insert(input.marks.end(), o.marks.begin(), o.marks.end());
    }
    if (shared && first != nullptr) {
      input.shared_height_scale = {first->scale->height_center, first->scale->height_scale};
    }
    std::size_t in_window = 0;
    for (const StandardMark& mk : input.marks) in_window += mk.t_bar >= th.window_lo && mk.t_bar < th.window_hi;
    if (last.size() < 1000) {
      insufficient("ppp", std::to_string(last.size()) + " trials, need 1000");
    } else if (in_window < 50) {
      insufficient("ppp", std::to_string(in_window) + " marks in the window, need 50");
    } else {
      for (VerificationEntry& e : verify_ppp(input, limit, *table, th)) report.entries.push_back(std::move(e));
    }
  }

  if (exp.ranked > 1) {
    std::vector<std::vector<double>> per_trial;
    std::size_t complete = 0;
    for (const TrialOutcome& o : last) {
      if (!o.connected) continue;
      per_trial.push_back(o.ranked);
      complete += o.ranked.size() >= m;
    }
    if (complete >= 500) {
      report.entries.push_back(verify_ranked(per_trial, run.q_reference, th));
    } else {
      insufficient("ranked_paths", std::to_string(complete) + " trials with " + std::to_string(m) +
                                       " collision paths, need 500");
    }
  }

  if (config.meta_runs > 0) {
    if (progress != nullptr) *progress << "meta-calibrating verifiers (" << config.meta_runs << " runs)" << std::endl;
    MetaOptions options;
    options.runs = config.meta_runs;
    options.q_reference = th.q_reference;
    options.ranked = std::max<std::size_t>(m, 2);
    options.seed = derive_seed(config.seed, 0x3E7A);
    report.meta = meta_calibrate(limit, run.w_pool, *table, th, options);
  }
  return run;
}

}  // namespace fpp
