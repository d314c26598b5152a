#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpp/config.hpp"
#include "fpp/ctbp.hpp"
#include "fpp/explore.hpp"
#include "fpp/stats.hpp"

namespace fpp {

/// A config resolved into laws and limiting constants.
struct Experiment {
  GraphKind kind = GraphKind::cm;
  std::optional<DegreeModel> degrees;
  std::optional<WeightDistribution> rank1_law;
  WeightDistribution weights = WeightDistribution::exponential(1.0);
  std::size_t simple_max_attempts = 1000;
  std::size_t ranked = 1;
  bool marks = true;
  Thresholds thresholds;
  DiscreteLaw degree_law;  // limiting D
  CtbpConstants limit;

  static Experiment from_config(const ExperimentConfig& config);
  /// Branching-process sampler with root law D and offspring D* - 1.
  QSamplerConfig w_sampler() const;
};

/// Constants recomputed from the realized degrees of one graph.
struct TrialConstants {
  double mu_n = 0.0;
  double nu_n = 0.0;
  double alpha_n = 0.0;
  double nu_bar_n = 0.0;
};
TrialConstants trial_constants(std::span<const std::uint32_t> degrees, const WeightDistribution& weights);

struct TrialOutcome {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::uint32_t hops = 0;
  double weight = 0.0;
  double z_hat = 0.0;  // (H_n - gamma_n log n) / sqrt(beta log n)
  double q_hat = 0.0;  // L_n - log n / alpha_n
  double w1 = 0.0;
  double w2 = 0.0;
  bool connected = false;
  std::size_t resamples = 0;
  std::size_t graph_attempts = 1;
  TrialConstants constants;
  std::vector<double> ranked;      // L_n(i) - log n / alpha_n, ascending
  std::vector<StandardMark> marks;  // collisions with t_bar <= window_hi
  std::optional<MarkScale> scale;
};

/// Seed of trial i at size n: derive_seed(derive_seed(master, n), i).
std::uint64_t trial_seed(std::uint64_t master, std::size_t n, std::size_t trial);

/// One full trial: graph, weights, endpoints (resampled until connected,
/// at most 100 times), exploration, martingale probe and marks.
TrialOutcome run_trial(const Experiment& exp, std::size_t n, std::size_t trial, std::uint64_t master);

/// M trials at size n on `threads` workers (0 = hardware concurrency).
/// Rows are streamed to `csv` in trial order as they complete.
std::vector<TrialOutcome> run_trials(const Experiment& exp, std::size_t n, std::size_t trials,
                                     std::uint64_t master, unsigned threads, std::ostream* csv = nullptr);

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const TrialOutcome& o);

/// Runs fn(i) for i in [0, count) on `threads` workers; rethrows the first
/// exception. Results must be stored by index for order independence.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// `count` independent draws of W conditioned positive; draw i uses
/// derive_seed(seed, i).
std::vector<double> sample_w_pool(const Experiment& exp, std::size_t count, std::uint64_t seed, unsigned threads);

/// Reference samples of Q_1..Q_m. Draw j uses W = (pool[2j], pool[2j+1])
/// and one set of ranked points; `c_shift` is added to c.
std::vector<std::vector<double>> q_references(const CtbpConstants& consts, std::span<const double> w_pool,
                                              std::size_t count, std::size_t m, std::uint64_t seed,
                                              double c_shift = 0.0);

// -- verification ------------------------------------------------------------

struct VerificationEntry {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::size_t sample_size = 0;
  double runtime_s = 0.0;  // kept out of the report documents, which must be reproducible
  std::string detail;
  std::vector<std::pair<std::string, double>> values;
};

struct HopcountRung {
  std::size_t n = 0;
  std::vector<double> z;
  std::vector<long> hops;
  /// Set when every trial shares one centering (then a lattice KS is also reported).
  std::optional<std::pair<double, double>> shared_center_scale;
};

HopcountRung hopcount_rung(std::span<const TrialOutcome> outcomes, const CtbpConstants& limit);

/// KS of Z_hat against Phi at every rung: passes when the last rung's D is
/// below the KS critical value, D decreases along the ladder, and the mean
/// and variance checks hold at the last rung.
VerificationEntry verify_hopcount_clt(std::span<const HopcountRung> ladder, const Thresholds& th);

VerificationEntry verify_weight_limit(std::span<const double> q_hat, std::span<const double> q_reference,
                                      const Thresholds& th);

struct PppInput {
  std::vector<StandardMark> marks;  // pooled over trials
  std::size_t trials = 0;
  std::optional<std::pair<double, double>> shared_height_scale;
};

/// Four sub-tests on the marks inside the window: time slope, source
/// balance, heights (origin and destination), residuals.
std::vector<VerificationEntry> verify_ppp(const PppInput& input, const CtbpConstants& limit,
                                          const ResidualLaw::Table& residual, const Thresholds& th);

/// `per_trial[t]` holds trial t's recentered ranked weights (ascending when
/// correct); `references[i]` is the reference sample of Q_{i+1}. Passes when
/// every rank's two-sample D is below the threshold, weights increase
/// strictly within every trial and the mean gaps decrease with rank.
VerificationEntry verify_ranked(std::span<const std::vector<double>> per_trial,
                                std::span<const std::vector<double>> references, const Thresholds& th);

struct MetaOptions {
  std::size_t runs = 100;
  std::size_t clt_size = 2000;
  std::size_t q_size = 2000;
  std::size_t q_reference = 10'000;
  std::size_t marks = 5000;
  std::size_t ranked = 3;
  std::uint64_t seed = 1;
};

struct MetaResult {
  std::string verifier;
  std::string perturbation;
  std::size_t runs = 0;
  std::size_t null_pass = 0;
  std::size_t power_detect = 0;
  bool pass() const { return null_pass * 100 >= runs * 99 && power_detect * 100 >= runs * 99; }
};

/// Null and power calibration of every verifier on synthetic samples from
/// the limit laws (W values bootstrapped from `w_pool`).
std::vector<MetaResult> meta_calibrate(const CtbpConstants& limit, std::span<const double> w_pool,
                                       const ResidualLaw::Table& residual, const Thresholds& th,
                                       const MetaOptions& options);

/// Marks drawn from the limiting product law on the window. `slope_factor`
/// scales the time rate 2 alpha; the other arguments perturb one component.
std::vector<StandardMark> synthetic_marks(std::size_t count, double alpha, const Thresholds& th,
                                          const ResidualLaw::Table& residual, Rng& rng, double slope_factor = 1.0,
                                          double source_p = 0.5, double height_shift = 0.0,
                                          double residual_shift = 0.0);

struct VerificationReport {
  std::string config_echo;
  std::uint64_t master_seed = 0;
  std::vector<VerificationEntry> entries;
  std::vector<MetaResult> meta;
  std::vector<std::pair<std::string, double>> summary;

  bool all_pass() const;
  std::string to_json() const;
  std::string to_text() const;
};

/// Everything a full run produces; the CLI and the acceptance suite read
/// the samples back for plots and extra checks.
struct ExperimentRun {
  Experiment experiment;
  std::vector<std::vector<TrialOutcome>> rungs;  // one per ladder entry
  std::vector<double> w_pool;                    // empty unless a verifier needed it
  std::vector<std::vector<double>> q_reference;  // Q_1..Q_m reference samples
  VerificationReport report;
};

/// Runs the ladder, streaming outcome rows to `csv` (with header), then
/// every verifier whose sample requirement is met; a verifier without
/// enough data is reported as a failure saying so. `progress` receives one
/// line per stage.
ExperimentRun run_experiment(const ExperimentConfig& config, std::ostream* csv = nullptr,
                             std::ostream* progress = nullptr);

}  // namespace fpp
