#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpp/degrees.hpp"
#include "fpp/discrete.hpp"
#include "fpp/graph.hpp"
#include "fpp/weights.hpp"

namespace fpp {

enum class GraphKind { cm, simple, nr, grg, cl };

GraphKind parse_graph_kind(const std::string& s);
const char* graph_kind_name(GraphKind kind);

/// Degree model for configuration-model graphs:
///   "regular:R", "det:1=0.5,3=0.5", "det:@path", "iid:1=0.5,2=0.5", "iid:@path".
/// Table files are two-column (degree, probability).
struct DegreeModel {
  enum class Kind { regular, deterministic, iid };
  Kind kind = Kind::regular;
  std::uint32_t r = 0;
  std::map<int, double> pmf;
  std::string text;

  static DegreeModel parse(const std::string& s);
  /// The limiting degree law D.
  DiscreteLaw law() const;
  /// The degree sequence for one realization; `rng` is used only for iid.
  DegreeSequence realize(std::size_t n, Rng& rng) const;
};

/// Thresholds of the statistical verifiers. They are engineering
/// calibrations at desk scale, not consequences of the limit theorems.
struct Thresholds {
  double clt_p = 0.001;        // level for the Z_hat KS critical value
  double clt_ks = 0.0;         // fixed Z_hat KS threshold; 0 uses the critical value
  double clt_mean = 0.3;
  double clt_var = 0.3;
  double weight_ks = 0.08;
  double slope_rel = 0.15;
  double source_sigma = 3.0;
  double height_ks = 0.08;
  double residual_ks = 0.05;
  double ranked_ks = 0.1;
  double window_lo = -1.5;
  double window_hi = 0.5;
  std::size_t rate_bins = 20;
  std::size_t q_reference = 10'000;
};

/// An experiment bundle. File format: "[section]" headers, "key = value"
/// lines, '#' or ';' comments. Sections: [graph] (required), [weights]
/// (required), [run], [thresholds].
struct ExperimentConfig {
  GraphKind graph_kind = GraphKind::cm;
  std::optional<DegreeModel> degrees;    // cm and simple
  std::string rank1_weights_text;        // nr, grg, cl
  std::vector<std::size_t> n_ladder{1000};
  std::size_t simple_max_attempts = 1000;
  std::string weights_text;
  std::size_t trials = 100;
  std::size_t ranked = 1;
  bool marks = true;
  std::size_t meta_runs = 100;  // verifier meta-calibration runs; 0 skips it
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::string out_dir = "fpp_out";
  Thresholds thresholds;

  /// Throws ConfigError with "line N" or the missing field's name.
  static ExperimentConfig parse(std::istream& in, const std::string& origin = "<config>");
  static ExperimentConfig load(const std::string& path);

  WeightDistribution weight_law() const;
  std::optional<WeightDistribution> rank1_law() const;
  /// Checks the cross-field invariants (kinds present, ladder increasing, M >= 1).
  void validate() const;
  /// Canonical "section.key = value" lines, for report echoes.
  std::string echo() const;
};

std::vector<std::size_t> parse_size_list(const std::string& s);

}  // namespace fpp
