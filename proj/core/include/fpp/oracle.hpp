#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "fpp/graph.hpp"

namespace fpp {

/// One small weighted graph with two distinct non-isolated endpoints.
struct OracleInstance {
  WeightedGraph g;
  Vertex u1 = 0;
  Vertex u2 = 0;
  std::string label;
};

/// Instance `index` of the mixed corpus: configuration-model, uniform simple
/// 3-regular and rank-1 graphs with n in [n_min, n_max], cycling through
/// every built-in weight kind and a tabulated law.
OracleInstance oracle_instance(std::uint64_t index, std::uint64_t master, std::size_t n_min = 10,
                               std::size_t n_max = 200);

struct OracleSummary {
  std::size_t instances = 0;
  std::size_t mismatches = 0;
  double max_relative_error = 0.0;
  bool pass() const { return mismatches == 0; }
};

/// Compares the two-source exploration with single-source Dijkstra on
/// `count` corpus instances: hops must agree exactly and weights to a
/// relative 1e-9. Mismatching instances are dumped to `dump` (edge list,
/// endpoints, both paths); `verbose` dumps every instance.
OracleSummary run_oracle(std::size_t count, std::uint64_t master, bool fault, std::ostream* dump,
                         bool verbose = false, std::size_t n_min = 10, std::size_t n_max = 200);

}  // namespace fpp
