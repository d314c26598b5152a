#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "fpp/degrees.hpp"
#include "fpp/discrete.hpp"
#include "fpp/rng.hpp"
#include "fpp/weights.hpp"

namespace fpp {

using Vertex = std::uint32_t;
using HalfEdge = std::uint32_t;
using EdgeId = std::uint32_t;

/// A multigraph stored as paired half-edges, with one weight per edge.
///
/// Half-edges are numbered vertex-major: the half-edges of vertex v are
/// first_half_edge(v) .. first_half_edge(v) + degree(v) - 1. Edges are
/// numbered in increasing order of their smaller half-edge id.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Builds from a degree list and a partner map; validates that the pairing
  /// is a fixed-point-free involution.
  static WeightedGraph from_pairing(std::span<const std::uint32_t> degrees, std::vector<HalfEdge> partner);

  /// Builds from an edge list; half-edges are created vertex-major in edge order.
  static WeightedGraph from_edges(std::size_t n, std::span<const std::pair<Vertex, Vertex>> edges);

  std::size_t vertex_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t half_edge_count() const noexcept { return partner_.size(); }
  std::size_t edge_count() const noexcept { return edge_lower_.size(); }

  HalfEdge first_half_edge(Vertex v) const { return offsets_[v]; }
  std::uint32_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
  Vertex owner(HalfEdge h) const { return owner_[h]; }
  HalfEdge partner(HalfEdge h) const { return partner_[h]; }
  EdgeId edge_of(HalfEdge h) const { return edge_of_[h]; }

  /// Endpoints of edge e, ordered as (owner of lower half-edge, owner of upper).
  std::pair<Vertex, Vertex> endpoints(EdgeId e) const {
    const HalfEdge lo = edge_lower_[e];
    return {owner_[lo], owner_[partner_[lo]]};
  }

  bool has_weights() const noexcept { return !weights_.empty(); }
  double weight(EdgeId e) const { return weights_[e]; }
  double half_edge_weight(HalfEdge h) const { return weights_[edge_of_[h]]; }
  std::span<const double> weights() const noexcept { return weights_; }
  /// Requires one strictly positive weight per edge.
  void set_weights(std::vector<double> weights);

  std::size_t self_loops() const noexcept { return self_loops_; }
  /// Number of surplus parallel edges: sum over vertex pairs of (multiplicity - 1).
  std::size_t multi_edges() const noexcept { return multi_edges_; }
  bool is_simple() const noexcept { return self_loops_ == 0 && multi_edges_ == 0; }

  std::vector<std::uint32_t> degrees() const;

 private:
  void index_edges();

  std::vector<HalfEdge> offsets_;
  std::vector<Vertex> owner_;
  std::vector<HalfEdge> partner_;
  std::vector<EdgeId> edge_of_;
  std::vector<HalfEdge> edge_lower_;
  std::vector<double> weights_;
  std::size_t self_loops_ = 0;
  std::size_t multi_edges_ = 0;
};

/// Uniform perfect matching of the half-edges (sequential uniform pairing).
/// Self-loops and multi-edges are kept and counted.
WeightedGraph pair_configuration(const DegreeSequence& seq, Rng& rng);

struct SimpleGraphSample {
  WeightedGraph graph;
  std::size_t attempts = 0;
};

/// Repeats pair_configuration until the result is simple. Throws
/// CapacityError (with the observed acceptance rate) after `max_attempts`.
SimpleGraphSample sample_uniform_simple(const DegreeSequence& seq, Rng& rng, std::size_t max_attempts);

enum class Rank1Kind { norros_reittu, generalized, chung_lu };

/// Edge probability p_ij for vertex weights (wi, wj) and total weight l_n.
double rank1_edge_probability(Rank1Kind kind, double wi, double wj, double total);

/// Independent edges with probability p_ij; simple graph, possibly with
/// isolated vertices. Uses all-pairs sampling up to 10^4 vertices and a
/// sorted-weight skipping scheme above.
WeightedGraph sample_rank1(std::span<const double> vertex_weights, Rank1Kind kind, Rng& rng);

/// Forces the sampling scheme (for testing their agreement).
WeightedGraph sample_rank1_all_pairs(std::span<const double> vertex_weights, Rank1Kind kind, Rng& rng);
WeightedGraph sample_rank1_skipping(std::span<const double> vertex_weights, Rank1Kind kind, Rng& rng);

/// P(D = k) = E[e^{-W} W^k / k!] for k = 0..kmax, by quadrature against W's law.
std::vector<double> mixed_poisson_pmf(const WeightDistribution& w_law, std::size_t kmax);

/// Mixed-Poisson law truncated where the remaining tail mass is below `tail`.
DiscreteLaw mixed_poisson_law(const WeightDistribution& w_law, double tail = 1e-14);

/// One i.i.d. draw per edge, in edge-id order.
void assign_weights(WeightedGraph& g, const WeightDistribution& dist, Rng& rng);

/// Header "n m seed", then "u v weight" per edge in edge-id order (0-based
/// vertices). Weights are written with 17 significant digits.
void write_edge_list(std::ostream& out, const WeightedGraph& g, std::uint64_t seed);

struct EdgeListFile {
  WeightedGraph graph;
  std::uint64_t seed = 0;
};
EdgeListFile read_edge_list(std::istream& in);

}  // namespace fpp
