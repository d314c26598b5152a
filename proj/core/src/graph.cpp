#include "fpp/graph.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "fpp/errors.hpp"

namespace fpp {

WeightedGraph WeightedGraph::from_pairing(std::span<const std::uint32_t> degrees,
                                          std::vector<HalfEdge> partner) {
  WeightedGraph g;
  g.offsets_.resize(degrees.size() + 1, 0);
  for (std::size_t v = 0; v < degrees.size(); ++v) g.offsets_[v + 1] = g.offsets_[v] + degrees[v];
  const std::size_t total = g.offsets_.back();
  if (partner.size() != total) throw InvalidArgument("pairing size does not match the total degree");
  g.owner_.resize(total);
  for (std::size_t v = 0; v < degrees.size(); ++v) {
    std::fill(g.owner_.begin() + g.offsets_[v], g.owner_.begin() + g.offsets_[v + 1], static_cast<Vertex>(v));
  }
  for (std::size_t h = 0; h < total; ++h) {
    const HalfEdge p = partner[h];
    if (p >= total || p == h || partner[p] != h) {
      throw InvalidArgument("pairing is not a fixed-point-free involution at half-edge " + std::to_string(h));
    }
  }
  g.partner_ = std::move(partner);
  g.index_edges();
  return g;
}

WeightedGraph WeightedGraph::from_edges(std::size_t n, std::span<const std::pair<Vertex, Vertex>> edges) {
  std::vector<std::uint32_t> degrees(n, 0);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw InvalidArgument("edge endpoint out of range");
    ++degrees[u];
    ++degrees[v];
  }
  std::vector<HalfEdge> cursor(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) cursor[v + 1] = cursor[v] + degrees[v];
  std::vector<HalfEdge> partner(cursor[n]);
  for (const auto& [u, v] : edges) {
    const HalfEdge hu = cursor[u]++;
    const HalfEdge hv = cursor[v]++;
    partner[hu] = hv;
    partner[hv] = hu;
  }
  return from_pairing(degrees, std::move(partner));
}

void WeightedGraph::index_edges() {
  const std::size_t total = partner_.size();
  edge_of_.assign(total, 0);
  edge_lower_.clear();
  edge_lower_.reserve(total / 2);
  self_loops_ = 0;
  for (HalfEdge h = 0; h < total; ++h) {
    const HalfEdge p = partner_[h];
    if (h > p) continue;
    const auto e = static_cast<EdgeId>(edge_lower_.size());
    edge_lower_.push_back(h);
    edge_of_[h] = e;
    edge_of_[p] = e;
    if (owner_[h] == owner_[p]) ++self_loops_;
  }
  // mark[v] == u while scanning u means v was already seen as a neighbour.
  multi_edges_ = 0;
  const std::size_t n = vertex_count();
  std::vector<Vertex> mark(n, static_cast<Vertex>(-1));
  for (Vertex u = 0; u < n; ++u) {
    for (HalfEdge h = offsets_[u]; h < offsets_[u + 1]; ++h) {
      const Vertex v = owner_[partner_[h]];
      if (v <= u) continue;
      if (mark[v] == u) {
        ++multi_edges_;
      } else {
        mark[v] = u;
      }
    }
  }
  weights_.clear();
}

void WeightedGraph::set_weights(std::vector<double> weights) {
  if (weights.size() != edge_count()) throw InvalidArgument("need exactly one weight per edge");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("edge weights must be strictly positive");
  }
  weights_ = std::move(weights);
}

std::vector<std::uint32_t> WeightedGraph::degrees() const {
  std::vector<std::uint32_t> out(vertex_count());
  for (Vertex v = 0; v < out.size(); ++v) out[v] = degree(v);
  return out;
}

WeightedGraph pair_configuration(const DegreeSequence& seq, Rng& rng) {
  const std::size_t total = seq.total_degree();
  std::vector<HalfEdge> pool(total);
  std::iota(pool.begin(), pool.end(), HalfEdge{0});
  std::vector<HalfEdge> partner(total);
  for (std::size_t i = 0; i + 1 < total; i += 2) {
    const std::size_t j = i + 1 + rng.below(total - i - 1);
    std::swap(pool[i + 1], pool[j]);
    partner[pool[i]] = pool[i + 1];
    partner[pool[i + 1]] = pool[i];
  }
  return WeightedGraph::from_pairing(seq.degrees(), std::move(partner));
}

SimpleGraphSample sample_uniform_simple(const DegreeSequence& seq, Rng& rng, std::size_t max_attempts) {
  if (max_attempts == 0) throw InvalidArgument("max_attempts must be at least 1");
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    WeightedGraph g = pair_configuration(seq, rng);
    if (g.is_simple()) return {std::move(g), attempt};
  }
  throw CapacityError("no simple graph in " + std::to_string(max_attempts) +
                      " attempts (empirical acceptance rate 0/" + std::to_string(max_attempts) + ")");
}

double rank1_edge_probability(Rank1Kind kind, double wi, double wj, double total) {
  const double x = wi * wj / total;
  switch (kind) {
    case Rank1Kind::norros_reittu: return -std::expm1(-x);
    case Rank1Kind::generalized: return x / (1.0 + x);
    case Rank1Kind::chung_lu: return std::min(x, 1.0);
  }
  return 0.0;
}

namespace {

double checked_total(std::span<const double> w) {
  if (w.size() < 2) throw InvalidArgument("rank-1 graph needs at least two vertices");
  double total = 0.0;
  for (double x : w) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("rank-1 vertex weights must be positive");
    total += x;
  }
  return total;
}

}  // namespace

WeightedGraph sample_rank1_all_pairs(std::span<const double> w, Rank1Kind kind, Rng& rng) {
  const double total = checked_total(w);
  std::vector<std::pair<Vertex, Vertex>> edges;
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < rank1_edge_probability(kind, w[i], w[j], total)) {
        edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
      }
    }
  }
  return WeightedGraph::from_edges(n, edges);
}

WeightedGraph sample_rank1_skipping(std::span<const double> w, Rank1Kind kind, Rng& rng) {
  const double total = checked_total(w);
  const std::size_t n = w.size();
  std::vector<Vertex> order(n);
  std::iota(order.begin(), order.end(), Vertex{0});
  std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return w[a] > w[b]; });

  // p_ij is increasing in w_j, so along the sorted order the current p is an
  // upper bound for every later j: skip geometrically, then thin.
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double wi = w[order[i]];
    std::size_t j = i + 1;
    double bound = rank1_edge_probability(kind, wi, w[order[j]], total);
    while (j < n && bound > 0.0) {
      if (bound < 1.0) {
        const double skip = std::floor(std::log(rng.uniform()) / std::log1p(-bound));
        if (skip >= static_cast<double>(n - j)) break;
        j += static_cast<std::size_t>(skip);
      }
      const double p = rank1_edge_probability(kind, wi, w[order[j]], total);
      if (rng.uniform() < p / bound) {
        const Vertex a = order[i];
        const Vertex b = order[j];
        edges.emplace_back(std::min(a, b), std::max(a, b));
      }
      bound = p;
      ++j;
    }
  }
  std::sort(edges.begin(), edges.end());
  return WeightedGraph::from_edges(n, edges);
}

WeightedGraph sample_rank1(std::span<const double> w, Rank1Kind kind, Rng& rng) {
  if (w.size() <= 10'000) return sample_rank1_all_pairs(w, kind, rng);
  return sample_rank1_skipping(w, kind, rng);
}

namespace {

double mixed_poisson_term(const WeightDistribution& w_law, std::size_t k) {
  const double kk = static_cast<double>(k);
  const double lg = std::lgamma(kk + 1.0);
  return integrate_against_density(
      w_law,
      [kk, lg](double x) {
        if (x <= 0.0) return kk == 0.0 ? 1.0 : 0.0;
        return std::exp(-x + kk * std::log(x) - lg);
      },
      0.0, 0.0, QuadratureOptions{1e-16, 1e-11, 4000});
}

}  // namespace

std::vector<double> mixed_poisson_pmf(const WeightDistribution& w_law, std::size_t kmax) {
  std::vector<double> pmf(kmax + 1);
  for (std::size_t k = 0; k <= kmax; ++k) pmf[k] = mixed_poisson_term(w_law, k);
  return pmf;
}

DiscreteLaw mixed_poisson_law(const WeightDistribution& w_law, double tail) {
  std::vector<double> probs;
  double mass = 0.0;
  for (std::size_t k = 0; k < 10'000; ++k) {
    probs.push_back(mixed_poisson_term(w_law, k));
    mass += probs.back();
    if (1.0 - mass < tail && k > 0) break;
  }
  return DiscreteLaw(std::move(probs), 1e-8);
}

void assign_weights(WeightedGraph& g, const WeightDistribution& dist, Rng& rng) {
  std::vector<double> weights(g.edge_count());
  for (double& w : weights) {
    do {
      w = dist.sample(rng);
    } while (!(w > 0.0));
  }
  g.set_weights(std::move(weights));
}

void write_edge_list(std::ostream& out, const WeightedGraph& g, std::uint64_t seed) {
  out << g.vertex_count() << ' ' << g.edge_count() << ' ' << seed << '\n';
  char buf[64];
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto [u, v] = g.endpoints(e);
    const double w = g.has_weights() ? g.weight(e) : 0.0;
    std::snprintf(buf, sizeof buf, "%.17g", w);
    out << u << ' ' << v << ' ' << buf << '\n';
  }
}

EdgeListFile read_edge_list(std::istream& in) {
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  if (!(in >> n >> m >> seed)) throw InvalidArgument("edge list: missing 'n m seed' header");
  std::vector<std::pair<Vertex, Vertex>> edges(m);
  std::vector<double> weights(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(in >> edges[i].first >> edges[i].second >> weights[i])) {
      throw InvalidArgument("edge list: truncated at edge " + std::to_string(i));
    }
  }
  // from_edges creates half-edges vertex-major in list order, so edge i's
  // lower half-edge is the i-th created at its first endpoint; recover ids.
  WeightedGraph g = WeightedGraph::from_edges(n, edges);
  std::vector<HalfEdge> cursor(n);
  for (Vertex v = 0; v < n; ++v) cursor[v] = g.first_half_edge(v);
  std::vector<double> by_id(m);
  for (std::size_t i = 0; i < m; ++i) {
    const HalfEdge hu = cursor[edges[i].first]++;
    cursor[edges[i].second]++;
    by_id[g.edge_of(hu)] = weights[i];
  }
  bool weighted = std::all_of(by_id.begin(), by_id.end(), [](double w) { return w > 0.0; });
  if (weighted) g.set_weights(std::move(by_id));
  return {std::move(g), seed};
}

}  // namespace fpp
