#include "fpp/dijkstra.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "fpp/errors.hpp"

namespace fpp {

std::optional<DijkstraPath> dijkstra_path(const WeightedGraph& g, Vertex source, Vertex target) {
  const std::size_t n = g.vertex_count();
  if (source >= n || target >= n) throw InvalidArgument("vertex out of range");
  if (!g.has_weights()) throw InvalidArgument("graph has no edge weights");
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> hops(n, 0);
  std::vector<char> done(n, 0);
  std::vector<Vertex> pred(n, source);
  using Item = std::pair<double, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == target) {
      DijkstraPath out{d, hops[u], {}};
      for (Vertex x = target; x != source; x = pred[x]) out.vertices.push_back(x);
      out.vertices.push_back(source);
      std::reverse(out.vertices.begin(), out.vertices.end());
      return out;
    }
    const HalfEdge end = g.first_half_edge(u) + g.degree(u);
    for (HalfEdge h = g.first_half_edge(u); h < end; ++h) {
      const Vertex v = g.owner(g.partner(h));
      const double nd = d + g.half_edge_weight(h);
      if (nd < dist[v]) {
        dist[v] = nd;
        hops[v] = hops[u] + 1;
        pred[v] = u;
        queue.emplace(nd, v);
      }
    }
  }
  return std::nullopt;
}

}  // namespace fpp
