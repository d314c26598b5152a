#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fpp/graph.hpp"

namespace fpp {

struct DijkstraPath {
  double weight = 0.0;
  std::uint32_t hops = 0;
  std::vector<Vertex> vertices;  // source to target
};

/// Plain single-source Dijkstra from `source`, stopped when `target` is
/// settled. Hops are counted along the shortest-path tree.
std::optional<DijkstraPath> dijkstra_path(const WeightedGraph& g, Vertex source, Vertex target);

}  // namespace fpp
