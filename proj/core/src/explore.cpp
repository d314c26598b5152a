#include "fpp/explore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "fpp/errors.hpp"

namespace fpp {

SwgExplorer::SwgExplorer(const WeightedGraph& g, Vertex u1, Vertex u2, ExploreOptions options)
    : g_(&g), options_(options) {
  const std::size_t n = g.vertex_count();
  if (u1 >= n || u2 >= n) throw InvalidArgument("endpoint out of range");
  if (u1 == u2) throw InvalidArgument("the two sources must be distinct vertices");
  if (g.degree(u1) == 0 || g.degree(u2) == 0) throw InvalidArgument("isolated endpoint");
  if (!g.has_weights()) throw InvalidArgument("graph has no edge weights");

  source_of_.assign(n, -1);
  height_of_.assign(n, 0);
  parent_of_.resize(n);
  parent_of_[u1] = u1;
  parent_of_[u2] = u2;
  alive_source_.assign(g.half_edge_count(), -1);
  alive_height_.assign(g.half_edge_count(), 0);
  death_.assign(g.half_edge_count(), 0.0);

  ExploreEvent event;
  event.vertex = u2;
  event.source = 1;
  source_of_[u1] = 0;
  source_of_[u2] = 1;
  const HalfEdge end1 = g.first_half_edge(u1) + g.degree(u1);
  for (HalfEdge h = g.first_half_edge(u1); h < end1; ++h) {
    if (g.owner(g.partner(h)) == u1) continue;
    make_alive(h, 0, 0, g.half_edge_weight(h));
    ++event.added;
  }
  const HalfEdge end2 = g.first_half_edge(u2) + g.degree(u2);
  for (HalfEdge h = g.first_half_edge(u2); h < end2; ++h) {
    const HalfEdge p = g.partner(h);
    if (g.owner(p) == u2) continue;
    if (alive_source_[p] == 0) {
      CollisionRecord rec;
      rec.time = 0.0;
      rec.source = 1;
      rec.residual = death_[p];
      rec.path_weight = death_[p];
      rec.path_hops = 1;
      rec.x = h;
      rec.partner = p;
      records_.push_back(rec);
      sorted_weights_.insert(std::upper_bound(sorted_weights_.begin(), sorted_weights_.end(), rec.path_weight),
                             rec.path_weight);
      kill(p);
      ++event.removed;
      ++event.collisions;
    } else {
      make_alive(h, 1, 0, g.half_edge_weight(h));
      ++event.added;
    }
  }
  if (options_.record_events) {
    event.alive[0] = alive_count_[0];
    event.alive[1] = alive_count_[1];
    log_.push_back(event);
  }
  if (options_.check_invariants) verify_state();
}

void SwgExplorer::make_alive(HalfEdge h, int source, std::uint32_t height, double death) {
  alive_source_[h] = static_cast<std::int8_t>(source);
  alive_height_[h] = height;
  death_[h] = death;
  ++alive_count_[source];
  heap_.push({death, h});
}

void SwgExplorer::kill(HalfEdge h) {
  --alive_count_[alive_source_[h]];
  alive_source_[h] = -1;
}

std::optional<SwgExplorer::HeapEntry> SwgExplorer::pop_alive() {
  while (!heap_.empty()) {
    const HeapEntry top = heap_.top();
    heap_.pop();
    if (alive_source_[top.h] >= 0) return top;
  }
  return std::nullopt;
}

std::optional<double> SwgExplorer::next_event_time() {
  while (!heap_.empty() && alive_source_[heap_.top().h] < 0) heap_.pop();
  if (heap_.empty()) return std::nullopt;
  return heap_.top().death;
}

bool SwgExplorer::step() {
  std::optional<HeapEntry> entry = pop_alive();
  if (!entry) return false;
  if (options_.fault_swap_first_pops && k_ == 0) {
    if (std::optional<HeapEntry> second = pop_alive()) {
      heap_.push(*entry);
      second->death = entry->death;
      entry = second;
    }
  }
  const WeightedGraph& g = *g_;
  const HalfEdge y = entry->h;
  const int s = alive_source_[y];
  const std::uint32_t height = alive_height_[y] + 1;
  time_ = entry->death;
  ++k_;
  kill(y);

  const HalfEdge z = g.partner(y);
  const Vertex v = g.owner(z);
  if (source_of_[v] >= 0) {
    throw Error("exploration reached an already found vertex " + std::to_string(v));
  }
  parent_of_[v] = g.owner(y);
  ExploreEvent event;
  event.k = k_;
  event.time = time_;
  event.first_collision = records_.size();
  discover(v, s, height, time_, &event);
  if (options_.record_events) {
    event.alive[0] = alive_count_[0];
    event.alive[1] = alive_count_[1];
    log_.push_back(event);
  }
  if (options_.check_invariants) verify_state();
  return true;
}

void SwgExplorer::discover(Vertex v, int source, std::uint32_t height, double t, ExploreEvent* event) {
  const WeightedGraph& g = *g_;
  source_of_[v] = static_cast<std::int8_t>(source);
  height_of_[v] = height;
  event->vertex = v;
  event->source = source;
  event->height = height;
  const HalfEdge first = g.first_half_edge(v);
  const HalfEdge end = first + g.degree(v);
  for (HalfEdge x = first; x < end; ++x) {
    const HalfEdge p = g.partner(x);
    const int other = alive_source_[p];
    // Self-loops, the half-edge we arrived by, and partners already consumed.
    if (other < 0 && source_of_[g.owner(p)] >= 0) continue;
    if (other == source) {
      kill(p);
      ++event->removed;
      ++event->cycles;
    } else if (other >= 0) {
      CollisionRecord rec;
      rec.time = t;
      rec.source = source;
      rec.h_origin = height;
      rec.h_dest = alive_height_[p];
      rec.residual = death_[p] - t;
      rec.path_weight = 2.0 * t + rec.residual;
      rec.path_hops = rec.h_origin + rec.h_dest + 1;
      rec.x = x;
      rec.partner = p;
      records_.push_back(rec);
      sorted_weights_.insert(std::upper_bound(sorted_weights_.begin(), sorted_weights_.end(), rec.path_weight),
                             rec.path_weight);
      kill(p);
      ++event->removed;
      ++event->collisions;
    } else {
      make_alive(x, source, height, t + g.half_edge_weight(x));
      ++event->added;
    }
  }
}

void SwgExplorer::advance_to(double t) {
  for (auto next = next_event_time(); next && *next <= t; next = next_event_time()) step();
}

double SwgExplorer::stop_threshold(std::size_t rank) const {
  if (rank == 0 || sorted_weights_.size() < rank) return std::numeric_limits<double>::infinity();
  return sorted_weights_[rank - 1] / 2.0;
}

void SwgExplorer::finish(bool early_stop, double min_horizon, std::size_t rank) {
  for (auto next = next_event_time(); next; next = next_event_time()) {
    if (early_stop && *next > stop_threshold(rank) && *next > min_horizon) break;
    step();
  }
}

std::vector<Vertex> SwgExplorer::path_vertices(const CollisionRecord& record) const {
  auto chain = [&](Vertex v) {
    std::vector<Vertex> out{v};
    while (parent_of_[v] != v) {
      v = parent_of_[v];
      out.push_back(v);
    }
    return out;
  };
  std::vector<Vertex> near = chain(g_->owner(record.x));
  std::vector<Vertex> far = chain(g_->owner(record.partner));
  if (record.source == 1) std::swap(near, far);
  std::reverse(near.begin(), near.end());
  near.insert(near.end(), far.begin(), far.end());
  return near;
}

std::optional<PathResult> SwgExplorer::result() const {
  if (records_.empty()) return std::nullopt;
  PathResult out;
  for (std::size_t i = 1; i < records_.size(); ++i) {
    if (records_[i].path_weight < records_[out.winner].path_weight) out.winner = i;
  }
  out.weight = records_[out.winner].path_weight;
  out.hops = records_[out.winner].path_hops;
  out.vertices = path_vertices(records_[out.winner]);
  out.records = records_;
  return out;
}

void SwgExplorer::verify_state() const {
  const WeightedGraph& g = *g_;
  std::size_t counts[2] = {0, 0};
  for (HalfEdge h = 0; h < alive_source_.size(); ++h) {
    const int s = alive_source_[h];
    if (s < 0) continue;
    ++counts[s];
    if (source_of_[g.owner(h)] != s) throw Error("alive half-edge outside its own cluster");
    if (source_of_[g.owner(g.partner(h))] >= 0) throw Error("alive half-edge points into a cluster");
    if (death_[h] < time_ && !options_.fault_swap_first_pops) throw Error("alive half-edge died in the past");
  }
  if (counts[0] != alive_count_[0] || counts[1] != alive_count_[1]) throw Error("alive counts out of sync");
}

void SwgExplorer::dump_events(std::ostream& out) const {
  char buf[160];
  for (std::size_t i = 0; i < log_.size(); ++i) {
    const ExploreEvent& e = log_[i];
    std::snprintf(buf, sizeof buf, "%zu %.17g vertex %u I=%d H=%u added=%u removed=%u alive=%zu,%zu\n", e.k, e.time,
                  e.vertex, e.source + 1, e.height, e.added, e.removed, e.alive[0], e.alive[1]);
    out << buf;
    if (e.cycles > 0) {
      std::snprintf(buf, sizeof buf, "%zu %.17g cycle %u\n", e.k, e.time, e.cycles);
      out << buf;
    }
    const std::size_t end = e.first_collision + e.collisions;
    for (std::size_t r = e.first_collision; r < end && r < records_.size(); ++r) {
      const CollisionRecord& c = records_[r];
      std::snprintf(buf, sizeof buf, "%zu %.17g collision I=%d h_or=%u h_de=%u R=%.17g L=%.17g\n", e.k, e.time,
                    c.source + 1, c.h_origin, c.h_dest, c.residual, c.path_weight);
      out << buf;
    }
  }
}

std::optional<PathResult> shortest_path(const WeightedGraph& g, Vertex u1, Vertex u2, bool early_stop) {
  SwgExplorer explorer(g, u1, u2);
  explorer.finish(early_stop);
  return explorer.result();
}

RankedPaths ranked_paths(const WeightedGraph& g, Vertex u1, Vertex u2, std::size_t m) {
  if (m == 0) throw InvalidArgument("ranked_paths needs m >= 1");
  SwgExplorer explorer(g, u1, u2);
  explorer.finish(true, 0.0, m);
  RankedPaths out;
  out.paths = explorer.records();
  std::stable_sort(out.paths.begin(), out.paths.end(),
                   [](const CollisionRecord& a, const CollisionRecord& b) { return a.path_weight < b.path_weight; });
  if (out.paths.size() > m) out.paths.resize(m);
  out.incomplete = out.paths.size() < m;
  return out;
}

double probe_time(std::size_t n, double alpha_n) {
  const double loglog = std::log(std::log(static_cast<double>(n)));
  if (!(loglog > 0.0)) throw InvalidArgument("probe time needs n > e");
  if (!(alpha_n > 0.0)) throw InvalidArgument("alpha_n must be positive");
  return loglog / alpha_n;
}

MartingaleProbe measure_martingale(const std::vector<ExploreEvent>& log, std::size_t n, double alpha_n) {
  if (log.empty()) throw InvalidArgument("empty event log");
  MartingaleProbe out;
  out.s_n = probe_time(n, alpha_n);
  const ExploreEvent* at = &log.front();
  for (const ExploreEvent& e : log) {
    if (e.time > out.s_n) break;
    at = &e;
  }
  const bool ended = at == &log.back();
  if (ended && at->alive[0] + at->alive[1] > 0) {
    throw InvalidArgument("event log ends before s_n; rerun with a longer horizon");
  }
  const double scale = std::exp(-alpha_n * out.s_n);
  out.w1 = scale * static_cast<double>(at->alive[0]);
  out.w2 = scale * static_cast<double>(at->alive[1]);
  return out;
}

MartingaleProbe measure_martingale(SwgExplorer& explorer, std::size_t n, double alpha_n) {
  MartingaleProbe out;
  out.s_n = probe_time(n, alpha_n);
  if (explorer.time() > out.s_n) throw InvalidArgument("explorer already advanced past s_n");
  explorer.advance_to(out.s_n);
  const double scale = std::exp(-alpha_n * out.s_n);
  out.w1 = scale * static_cast<double>(explorer.alive_count(0));
  out.w2 = scale * static_cast<double>(explorer.alive_count(1));
  return out;
}

MarkScale mark_scale(std::size_t n, double alpha_n, double nu_bar_n, const CtbpConstants& limit, double w1,
                     double w2) {
  if (!(w1 > 0.0) || !(w2 > 0.0)) throw InvalidArgument("mark standardization needs W1 W2 > 0");
  MarkScale s;
  const double logn = std::log(static_cast<double>(n));
  s.t_n = logn / (2.0 * alpha_n);
  s.t_bar_n = s.t_n - std::log(w1 * w2) / (2.0 * alpha_n);
  s.height_center = s.t_n / nu_bar_n;
  s.height_scale = std::sqrt(limit.sigma_bar_sq * s.t_n / std::pow(limit.nu_bar, 3));
  return s;
}

std::vector<StandardMark> standardize_marks(const std::vector<CollisionRecord>& records, const MarkScale& scale) {
  std::vector<StandardMark> out;
  out.reserve(records.size());
  for (const CollisionRecord& r : records) {
    StandardMark m;
    m.t_bar = r.time - scale.t_bar_n;
    m.source = r.source;
    m.h_origin = (static_cast<double>(r.h_origin) - scale.height_center) / scale.height_scale;
    m.h_dest = (static_cast<double>(r.h_dest) - scale.height_center) / scale.height_scale;
    m.residual = r.residual;
    m.raw_origin = r.h_origin;
    m.raw_dest = r.h_dest;
    out.push_back(m);
  }
  return out;
}

}  // namespace fpp
