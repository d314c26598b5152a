#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <queue>
#include <vector>

#include "fpp/ctbp.hpp"
#include "fpp/graph.hpp"

namespace fpp {

/// One collision edge: an edge joining the two flow clusters, found at time
/// `time` when source `source` reached the vertex of half-edge `x`. The
/// partner half-edge `partner` belonged to the other cluster.
struct CollisionRecord {
  double time = 0.0;
  int source = 0;                // 0 or 1: the source whose cluster found the edge
  std::uint32_t h_origin = 0;    // height of the vertex just found
  std::uint32_t h_dest = 0;      // height of the alive partner half-edge
  double residual = 0.0;         // remaining lifetime of the partner at `time`
  double path_weight = 0.0;      // 2 time + residual
  std::uint32_t path_hops = 0;   // h_origin + h_dest + 1
  HalfEdge x = 0;
  HalfEdge partner = 0;
};

struct PathResult {
  double weight = 0.0;
  std::uint32_t hops = 0;
  std::size_t winner = 0;  // index into records
  std::vector<Vertex> vertices;  // the winning path, u1 to u2
  std::vector<CollisionRecord> records;
};

/// One vertex discovery; entry 0 of a log is the initial state. `added` and
/// `removed` count alive half-edges created and partners deleted (cycle or
/// collision); the net change in the alive set is added - removed - 1.
struct ExploreEvent {
  std::size_t k = 0;
  double time = 0.0;
  Vertex vertex = 0;
  int source = 0;
  std::uint32_t height = 0;
  std::uint32_t added = 0;
  std::uint32_t removed = 0;
  std::uint32_t collisions = 0;
  std::uint32_t cycles = 0;
  std::size_t first_collision = 0;  // index of this event's first record
  std::size_t alive[2] = {0, 0};
};

struct ExploreOptions {
  bool record_events = false;
  /// Re-derives the alive counts and cluster disjointness after every event (O(l_n)).
  bool check_invariants = false;
  /// Test hook: the first event treats the two earliest deaths as tied and
  /// breaks the tie the wrong way (the later half-edge fires at the earlier time).
  bool fault_swap_first_pops = false;
};

/// The two-source flow-cluster exploration on a weighted graph.
///
/// Both clusters grow at unit speed. An alive half-edge dies at its absolute
/// death time (discovery time of its vertex plus the edge weight) and its
/// partner's vertex joins the dying half-edge's cluster.
class SwgExplorer {
 public:
  SwgExplorer(const WeightedGraph& g, Vertex u1, Vertex u2, ExploreOptions options = {});

  /// Processes the next event. Returns false when the alive set is empty.
  bool step();

  /// Death time of the earliest alive half-edge, or nullopt when none is alive.
  std::optional<double> next_event_time();

  /// Steps while the next event happens at or before `t`.
  void advance_to(double t);

  /// Steps until no better path than the current best can appear, the
  /// alive set is empty, or both; never stops before `min_horizon`. With
  /// `rank` > 1 the stopping rule uses the rank-th best collision instead.
  void finish(bool early_stop = true, double min_horizon = 0.0, std::size_t rank = 1);

  double time() const noexcept { return time_; }
  std::size_t events() const noexcept { return k_; }
  std::size_t alive_count(int source) const { return alive_count_[source]; }
  const std::vector<CollisionRecord>& records() const noexcept { return records_; }
  const std::vector<ExploreEvent>& event_log() const noexcept { return log_; }
  int vertex_source(Vertex v) const { return source_of_[v]; }
  std::uint32_t vertex_height(Vertex v) const { return height_of_[v]; }

  /// Vertices of the path closed by `record`, from u1 to u2.
  std::vector<Vertex> path_vertices(const CollisionRecord& record) const;

  /// Best path among the collisions recorded so far.
  std::optional<PathResult> result() const;

  /// Event log as text: "k T vertex|cycle|collision payload" per line.
  void dump_events(std::ostream& out) const;

 private:
  struct HeapEntry {
    double death;
    HalfEdge h;
    bool operator>(const HeapEntry& o) const { return death > o.death || (death == o.death && h > o.h); }
  };

  void discover(Vertex v, int source, std::uint32_t height, double t, ExploreEvent* event);
  void make_alive(HalfEdge h, int source, std::uint32_t height, double death);
  void kill(HalfEdge h);
  std::optional<HeapEntry> pop_alive();
  void verify_state() const;
  double stop_threshold(std::size_t rank) const;

  const WeightedGraph* g_;
  ExploreOptions options_;
  std::vector<std::int8_t> source_of_;  // -1 while unfound
  std::vector<std::uint32_t> height_of_;
  std::vector<Vertex> parent_of_;  // the neighbour a vertex was found from
  std::vector<std::int8_t> alive_source_;  // -1 unless the half-edge is alive
  std::vector<std::uint32_t> alive_height_;
  std::vector<double> death_;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap_;
  std::size_t alive_count_[2] = {0, 0};
  std::vector<CollisionRecord> records_;
  std::vector<double> sorted_weights_;  // collision path weights, ascending
  std::vector<ExploreEvent> log_;
  double time_ = 0.0;
  std::size_t k_ = 0;
};

/// L_n and H_n between u1 and u2, or nullopt when they are disconnected.
/// Throws InvalidArgument for u1 == u2 or an isolated endpoint.
std::optional<PathResult> shortest_path(const WeightedGraph& g, Vertex u1, Vertex u2, bool early_stop = true);

struct RankedPaths {
  std::vector<CollisionRecord> paths;  // ascending weight, at most m
  bool incomplete = false;             // fewer than m collision edges exist
};

/// The m lightest collision-edge paths.
RankedPaths ranked_paths(const WeightedGraph& g, Vertex u1, Vertex u2, std::size_t m);

struct MartingaleProbe {
  double s_n = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
};

/// s_n = log(log n) / alpha_n, so that e^{alpha_n s_n} = log n.
double probe_time(std::size_t n, double alpha_n);

/// W_i = e^{-alpha_n s_n} times the alive count of cluster i at s_n, read
/// from a recorded event log (entry 0 is the state after initialisation).
/// Throws InvalidArgument when the log ends before s_n with half-edges
/// still alive.
MartingaleProbe measure_martingale(const std::vector<ExploreEvent>& log, std::size_t n, double alpha_n);

/// Same measurement on a live explorer: advances it to s_n and reads the counts.
MartingaleProbe measure_martingale(SwgExplorer& explorer, std::size_t n, double alpha_n);

/// A collision in the coordinates of the limiting point process.
struct StandardMark {
  double t_bar = 0.0;
  int source = 0;
  double h_origin = 0.0;
  double h_dest = 0.0;
  double residual = 0.0;
  std::uint32_t raw_origin = 0;
  std::uint32_t raw_dest = 0;
};

struct MarkScale {
  double t_n = 0.0;      // log n / (2 alpha_n)
  double t_bar_n = 0.0;  // t_n - log(W1 W2) / (2 alpha_n)
  double height_center = 0.0;  // t_n / nu_bar_n
  double height_scale = 0.0;   // sqrt(sigma_bar^2 t_n / nu_bar^3)
};

/// `alpha_n`, `nu_bar_n` come from the realized degrees; `limit` supplies
/// sigma_bar^2 and nu_bar for the spread. Throws InvalidArgument if W1 W2 = 0.
MarkScale mark_scale(std::size_t n, double alpha_n, double nu_bar_n, const CtbpConstants& limit,
                     double w1, double w2);

std::vector<StandardMark> standardize_marks(const std::vector<CollisionRecord>& records, const MarkScale& scale);

}  // namespace fpp
