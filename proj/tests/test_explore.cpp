#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "fpp/dijkstra.hpp"
#include "fpp/errors.hpp"
#include "fpp/explore.hpp"
#include "fpp/oracle.hpp"
#include "fpp/stats.hpp"

using namespace fpp;

namespace {

WeightedGraph weighted(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges,
                       const std::vector<double>& w) {
  WeightedGraph g = WeightedGraph::from_edges(n, edges);
  // Edge ids follow the lower half-edge; map file order to ids through the endpoints.
  std::vector<double> by_id(g.edge_count());
  std::vector<bool> used(edges.size(), false);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto [a, b] = g.endpoints(e);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto [u, v] = edges[i];
      if (!used[i] && ((u == a && v == b) || (u == b && v == a))) {
        by_id[e] = w[i];
        used[i] = true;
        break;
      }
    }
  }
  g.set_weights(by_id);
  return g;
}

struct Reference {
  double weight = std::numeric_limits<double>::infinity();
  std::uint32_t hops = 0;
};

// Bellman-Ford on the edge list; hops follow the relaxation tree.
Reference bellman_ford(const WeightedGraph& g, Vertex s, Vertex t) {
  const std::size_t n = g.vertex_count();
  std::vector<double> d(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> hops(n, 0);
  d[s] = 0;
  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      const auto [a, b] = g.endpoints(e);
      const double w = g.weight(e);
      if (d[a] + w < d[b]) {
        d[b] = d[a] + w;
        hops[b] = hops[a] + 1;
        changed = true;
      }
      if (d[b] + w < d[a]) {
        d[a] = d[b] + w;
        hops[a] = hops[b] + 1;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return {d[t], hops[t]};
}

OracleInstance corpus_instance(std::uint64_t seed) { return oracle_instance(seed, 20240601); }

// Lightest edge between two adjacent vertices, by scanning u's half-edges.
double lightest_edge(const WeightedGraph& g, Vertex u, Vertex v) {
  double best = std::numeric_limits<double>::infinity();
  const HalfEdge end = g.first_half_edge(u) + g.degree(u);
  for (HalfEdge h = g.first_half_edge(u); h < end; ++h) {
    if (g.owner(g.partner(h)) == v) best = std::min(best, g.half_edge_weight(h));
  }
  return best;
}

}  // namespace

TEST_SUITE("explore") {
  TEST_CASE("single edge") {
    const WeightedGraph g = weighted(2, {{0, 1}}, {0.7});
    SwgExplorer ex(g, 0, 1);
    REQUIRE(ex.records().size() == 1);
    const CollisionRecord& r = ex.records()[0];
    CHECK(r.time == 0.0);
    CHECK(r.residual == 0.7);
    CHECK(r.h_origin == 0);
    CHECK(r.h_dest == 0);
    CHECK(ex.alive_count(0) + ex.alive_count(1) == 0);
    const auto res = shortest_path(g, 0, 1);
    REQUIRE(res);
    CHECK(res->weight == 0.7);
    CHECK(res->hops == 1);
  }

  TEST_CASE("endpoint with only a self-loop") {
    const std::vector<std::uint32_t> d{2, 1, 1};
    WeightedGraph g = WeightedGraph::from_pairing(d, {1, 0, 3, 2});
    g.set_weights({1.0, 1.0});
    SwgExplorer ex(g, 0, 1);
    CHECK(ex.alive_count(0) == 0);
    CHECK_FALSE(shortest_path(g, 0, 1).has_value());
  }

  TEST_CASE("star with a leaf source") {
    const WeightedGraph g = weighted(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, {1, 2, 3, 4});
    SwgExplorer ex(g, 0, 3);
    CHECK(ex.records().size() == 1);
    CHECK(ex.records()[0].time == 0.0);
    CHECK(ex.alive_count(0) == 3);
    CHECK(ex.alive_count(1) == 0);
  }

  TEST_CASE("invalid endpoints") {
    const WeightedGraph g = weighted(3, {{0, 1}}, {1.0});
    CHECK_THROWS_AS(SwgExplorer(g, 0, 0), InvalidArgument);
    CHECK_THROWS_AS(SwgExplorer(g, 0, 2), InvalidArgument);
    CHECK_THROWS_AS(SwgExplorer(WeightedGraph::from_edges(2, std::vector<std::pair<Vertex, Vertex>>{{0, 1}}), 0, 1),
                    InvalidArgument);
  }

  TEST_CASE("path of two edges") {
    for (auto [a, b] : {std::pair{0.3, 1.1}, std::pair{1.1, 0.3}}) {
      const WeightedGraph g = weighted(3, {{0, 1}, {1, 2}}, {a, b});
      SwgExplorer ex(g, 0, 2);
      REQUIRE(ex.step());
      CHECK(ex.time() == std::min(a, b));
      REQUIRE(ex.records().size() == 1);
      const CollisionRecord& r = ex.records()[0];
      CHECK(r.time == std::min(a, b));
      CHECK(r.residual == doctest::Approx(std::max(a, b) - std::min(a, b)));
      CHECK(r.path_weight == doctest::Approx(a + b));
      CHECK(r.path_hops == 2);
      CHECK(r.source == (a < b ? 0 : 1));
    }
  }

  TEST_CASE("triangle over every weight ordering") {
    std::vector<double> w{1.0, 1.7, 2.9};
    do {
      const WeightedGraph g = weighted(3, {{0, 1}, {1, 2}, {0, 2}}, w);
      const auto res = shortest_path(g, 0, 1, false);
      REQUIRE(res);
      const double two_hop = w[1] + w[2];
      CHECK(res->weight == doctest::Approx(std::min(w[0], two_hop)));
      CHECK(res->hops == (w[0] < two_hop ? 1u : 2u));

      const RankedPaths ranked = ranked_paths(g, 0, 1, 2);
      REQUIRE(ranked.paths.size() == 2);
      CHECK_FALSE(ranked.incomplete);
      CHECK(ranked.paths[0].path_weight == doctest::Approx(std::min(w[0], two_hop)));
      CHECK(ranked.paths[1].path_weight == doctest::Approx(std::max(w[0], two_hop)));
      CHECK(ranked.paths[0].path_hops + ranked.paths[1].path_hops == 3);
    } while (std::next_permutation(w.begin(), w.end()));
  }

  TEST_CASE("alive recursion and half-edge budget") {
    Rng rng(3);
    for (int rep = 0; rep < 30; ++rep) {
      WeightedGraph g = pair_configuration(build_regular(3, 400), rng);
      assign_weights(g, WeightDistribution::exponential(1.0), rng);
      ExploreOptions opt;
      opt.record_events = true;
      opt.check_invariants = true;
      SwgExplorer ex(g, 0, 1, opt);
      ex.finish(false);
      const auto& log = ex.event_log();
      REQUIRE(log.size() == ex.events() + 1);
      CHECK(log[0].k == 0);
      std::size_t ever_alive = log[0].alive[0] + log[0].alive[1];
      for (std::size_t k = 1; k < log.size(); ++k) {
        const long before = static_cast<long>(log[k - 1].alive[0] + log[k - 1].alive[1]);
        const long after = static_cast<long>(log[k].alive[0] + log[k].alive[1]);
        CHECK(after - before == static_cast<long>(log[k].added) - static_cast<long>(log[k].removed) - 1);
        CHECK(log[k].time >= log[k - 1].time);
        ever_alive += log[k].added;
      }
      CHECK(ever_alive <= g.half_edge_count());
      for (Vertex v = 0; v < g.vertex_count(); ++v) CHECK(ex.vertex_source(v) <= 1);
    }
  }

  TEST_CASE("dijkstra agrees with bellman-ford") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const OracleInstance inst = corpus_instance(seed);
      const Reference ref = bellman_ford(inst.g, inst.u1, inst.u2);
      const auto dj = dijkstra_path(inst.g, inst.u1, inst.u2);
      CAPTURE(inst.label);
      if (!std::isfinite(ref.weight)) {
        CHECK_FALSE(dj.has_value());
        continue;
      }
      REQUIRE(dj.has_value());
      CHECK(std::abs(dj->weight - ref.weight) <= 1e-12 * ref.weight);
      CHECK(dj->hops == ref.hops);
    }
  }

  TEST_CASE("dijkstra oracle on 500 instances") {
    std::size_t connected = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      const OracleInstance inst = corpus_instance(seed);
      CAPTURE(seed);
      CAPTURE(inst.label);
      const auto oracle = dijkstra_path(inst.g, inst.u1, inst.u2);
      ExploreOptions opt;
      opt.check_invariants = seed % 10 == 0;
      SwgExplorer ex(inst.g, inst.u1, inst.u2, opt);
      ex.finish(true);
      const auto fast = ex.result();
      const auto full = shortest_path(inst.g, inst.u1, inst.u2, false);
      REQUIRE(oracle.has_value() == fast.has_value());
      REQUIRE(oracle.has_value() == full.has_value());
      if (!oracle) continue;
      ++connected;
      CHECK(std::abs(fast->weight - oracle->weight) < 1e-9 * oracle->weight);
      CHECK(fast->hops == oracle->hops);
      CHECK(full->weight == fast->weight);
      CHECK(full->hops == fast->hops);
      for (const auto& r : full->records) CHECK(r.path_weight >= full->weight);
      CHECK(full->records[full->winner].path_weight == full->weight);
    }
    CHECK(connected > 400);
  }

  TEST_CASE("fault hook breaks the oracle") {
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      const OracleInstance inst = corpus_instance(seed);
      const auto oracle = dijkstra_path(inst.g, inst.u1, inst.u2);
      ExploreOptions opt;
      opt.fault_swap_first_pops = true;
      try {
        SwgExplorer ex(inst.g, inst.u1, inst.u2, opt);
        ex.finish(true);
        const auto res = ex.result();
        if (res.has_value() != oracle.has_value() ||
            (res && (std::abs(res->weight - oracle->weight) > 1e-9 * oracle->weight || res->hops != oracle->hops)))
          ++mismatches;
      } catch (const Error&) {
        ++mismatches;
      }
    }
    CHECK(mismatches > 0);
  }

  TEST_CASE("reconstructed paths") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const OracleInstance inst = corpus_instance(seed);
      const auto res = shortest_path(inst.g, inst.u1, inst.u2);
      const auto oracle = dijkstra_path(inst.g, inst.u1, inst.u2);
      REQUIRE(res.has_value() == oracle.has_value());
      if (!res) continue;
      for (const auto* vs : {&res->vertices, &oracle->vertices}) {
        REQUIRE(vs->size() == res->hops + 1);
        CHECK(vs->front() == inst.u1);
        CHECK(vs->back() == inst.u2);
        double total = 0;
        for (std::size_t i = 0; i + 1 < vs->size(); ++i) total += lightest_edge(inst.g, (*vs)[i], (*vs)[i + 1]);
        CHECK(total == doctest::Approx(res->weight).epsilon(1e-12));
      }
      // Continuous weights make the optimal path unique.
      CHECK(res->vertices == oracle->vertices);
    }
  }

  TEST_CASE("oracle driver") {
    std::ostringstream quiet;
    const OracleSummary ok = run_oracle(60, 20240601, false, &quiet);
    CHECK(ok.pass());
    CHECK(ok.instances == 60);
    CHECK(ok.max_relative_error < 1e-9);
    CHECK(quiet.str().empty());

    std::ostringstream dump;
    const OracleSummary bad = run_oracle(60, 20240601, true, &dump);
    CHECK_FALSE(bad.pass());
    CHECK(dump.str().find("MISMATCH instance") != std::string::npos);
    CHECK(dump.str().find("edge list:") != std::string::npos);

    std::ostringstream verbose;
    CHECK(run_oracle(1, 3, false, &verbose, true, 10, 10).pass());
    CHECK(verbose.str().find("exploration: weight=") != std::string::npos);
    CHECK(verbose.str().find("dijkstra   : weight=") != std::string::npos);
    CHECK(verbose.str().find("n=10") != std::string::npos);
    CHECK_THROWS_AS(oracle_instance(0, 1, 2, 10), InvalidArgument);
  }

  TEST_CASE("disconnected pair") {
    const WeightedGraph g = weighted(4, {{0, 1}, {2, 3}}, {1.0, 2.0});
    CHECK_FALSE(shortest_path(g, 0, 2).has_value());
    const RankedPaths r = ranked_paths(g, 0, 2, 3);
    CHECK(r.paths.empty());
    CHECK(r.incomplete);
  }

  TEST_CASE("ranked paths") {
    Rng rng(5);
    std::size_t complete = 0;
    for (int rep = 0; rep < 50; ++rep) {
      WeightedGraph g = pair_configuration(build_regular(4, 300), rng);
      assign_weights(g, WeightDistribution::exponential(1.0), rng);
      const auto one = ranked_paths(g, 0, 1, 1);
      const auto best = shortest_path(g, 0, 1);
      REQUIRE(best);
      REQUIRE(one.paths.size() == 1);
      CHECK(one.paths[0].path_weight == best->weight);
      CHECK(one.paths[0].path_hops == best->hops);

      const auto three = ranked_paths(g, 0, 1, 3);
      if (three.incomplete) continue;
      ++complete;
      CHECK(three.paths[0].path_weight == best->weight);
      CHECK(three.paths[0].path_weight < three.paths[1].path_weight);
      CHECK(three.paths[1].path_weight < three.paths[2].path_weight);

      // Against the full collision list.
      SwgExplorer ex(g, 0, 1);
      ex.finish(false);
      std::vector<double> all;
      for (const auto& r : ex.records()) all.push_back(r.path_weight);
      std::sort(all.begin(), all.end());
      for (int i = 0; i < 3; ++i) CHECK(three.paths[i].path_weight == all[i]);
    }
    CHECK(complete > 40);

    const WeightedGraph path = weighted(3, {{0, 1}, {1, 2}}, {1.0, 1.0});
    const auto few = ranked_paths(path, 0, 2, 3);
    CHECK(few.paths.size() == 1);
    CHECK(few.incomplete);
    CHECK_THROWS_AS(ranked_paths(path, 0, 2, 0), InvalidArgument);
  }

  TEST_CASE("martingale probe") {
    CHECK(probe_time(1000, 2.0) == doctest::Approx(std::log(std::log(1000.0)) / 2));
    CHECK_THROWS_AS(probe_time(2, 1.0), InvalidArgument);

    Rng rng(6);
    for (int rep = 0; rep < 20; ++rep) {
      WeightedGraph g = pair_configuration(build_regular(4, 2000), rng);
      assign_weights(g, WeightDistribution::exponential(1.0), rng);
      ExploreOptions opt;
      opt.record_events = true;
      SwgExplorer logged(g, 0, 1, opt);
      logged.finish(false);
      const MartingaleProbe from_log = measure_martingale(logged.event_log(), 2000, 2.0);
      SwgExplorer live(g, 0, 1);
      const MartingaleProbe from_live = measure_martingale(live, 2000, 2.0);
      CHECK(from_log.w1 == from_live.w1);
      CHECK(from_log.w2 == from_live.w2);
      CHECK(from_log.s_n == doctest::Approx(std::log(std::log(2000.0)) / 2));
    }

    // A source whose cluster dies out before s_n reads W = 0.
    const WeightedGraph g = weighted(3, {{0, 1}, {1, 2}}, {0.01, 0.01});
    SwgExplorer ex(g, 0, 2);
    const MartingaleProbe p = measure_martingale(ex, 1000, 1.0);
    CHECK(p.w1 == 0.0);
    CHECK(p.w2 == 0.0);
  }

  TEST_CASE("probed W against branching-process W at n = 1e5") {
    const auto e = WeightDistribution::exponential(1.0);
    const std::size_t n = 100'000;
    const double alpha = 2.0;
    const double s_n = probe_time(n, alpha);
    Rng rng(7);
    std::vector<double> graph_w;
    for (int rep = 0; rep < 250; ++rep) {
      WeightedGraph g = pair_configuration(build_regular(4, n), rng);
      assign_weights(g, e, rng);
      for (int pair = 0; pair < 2; ++pair) {
        const auto u1 = static_cast<Vertex>(rng.below(n));
        auto u2 = static_cast<Vertex>(rng.below(n - 1));
        if (u2 >= u1) ++u2;
        SwgExplorer ex(g, u1, u2);
        const MartingaleProbe p = measure_martingale(ex, n, alpha);
        graph_w.push_back(p.w1);
        graph_w.push_back(p.w2);
      }
    }
    BpConfig cfg{DiscreteLaw::point_mass(4), DiscreteLaw::point_mass(3), &e, alpha, s_n};
    cfg.record_trajectory = false;
    std::vector<double> bp_w(1000);
    for (auto& w : bp_w) w = simulate_bp(cfg, rng).w_estimate;
    const MomentSummary m = moments(graph_w);
    CHECK(m.mean > 0);
    CHECK(std::sqrt(m.variance) / m.mean < 2);
    CHECK(ks_two_sample(graph_w, bp_w).d < 0.1);
  }

  TEST_CASE("standardized marks") {
    const CtbpConstants c = compute_constants(4, 3, WeightDistribution::exponential(1.0));
    const MarkScale s = mark_scale(10'000, 2.0, 1.0 / 3, c, 2.0, 0.5);
    CHECK(s.t_n == doctest::Approx(std::log(1e4) / 4));
    CHECK(s.t_bar_n == doctest::Approx(s.t_n));
    CHECK(s.height_center == doctest::Approx(3 * s.t_n));
    CHECK(s.height_scale == doctest::Approx(std::sqrt(c.sigma_bar_sq * s.t_n / std::pow(c.nu_bar, 3))));
    CHECK_THROWS_AS(mark_scale(10'000, 2.0, 1.0 / 3, c, 0.0, 1.0), InvalidArgument);

    MarkScale fixed;
    fixed.t_bar_n = 3.0;
    fixed.height_center = 7.0;
    fixed.height_scale = 2.0;
    CollisionRecord r;
    r.time = 3.0;
    r.h_origin = 7;
    r.h_dest = 9;
    r.residual = 0.25;
    r.source = 1;
    const auto marks = standardize_marks({r}, fixed);
    CHECK(marks[0].t_bar == 0.0);
    CHECK(marks[0].h_origin == 0.0);
    CHECK(marks[0].h_dest == 1.0);
    CHECK(marks[0].residual == 0.25);
    CHECK(marks[0].source == 1);
    CHECK(marks[0].raw_dest == 9);

    // Identity scale maps records in limit coordinates to themselves.
    MarkScale unit;
    unit.height_scale = 1.0;
    Rng rng(8);
    std::vector<CollisionRecord> recs(50);
    for (auto& x : recs) {
      x.time = rng.uniform() * 2 - 1.5;
      x.h_origin = static_cast<std::uint32_t>(rng.below(20));
      x.h_dest = static_cast<std::uint32_t>(rng.below(20));
      x.residual = rng.exponential();
    }
    const auto same = standardize_marks(recs, unit);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(same[i].t_bar == recs[i].time);
      CHECK(same[i].h_origin == recs[i].h_origin);
      CHECK(same[i].h_dest == recs[i].h_dest);
      CHECK(same[i].residual == recs[i].residual);
    }
  }

  TEST_CASE("event dump") {
    const WeightedGraph g = weighted(3, {{0, 1}, {1, 2}}, {0.3, 1.1});
    ExploreOptions opt;
    opt.record_events = true;
    SwgExplorer ex(g, 0, 2, opt);
    ex.finish(false);
    std::ostringstream out;
    ex.dump_events(out);
    CHECK(out.str().find("vertex") != std::string::npos);
    CHECK(out.str().find("collision") != std::string::npos);
  }
}
