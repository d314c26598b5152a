#include "fpp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <vector>

#include "fpp/dijkstra.hpp"
#include "fpp/errors.hpp"
#include "fpp/explore.hpp"

namespace fpp {
namespace {

void print_path(std::ostream& out, const char* name, const std::vector<Vertex>& vs, double weight,
                std::uint32_t hops) {
  out << "  " << name << ": weight=" << weight << " hops=" << hops << " path=";
  for (std::size_t i = 0; i < vs.size(); ++i) out << (i ? "-" : "") << vs[i];
  out << '\n';
}

}  // namespace

OracleInstance oracle_instance(std::uint64_t index, std::uint64_t master, std::size_t n_min, std::size_t n_max) {
  if (n_min < 3 || n_max < n_min) throw InvalidArgument("oracle corpus needs 3 <= n_min <= n_max");
  Rng rng(derive_seed(master, index));
  const std::size_t n = n_min + rng.below(n_max - n_min + 1);
  const std::vector<WeightDistribution> laws{
      WeightDistribution::exponential(1.0), WeightDistribution::shifted_exponential(2.0),
      WeightDistribution::power_exponential(0.5), WeightDistribution::power_exponential(3.0),
      WeightDistribution::uniform(1.0), WeightDistribution::from_table({0, 0.3, 1}, {0, 0.1, 4})};
  const WeightDistribution& law = laws[index % laws.size()];
  OracleInstance inst;
  const int kind = static_cast<int>(index % 5);
  if (kind <= 1) {
    std::vector<std::uint32_t> d(n);
    for (auto& x : d) x = 1 + static_cast<std::uint32_t>(rng.below(4));
    if (std::accumulate(d.begin(), d.end(), 0u) % 2 == 1) d.back() += 1;
    inst.g = pair_configuration(DegreeSequence(d), rng);
    inst.label = "cm";
  } else if (kind == 2) {
    inst.g = sample_uniform_simple(build_regular(3, n + n % 2), rng, 10'000).graph;
    inst.label = "simple";
  } else {
    std::vector<double> w(n);
    for (auto& x : w) x = 0.5 + 3 * rng.uniform();
    const bool nr = kind == 3;
    inst.g = sample_rank1(w, nr ? Rank1Kind::norros_reittu : Rank1Kind::chung_lu, rng);
    inst.label = nr ? "nr" : "cl";
  }
  assign_weights(inst.g, law, rng);
  const std::size_t nv = inst.g.vertex_count();
  std::size_t usable = 0;
  for (Vertex v = 0; v < nv; ++v) usable += inst.g.degree(v) > 0;
  if (usable < 2) throw CapacityError("oracle instance has fewer than two non-isolated vertices");
  do {
    inst.u1 = static_cast<Vertex>(rng.below(nv));
    inst.u2 = static_cast<Vertex>(rng.below(nv));
  } while (inst.u1 == inst.u2 || inst.g.degree(inst.u1) == 0 || inst.g.degree(inst.u2) == 0);
  inst.label += " " + law.describe() + " n=" + std::to_string(nv);
  return inst;
}

OracleSummary run_oracle(std::size_t count, std::uint64_t master, bool fault, std::ostream* dump, bool verbose,
                         std::size_t n_min, std::size_t n_max) {
  OracleSummary s;
  ExploreOptions options;
  options.fault_swap_first_pops = fault;
  for (std::uint64_t i = 0; i < count; ++i) {
    const OracleInstance inst = oracle_instance(i, master, n_min, n_max);
    const std::optional<DijkstraPath> want = dijkstra_path(inst.g, inst.u1, inst.u2);
    std::optional<PathResult> got;
    std::string failure;
    try {
      SwgExplorer explorer(inst.g, inst.u1, inst.u2, options);
      explorer.finish();
      got = explorer.result();
    } catch (const Error& e) {
      failure = e.what();
    }
    ++s.instances;
    bool ok = failure.empty() && got.has_value() == want.has_value();
    double rel = 0.0;
    if (ok && got) {
      rel = std::abs(got->weight - want->weight) / std::max(want->weight, 1e-300);
      s.max_relative_error = std::max(s.max_relative_error, rel);
      ok = got->hops == want->hops && rel < 1e-9;
    }
    if (!ok) ++s.mismatches;
    if (dump != nullptr && (!ok || verbose)) {
      std::ostream& out = *dump;
      out << (ok ? "instance " : "MISMATCH instance ") << i << " (" << inst.label << ") u1=" << inst.u1
          << " u2=" << inst.u2 << '\n';
      if (!failure.empty()) {
        out << "  exploration: error: " << failure << '\n';
      } else if (got) {
        print_path(out, "exploration", got->vertices, got->weight, got->hops);
      } else {
        out << "  exploration: disconnected\n";
      }
      if (want) {
        print_path(out, "dijkstra   ", want->vertices, want->weight, want->hops);
      } else {
        out << "  dijkstra   : disconnected\n";
      }
      if (!ok) {
        out << "  edge list:\n";
        write_edge_list(out, inst.g, derive_seed(master, i));
      }
    }
  }
  return s;
}

}  // namespace fpp
