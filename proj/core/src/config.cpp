#include "fpp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "fpp/errors.hpp"

namespace fpp {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, const std::string& field) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(field + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& raw, const std::string& field) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return v;
  // Also accept integral scientific notation such as 1e5.
  const double d = parse_double(s, field);
  if (d < 0.0 || d != std::floor(d) || d > 9.0e15) {
    throw ConfigError(field + ": expected a non-negative integer, got '" + s + "'");
  }
  return static_cast<std::uint64_t>(d);
}

bool parse_bool(const std::string& raw, const std::string& field) {
  const std::string s = trim(raw);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError(field + ": expected true or false, got '" + s + "'");
}

std::map<int, double> parse_pmf_list(const std::string& body, const std::string& field) {
  std::map<int, double> pmf;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError(field + ": expected degree=probability, got '" + item + "'");
    const auto k = parse_u64(item.substr(0, eq), field);
    const double p = parse_double(item.substr(eq + 1), field);
    if (!pmf.emplace(static_cast<int>(k), p).second) throw ConfigError(field + ": degree listed twice");
  }
  if (pmf.empty()) throw ConfigError(field + ": empty degree distribution");
  return pmf;
}

std::map<int, double> load_pmf(const std::string& body, const std::string& field) {
  if (!body.empty() && body.front() == '@') {
    std::ifstream in(body.substr(1));
    if (!in) throw ConfigError(field + ": cannot open '" + body.substr(1) + "'");
    return read_degree_table(in);
  }
  return parse_pmf_list(body, field);
}

}  // namespace

GraphKind parse_graph_kind(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "cm") return GraphKind::cm;
  if (s == "simple") return GraphKind::simple;
  if (s == "nr") return GraphKind::nr;
  if (s == "grg") return GraphKind::grg;
  if (s == "cl") return GraphKind::cl;
  throw ConfigError("graph.kind: unknown kind '" + s + "' (cm|simple|nr|grg|cl)");
}

const char* graph_kind_name(GraphKind kind) {
  switch (kind) {
    case GraphKind::cm: return "cm";
    case GraphKind::simple: return "simple";
    case GraphKind::nr: return "nr";
    case GraphKind::grg: return "grg";
    case GraphKind::cl: return "cl";
  }
  return "?";
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_u64(item, "list"));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

DegreeModel DegreeModel::parse(const std::string& raw) {
  const std::string s = trim(raw);
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("degrees: expected regular:R, det:... or iid:..., got '" + s + "'");
  const std::string head = s.substr(0, colon);
  const std::string body = s.substr(colon + 1);
  DegreeModel m;
  m.text = s;
  if (head == "regular") {
    const auto r = parse_u64(body, "degrees");
    if (r == 0) throw ConfigError("degrees: regular degree must be positive");
    m.kind = Kind::regular;
    m.r = static_cast<std::uint32_t>(r);
    m.pmf = {{static_cast<int>(r), 1.0}};
  } else if (head == "det" || head == "iid") {
    m.kind = head == "det" ? Kind::deterministic : Kind::iid;
    m.pmf = load_pmf(body, "degrees");
  } else {
    throw ConfigError("degrees: unknown model '" + head + "'");
  }
  return m;
}

DiscreteLaw DegreeModel::law() const { return DiscreteLaw::from_map(pmf, 1e-9); }

DegreeSequence DegreeModel::realize(std::size_t n, Rng& rng) const {
  switch (kind) {
    case Kind::regular: return build_regular(r, n);
    case Kind::deterministic: return build_deterministic_from_pmf(pmf, n);
    case Kind::iid: return build_iid(pmf, n, rng);
  }
  throw InvalidArgument("unknown degree model");
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

ExperimentConfig ExperimentConfig::parse(std::istream& in, const std::string& origin) {
  ExperimentConfig c;
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  bool saw_graph = false;
  bool saw_weights = false;
  bool saw_dist = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section == "graph") {
        saw_graph = true;
      } else if (section == "weights") {
        saw_weights = true;
      } else if (section != "run" && section != "thresholds") {
        throw ConfigError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string field = section + "." + key;
    try {
      if (section == "graph") {
        if (key == "kind") c.graph_kind = parse_graph_kind(value);
        else if (key == "degrees") c.degrees = DegreeModel::parse(value);
        else if (key == "rank1_weights") c.rank1_weights_text = value;
        else if (key == "n" || key == "n_ladder") c.n_ladder = parse_size_list(value);
        else if (key == "simple_max_attempts") c.simple_max_attempts = parse_u64(value, field);
        else throw ConfigError("unknown key");
      } else if (section == "weights") {
        if (key == "dist") {
          c.weights_text = value;
          saw_dist = true;
        } else {
          throw ConfigError("unknown key");
        }
      } else if (section == "run") {
        if (key == "trials") c.trials = parse_u64(value, field);
        else if (key == "ranked") c.ranked = parse_u64(value, field);
        else if (key == "marks") c.marks = parse_bool(value, field);
        else if (key == "meta_runs") c.meta_runs = parse_u64(value, field);
        else if (key == "seed") c.seed = parse_u64(value, field);
        else if (key == "threads") c.threads = static_cast<unsigned>(parse_u64(value, field));
        else if (key == "out") c.out_dir = value;
        else throw ConfigError("unknown key");
      } else {
        Thresholds& th = c.thresholds;
        if (key == "clt_p") th.clt_p = parse_double(value, field);
        else if (key == "clt_ks") th.clt_ks = parse_double(value, field);
        else if (key == "clt_mean") th.clt_mean = parse_double(value, field);
        else if (key == "clt_var") th.clt_var = parse_double(value, field);
        else if (key == "weight_ks") th.weight_ks = parse_double(value, field);
        else if (key == "slope_rel") th.slope_rel = parse_double(value, field);
        else if (key == "source_sigma") th.source_sigma = parse_double(value, field);
        else if (key == "height_ks") th.height_ks = parse_double(value, field);
        else if (key == "residual_ks") th.residual_ks = parse_double(value, field);
        else if (key == "ranked_ks") th.ranked_ks = parse_double(value, field);
        else if (key == "window_lo") th.window_lo = parse_double(value, field);
        else if (key == "window_hi") th.window_hi = parse_double(value, field);
        else if (key == "rate_bins") th.rate_bins = parse_u64(value, field);
        else if (key == "q_reference") th.q_reference = parse_u64(value, field);
        else throw ConfigError("unknown key");
      }
    } catch (const Error& e) {
      std::string msg = e.what();
      if (msg.rfind(field, 0) != 0) msg = field + ": " + msg;
      throw ConfigError(where + msg);
    }
  }
  if (!saw_graph) throw ConfigError(origin + ": missing [graph] section");
  if (!saw_weights || !saw_dist) throw ConfigError(origin + ": missing required field weights.dist");
  c.validate();
  return c;
}

WeightDistribution ExperimentConfig::weight_law() const {
  if (weights_text.empty()) throw ConfigError("missing required field weights.dist");
  return WeightDistribution::parse(weights_text);
}

std::optional<WeightDistribution> ExperimentConfig::rank1_law() const {
  if (rank1_weights_text.empty()) return std::nullopt;
  return WeightDistribution::parse(rank1_weights_text);
}

void ExperimentConfig::validate() const {
  const bool rank1 = graph_kind == GraphKind::nr || graph_kind == GraphKind::grg || graph_kind == GraphKind::cl;
  if (rank1 && rank1_weights_text.empty()) {
    throw ConfigError("graph.rank1_weights is required for graph kind " + std::string(graph_kind_name(graph_kind)));
  }
  if (!rank1 && !degrees) {
    throw ConfigError("graph.degrees is required for graph kind " + std::string(graph_kind_name(graph_kind)));
  }
  if (n_ladder.empty()) throw ConfigError("graph.n_ladder is empty");
  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    if (n_ladder[i] < 3) throw ConfigError("graph.n_ladder: every n must be at least 3");
    if (i > 0 && n_ladder[i] <= n_ladder[i - 1]) throw ConfigError("graph.n_ladder must be strictly increasing");
  }
  if (trials == 0) throw ConfigError("run.trials must be at least 1");
  if (ranked == 0) throw ConfigError("run.ranked must be at least 1");
  if (simple_max_attempts == 0) throw ConfigError("graph.simple_max_attempts must be at least 1");
  if (!(thresholds.window_lo < thresholds.window_hi)) throw ConfigError("thresholds: window_lo must be below window_hi");
  weight_law();
  if (rank1) rank1_law();
}

std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  os << "graph.kind = " << graph_kind_name(graph_kind) << '\n';
  if (degrees) os << "graph.degrees = " << degrees->text << '\n';
  if (!rank1_weights_text.empty()) os << "graph.rank1_weights = " << rank1_weights_text << '\n';
  os << "graph.n_ladder = ";
  for (std::size_t i = 0; i < n_ladder.size(); ++i) os << (i ? "," : "") << n_ladder[i];
  os << '\n';
  os << "graph.simple_max_attempts = " << simple_max_attempts << '\n';
  os << "weights.dist = " << weights_text << '\n';
  os << "run.trials = " << trials << '\n';
  os << "run.ranked = " << ranked << '\n';
  os << "run.marks = " << (marks ? "true" : "false") << '\n';
  os << "run.meta_runs = " << meta_runs << '\n';
  os << "run.seed = " << seed << '\n';
  const Thresholds& th = thresholds;
  os << "thresholds.clt_p = " << th.clt_p << '\n'
     << "thresholds.clt_ks = " << th.clt_ks << '\n'
     << "thresholds.clt_mean = " << th.clt_mean << '\n'
     << "thresholds.clt_var = " << th.clt_var << '\n'
     << "thresholds.weight_ks = " << th.weight_ks << '\n'
     << "thresholds.slope_rel = " << th.slope_rel << '\n'
     << "thresholds.source_sigma = " << th.source_sigma << '\n'
     << "thresholds.height_ks = " << th.height_ks << '\n'
     << "thresholds.residual_ks = " << th.residual_ks << '\n'
     << "thresholds.ranked_ks = " << th.ranked_ks << '\n'
     << "thresholds.window_lo = " << th.window_lo << '\n'
     << "thresholds.window_hi = " << th.window_hi << '\n'
     << "thresholds.rate_bins = " << th.rate_bins << '\n'
     << "thresholds.q_reference = " << th.q_reference << '\n';
  return os.str();
}

}  // namespace fpp
