#include "hubline/instance.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "hubline/errors.hpp"
#include "hubline/rng.hpp"

namespace hubline {

namespace {

constexpr double kSymTol = 1e-9;
// Placeholder for "no direct link" in a sparse bundle before closure.
constexpr double kInfTime = 1e100;

void validate_params(const Params& p, int n) {
  if (p.p < 2 || p.p > n)
    throw ValidationError("p must be between 2 and n=" + std::to_string(n) + ", got " +
                          std::to_string(p.p));
  if (!(p.alpha > 0.0) || p.alpha > 1.0)
    throw ValidationError("alpha must lie in (0,1], got " + std::to_string(p.alpha));
  if (!(p.r > 0.0)) throw ValidationError("r must be positive, got " + std::to_string(p.r));
  if (p.vartheta < 0.0)
    throw ValidationError("vartheta must be nonnegative, got " + std::to_string(p.vartheta));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = (b == std::string::npos) ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

double parse_double(const std::string& s, const std::string& file, std::uint64_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected a number, got '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& file, std::uint64_t line) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected an integer, got '" + s + "'");
  }
}

bool looks_numeric(const std::string& s) {
  if (s.empty()) return false;
  char c = s[0];
  return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

Instance::Instance(std::vector<Node> nodes, std::vector<double> times, std::vector<Edge> edges,
                   std::vector<Commodity> commodities, Params params, bool metric_closed)
    : nodes_(std::move(nodes)),
      times_(std::move(times)),
      edges_(std::move(edges)),
      commodities_(std::move(commodities)),
      params_(params),
      metric_closed_(metric_closed) {
  const int n = this->n();
  if (n < 2) throw ValidationError("an instance needs at least two nodes");
  if (times_.size() != static_cast<std::size_t>(n) * n)
    throw ValidationError("time matrix size does not match node count");
  for (int i = 0; i < n; ++i) {
    if (nodes_[i].id != i)
      throw ValidationError("node ids must be dense and 0-based; position " + std::to_string(i) +
                            " holds id " + std::to_string(nodes_[i].id));
    if (!(nodes_[i].population > 0.0))
      throw ValidationError("node " + std::to_string(i) + " has nonpositive population");
  }
  for (int i = 0; i < n; ++i) {
    if (times_[static_cast<std::size_t>(i) * n + i] != 0.0)
      throw ValidationError("time matrix diagonal must be zero at node " + std::to_string(i));
    for (int j = 0; j < n; ++j) {
      const double tij = times_[static_cast<std::size_t>(i) * n + j];
      if (i != j && !(tij > 0.0))
        throw ValidationError("travel time must be positive between " + std::to_string(i) +
                              " and " + std::to_string(j));
      if (std::abs(tij - times_[static_cast<std::size_t>(j) * n + i]) > kSymTol)
        throw ValidationError("time matrix is not symmetric at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
    }
  }
  std::sort(edges_.begin(), edges_.end());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [k, m] = edges_[e];
    if (k < 0 || m >= n || k >= m)
      throw ValidationError("hub edge [" + std::to_string(k) + "," + std::to_string(m) +
                            "] is out of range or not normalized");
    if (e > 0 && edges_[e] == edges_[e - 1])
      throw ValidationError("duplicate hub edge [" + std::to_string(k) + "," +
                            std::to_string(m) + "]");
  }
  for (const auto& c : commodities_) {
    if (c.origin < 0 || c.origin >= n || c.destination < 0 || c.destination >= n)
      throw ValidationError("commodity endpoint out of range");
    if (c.origin == c.destination)
      throw ValidationError("commodity origin equals destination at node " +
                            std::to_string(c.origin));
  }
  validate_params(params_, n);
  edge_lookup_.assign(static_cast<std::size_t>(n) * n, -1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    edge_lookup_[static_cast<std::size_t>(edges_[e].k) * n + edges_[e].m] = static_cast<int>(e);
    edge_lookup_[static_cast<std::size_t>(edges_[e].m) * n + edges_[e].k] = static_cast<int>(e);
  }
}

int Instance::edge_index(int k, int m) const {
  return edge_lookup_[static_cast<std::size_t>(k) * n() + m];
}

std::vector<Commodity> all_pair_commodities(int n) {
  std::vector<Commodity> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back({i, j, 0.0});
  return out;
}

Instance load_csv_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  if (!fs::exists(root)) throw IoError("cannot open " + dir);
  if (!fs::exists(root / "manifest.txt") || !fs::exists(root / "nodes.csv") ||
      !fs::exists(root / "edges.csv"))
    throw ParseError(dir + ": not an instance bundle (need manifest.txt, nodes.csv, edges.csv)");

  Params params;
  std::optional<int> manifest_n;
  {
    const std::string mf = (root / "manifest.txt").string();
    std::uint64_t ln = 0;
    for (const auto& raw : read_lines(mf)) {
      ++ln;
      std::string line = raw;
      if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
      const auto eq = line.find('=');
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (eq == std::string::npos) throw ParseError(mf, ln, "expected key=value");
      auto fields = split_csv(line.substr(0, eq));
      const std::string key = fields[0];
      fields = split_csv(line.substr(eq + 1));
      const std::string value = fields[0];
      if (key == "n") manifest_n = parse_int(value, mf, ln);
      else if (key == "p") params.p = parse_int(value, mf, ln);
      else if (key == "alpha") params.alpha = parse_double(value, mf, ln);
      else if (key == "r") params.r = parse_double(value, mf, ln);
      else if (key == "vartheta") params.vartheta = parse_double(value, mf, ln);
      else if (key == "seed") params.seed = static_cast<std::uint64_t>(std::stoull(value));
      else if (key == "revenue_mode") {
        if (value == "gamma") params.revenue_mode = RevenueMode::gamma_rule;
        else if (value == "explicit") params.revenue_mode = RevenueMode::explicit_value;
        else throw ParseError(mf, ln, "revenue_mode must be 'gamma' or 'explicit'");
      } else throw ParseError(mf, ln, "unknown manifest key '" + key + "'");
    }
  }

  std::vector<Node> nodes;
  {
    const std::string nf = (root / "nodes.csv").string();
    std::uint64_t ln = 0;
    for (const auto& raw : read_lines(nf)) {
      ++ln;
      if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto f = split_csv(raw);
      if (ln == 1 && !looks_numeric(f[0])) continue;  // header
      if (f.size() != 3 && f.size() != 5)
        throw ParseError(nf, ln, "expected id,label,population[,lon,lat]");
      Node node;
      node.id = parse_int(f[0], nf, ln);
      node.label = f[1];
      node.population = parse_double(f[2], nf, ln);
      if (f.size() == 5) {
        node.lon = parse_double(f[3], nf, ln);
        node.lat = parse_double(f[4], nf, ln);
      }
      nodes.push_back(std::move(node));
    }
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  }
  const int n = static_cast<int>(nodes.size());
  if (n == 0) throw ParseError((root / "nodes.csv").string() + ": no nodes");
  if (manifest_n && *manifest_n != n)
    throw ValidationError(dir + ": manifest says n=" + std::to_string(*manifest_n) + " but nodes.csv has " +
                          std::to_string(n));

  std::vector<double> times(static_cast<std::size_t>(n) * n, kInfTime);
  for (int i = 0; i < n; ++i) times[static_cast<std::size_t>(i) * n + i] = 0.0;
  std::vector<Edge> edges;
  {
    const std::string ef = (root / "edges.csv").string();
    std::uint64_t ln = 0;
    for (const auto& raw : read_lines(ef)) {
      ++ln;
      if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto f = split_csv(raw);
      if (ln == 1 && !looks_numeric(f[0])) continue;
      if (f.size() != 3) throw ParseError(ef, ln, "expected k,m,time");
      int k = parse_int(f[0], ef, ln);
      int m = parse_int(f[1], ef, ln);
      const double t = parse_double(f[2], ef, ln);
      if (k == m) throw ParseError(ef, ln, "self-loop edge");
      if (k > m) std::swap(k, m);
      if (k < 0 || m >= n) throw ParseError(ef, ln, "edge endpoint out of range");
      times[static_cast<std::size_t>(k) * n + m] = t;
      times[static_cast<std::size_t>(m) * n + k] = t;
      edges.push_back({k, m});
    }
  }

  std::vector<Commodity> commodities;
  if (fs::exists(root / "commodities.csv")) {
    const std::string cf = (root / "commodities.csv").string();
    std::uint64_t ln = 0;
    for (const auto& raw : read_lines(cf)) {
      ++ln;
      if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto f = split_csv(raw);
      if (ln == 1 && !looks_numeric(f[0])) continue;
      if (f.size() != 2 && f.size() != 3) throw ParseError(cf, ln, "expected o,d[,R]");
      Commodity c;
      c.origin = parse_int(f[0], cf, ln);
      c.destination = parse_int(f[1], cf, ln);
      if (f.size() == 3) c.revenue = parse_double(f[2], cf, ln);
      else if (params.revenue_mode == RevenueMode::explicit_value)
        throw ParseError(cf, ln, "revenue_mode=explicit requires an R column");
      commodities.push_back(c);
    }
  } else {
    if (params.revenue_mode == RevenueMode::explicit_value)
      throw ValidationError(dir + ": revenue_mode=explicit requires commodities.csv");
    commodities = all_pair_commodities(n);
  }

  return Instance(std::move(nodes), std::move(times), std::move(edges), std::move(commodities),
                  params);
}

Instance load_cab(const std::string& path, int subset, const Params& params) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> tokens;
  double v;
  while (in >> v) tokens.push_back(v);
  if (!in.eof()) throw ParseError(path + ": non-numeric token");

  // Either 2*m*m tokens (two matrices) or 1 + 2*m*m (leading node count).
  std::size_t count = tokens.size();
  std::size_t offset = 0;
  auto matrix_dim = [](std::size_t k) -> int {
    const auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(k) / 2.0)));
    return (2 * m * m == k) ? static_cast<int>(m) : 0;
  };
  int m = matrix_dim(count);
  if (m == 0 && count > 1 && tokens[0] == std::floor(tokens[0])) {
    m = matrix_dim(count - 1);
    if (m != 0 && static_cast<int>(tokens[0]) == m) offset = 1;
    else m = 0;
  }
  if (m == 0)
    throw ParseError(path + ": token count " + std::to_string(count) +
                     " does not form two square matrices");

  const int n = (subset == 0) ? m : subset;
  if (n < 2 || n > m)
    throw ValidationError("subset must be between 2 and " + std::to_string(m) + ", got " +
                          std::to_string(n));

  const auto flow = [&](int i, int j) { return tokens[offset + static_cast<std::size_t>(i) * m + j]; };
  const auto cost = [&](int i, int j) {
    return tokens[offset + static_cast<std::size_t>(m) * m + static_cast<std::size_t>(i) * m + j];
  };

  std::vector<Node> nodes(n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += flow(i, j);
    nodes[i] = {i, "n" + std::to_string(i), std::sqrt(row), std::nullopt, std::nullopt};
  }
  std::vector<double> times(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) times[static_cast<std::size_t>(i) * n + j] = cost(i, j);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});

  return Instance(std::move(nodes), std::move(times), std::move(edges), all_pair_commodities(n),
                  params);
}

Instance metric_closure(const Instance& instance) {
  const int n = instance.n();
  std::vector<double> t = instance.times();
  const auto at = [&](int i, int j) -> double& { return t[static_cast<std::size_t>(i) * n + j]; };
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      const double tik = at(i, k);
      for (int j = 0; j < n; ++j)
        if (tik + at(k, j) < at(i, j)) at(i, j) = tik + at(k, j);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && at(i, j) >= kInfTime / 2)
        throw ValidationError("travel network is disconnected between " + std::to_string(i) +
                              " and " + std::to_string(j));
  return Instance(instance.nodes(), std::move(t), instance.hub_edges(), instance.commodities(),
                  instance.params(), /*metric_closed=*/true);
}

DerivedTimes derive_times(const Instance& instance) {
  const int n = instance.n();
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) sum += instance.time(i, j);
  const double uniform = instance.params().vartheta * sum / (static_cast<double>(n) * (n - 1));
  DerivedTimes d;
  d.access.assign(n, uniform);
  d.exit.assign(n, uniform);
  return d;
}

void derive_revenues(Instance& instance, std::uint64_t seed) {
  SplitMix64 rng(seed);
  auto commodities = instance.commodities();
  std::vector<Commodity> updated;
  updated.reserve(commodities.size());
  for (const auto& c : commodities) {
    const double gamma = rng.next_uniform();
    updated.push_back({c.origin, c.destination,
                       (1.0 + gamma) * instance.time(c.origin, c.destination)});
  }
  instance = Instance(instance.nodes(), instance.times(), instance.hub_edges(),
                      std::move(updated), instance.params(), instance.metric_closed());
}

Instance sparsify(const Instance& instance, double fraction, std::uint64_t seed, double trim) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw ValidationError("sparsify fraction must lie in (0,1], got " + std::to_string(fraction));
  if (trim < 0.0 || trim >= 0.5)
    throw ValidationError("sparsify trim must lie in [0,0.5), got " + std::to_string(trim));

  std::vector<Edge> by_time = instance.hub_edges();
  std::sort(by_time.begin(), by_time.end(), [&](const Edge& a, const Edge& b) {
    const double ta = instance.time(a.k, a.m);
    const double tb = instance.time(b.k, b.m);
    if (ta != tb) return ta < tb;
    return a < b;
  });
  const std::size_t cut = static_cast<std::size_t>(trim * static_cast<double>(by_time.size()));
  if (by_time.size() <= 2 * cut)
    throw ValidationError("sparsify trim removes every edge");
  std::vector<Edge> pool(by_time.begin() + cut, by_time.end() - cut);

  const std::size_t keep =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pool.size())));
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + rng.next_below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(keep);
  std::sort(pool.begin(), pool.end());

  return Instance(instance.nodes(), instance.times(), std::move(pool), instance.commodities(),
                  instance.params(), instance.metric_closed());
}

}  // namespace hubline
