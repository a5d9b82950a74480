#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hubline {

struct Node {
  int id = 0;  // 0-based, dense
  std::string label;
  double population = 0.0;  // P_i, must be positive
  std::optional<double> lon;
  std::optional<double> lat;
};

// Unordered candidate hub edge [k,m] with k < m.
struct Edge {
  int k = 0;
  int m = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Commodity {
  int origin = 0;
  int destination = 0;
  double revenue = 0.0;  // R_c; filled by derive_revenues unless given explicitly
};

enum class RevenueMode {
  gamma_rule,  // R_c = (1 + gamma_c) * t_od, gamma_c ~ U[0,1) from the seeded stream
  explicit_value,
};

struct Params {
  int p = 2;               // number of hubs on the line, 2 <= p <= n
  double alpha = 1.0;      // discount factor on hub-edge travel, in (0,1]
  double r = 1.0;          // demand elasticity exponent, r > 0
  double vartheta = 0.0;   // access/exit time scale, >= 0
  std::uint64_t seed = 0;  // master seed; sub-streams use fixed offsets
  RevenueMode revenue_mode = RevenueMode::gamma_rule;
};

// Per-node access/exit times. The uniform rule sets all of them to
// vartheta * mean off-diagonal travel time.
struct DerivedTimes {
  std::vector<double> access;  // t~a_i
  std::vector<double> exit;    // t~e_i
};

// An instance: nodes, a symmetric positive travel-time matrix, the candidate
// hub edge set, commodities, and parameters. Travel times become a metric
// (shortest-path closed) only after metric_closure; path operations require
// a closed instance.
class Instance {
 public:
  Instance(std::vector<Node> nodes, std::vector<double> times, std::vector<Edge> edges,
           std::vector<Commodity> commodities, Params params, bool metric_closed = false);

  int n() const noexcept { return static_cast<int>(nodes_.size()); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& times() const noexcept { return times_; }
  double time(int i, int j) const { return times_[static_cast<std::size_t>(i) * n() + j]; }
  const std::vector<Edge>& hub_edges() const noexcept { return edges_; }
  // Index of [k,m] in hub_edges(), or -1 when the pair is not a candidate edge.
  int edge_index(int k, int m) const;
  const std::vector<Commodity>& commodities() const noexcept { return commodities_; }
  const Params& params() const noexcept { return params_; }
  Params& params() noexcept { return params_; }
  bool metric_closed() const noexcept { return metric_closed_; }

 private:
  std::vector<Node> nodes_;
  std::vector<double> times_;  // row-major n x n
  std::vector<Edge> edges_;    // sorted, unique
  std::vector<Commodity> commodities_;
  Params params_;
  bool metric_closed_ = false;
  std::vector<int> edge_lookup_;  // n x n -> edge index or -1
};

// All unordered pairs (i < j) in lexicographic order, zero revenue.
std::vector<Commodity> all_pair_commodities(int n);

// Loads a directory holding manifest.txt (key=value), nodes.csv
// (id,label,population[,lon,lat]), edges.csv (k,m,time) and optionally
// commodities.csv (o,d[,R]). Missing commodities.csv yields all unordered
// pairs. Edge list defines both the travel network and the candidate hub
// edge set; times between non-adjacent nodes are completed by metric_closure.
Instance load_csv_bundle(const std::string& dir);

// Loads the classic 25-city air-passenger file: an optional leading node-count
// token, then an n x n flow matrix and an n x n symmetric cost matrix,
// whitespace separated. `subset` keeps the first `subset` nodes (0 keeps all).
// Populations default to sqrt(row sum of flows) over the kept submatrix;
// commodities default to all unordered pairs; candidate hub edges to all pairs.
Instance load_cab(const std::string& path, int subset, const Params& params);

// Shortest-path closure of the travel-time matrix (Floyd-Warshall). Returns a
// new instance flagged metric; idempotent and entry-wise nonincreasing.
Instance metric_closure(const Instance& instance);

// Uniform access/exit rule: every node gets
// vartheta * sum_{i != j} t_ij / (n (n-1)).
DerivedTimes derive_times(const Instance& instance);

// Fills commodity revenues R_c = (1 + gamma_c) * t_od with one gamma draw per
// commodity, in commodity order, from SplitMix64(seed). No-op re-deriving with
// the same seed reproduces identical revenues.
void derive_revenues(Instance& instance, std::uint64_t seed);

// Restricts the candidate hub edge set: sorts edges by (time, k, m), drops the
// floor(trim * |E|) smallest and largest, then keeps a uniform random subset of
// ceil(fraction * |E_remaining|) of the remainder, drawn from SplitMix64(seed).
// Nodes, times and commodities are unchanged. fraction must lie in (0, 1];
// trim in [0, 0.5).
Instance sparsify(const Instance& instance, double fraction, std::uint64_t seed,
                  double trim = 0.1);

}  // namespace hubline
