#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "hubline/aux_graph.hpp"
#include "hubline/gravity.hpp"
#include "hubline/instance.hpp"

namespace hubline {

// Which endpoints double as hubs on a candidate service path.
enum class PathType { odh, oh, dh, odnh };

const char* path_type_name(PathType t);

// One admissible way to serve a commodity: board at hubs.front(), ride the
// sequence, leave at hubs.back(). Endpoints may themselves be hubs.
struct CandidatePath {
  int origin = 0;
  int destination = 0;
  std::vector<int> hubs;      // instance node ids, in ride order, >= 2 of them
  std::vector<int> edge_ids;  // sorted hub-edge indices covered by the ride
  double tau = 0.0;           // door-to-door time
  double profit = 0.0;        // gravity profit of serving at time tau
  PathType ptype = PathType::odnh;
};

// Upper bound on the profit any feasible line can extract from one commodity.
struct CommodityBound {
  int origin = 0;
  int destination = 0;
  double ub = 0.0;
  // Path realizing the bound, when one with at most p hubs was found.
  std::optional<std::vector<int>> witness_hubs;
  double witness_time = 0.0;
  // True when the path stream hit its cap and the bound fell back to the
  // best time seen so far (still admissible, possibly loose).
  bool capped = false;
};

// Lazily yields simple origin->destination paths of an auxiliary graph in
// nondecreasing (time, node sequence) order. Requesting more than k_cap paths
// raises CapExceededError carrying the count delivered.
class KShortestStream {
 public:
  explicit KShortestStream(const AuxGraph& graph, std::uint64_t k_cap = 100000);
  ~KShortestStream();
  KShortestStream(KShortestStream&&) noexcept;
  KShortestStream& operator=(KShortestStream&&) noexcept;

  // Next path as (time, node ids), or nullopt once the graph is exhausted.
  std::optional<std::pair<double, std::vector<int>>> next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Walks the path stream for one commodity: the first improving path with at
// most p hubs gives ub = profit at its time; meeting a non-improving path
// first (or exhausting the stream) proves ub = 0.
CommodityBound commodity_upper_bound(const Instance& instance, const AuxGraph& graph,
                                     const Commodity& commodity, std::uint64_t k_cap = 100000);

// All candidate service paths for one commodity: simple auxiliary-graph paths
// with 2..p hubs, filtered by the direct-time comparison (strict by default),
// with rides dominated by a two-hub shortcut removed (a two-hub path is exempt
// from the test against its own shortcut unless selfloop_exempt is false).
// Output sorted by (tau, hub sequence).
std::vector<CandidatePath> enumerate_candidates(const Instance& instance,
                                                const DerivedTimes& derived, const AuxGraph& graph,
                                                const Commodity& commodity,
                                                bool strict_filter = true,
                                                bool selfloop_exempt = true);

struct EnumerationStats {
  std::uint64_t n_path = 0;           // total candidates over all commodities
  double t_prep_seconds = 0.0;        // auxiliary graph construction
  double t_path_seconds = 0.0;        // candidate enumeration
  std::array<std::uint64_t, 4> by_type{};  // indexed by PathType
};

struct Enumeration {
  std::vector<std::vector<CandidatePath>> per_commodity;  // aligned to instance order
  EnumerationStats stats;
};

// Builds each commodity's auxiliary graph and enumerates its candidates,
// distributing commodities over `workers` threads. Results are identical for
// any worker count. Per-commodity failures are collected and reported together
// after all commodities finish.
Enumeration enumerate_all(const Instance& instance, const DerivedTimes& derived, int workers,
                          bool strict_filter = true, bool selfloop_exempt = true);

// Per-commodity profit bounds, distributed over `workers` threads.
std::vector<CommodityBound> compute_bounds(const Instance& instance, const DerivedTimes& derived,
                                           int workers, std::uint64_t k_cap = 100000);

}  // namespace hubline
