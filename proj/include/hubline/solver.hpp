#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hubline/instance.hpp"
#include "hubline/paths.hpp"

namespace hubline {

// A hub line: p distinct nodes joined consecutively by candidate hub edges,
// oriented so that nodes.front() < nodes.back().
struct HubLine {
  std::vector<int> nodes;
  std::vector<int> edge_ids;  // sorted indices into Instance::hub_edges()
};

// Validates node count, distinctness and edge availability, canonicalizes the
// orientation and fills edge_ids.
HubLine make_hub_line(const Instance& instance, std::vector<int> nodes);

struct Metrics {
  double pct_od_served = 0.0;
  double pct_demand_served = 0.0;
  double pct_time_saved = 0.0;
};

struct Solution {
  HubLine line;
  double objective = 0.0;
  // Per commodity: index into its candidate list, or -1 when served directly.
  std::vector<int> assigned;
  // Per commodity: realized door-to-door time (direct time when unassigned).
  std::vector<double> t_final;
  Metrics metrics;
};

struct SolveStats {
  std::uint64_t lines_evaluated = 0;  // exhaustive search
  std::uint64_t nodes_expanded = 0;   // branch and bound
  double root_bound = 0.0;            // bound at the empty partial line
  double seconds = 0.0;
};

struct SolveResult {
  Solution solution;
  SolveStats stats;
};

// Routes every commodity along its most profitable candidate supported by the
// line (profit ties broken by lexicographically smaller hub sequence); leaves
// it on the direct connection when no supported candidate makes money.
Solution evaluate_line(const Instance& instance, const Enumeration& enumeration,
                       const HubLine& line);

// Evaluates every hub line over the candidate edge set, in lexicographic node
// order, keeping the first line attaining the best objective. Throws
// CapExceededError past line_cap lines and ValidationError when the edge set
// admits no line at all.
SolveResult solve_enumerate(const Instance& instance, const Enumeration& enumeration,
                            std::uint64_t line_cap = 10000000);

// Best-first branch and bound over partial lines. A node is a partial simple
// path plus a set of excluded edges; children extend an endpoint with one
// usable edge while excluding the edges of earlier siblings, so the children
// partition the completions. The bound sums, per commodity, the best profit
// over candidates that could still be supported by some completion (a cheap
// necessary test, hence admissible). Agrees with solve_enumerate on the
// objective. Throws CapExceededError past node_cap expansions.
SolveResult solve_bnb(const Instance& instance, const Enumeration& enumeration,
                      const std::vector<CommodityBound>& bounds,
                      std::uint64_t node_cap = 10000000);

// Share of markets served, share of demand served (at realized times), and
// share of passenger time saved. With weighted=false the time-saved ratio
// weights every commodity equally instead of by realized demand.
Metrics compute_metrics(const Instance& instance, const Enumeration& enumeration,
                        const Solution& solution, bool weighted = true);

// Per-commodity rows (o, d, served, t_direct, t_prime, demand, profit, hubs)
// followed by a commented summary block. Deterministic bytes.
void write_solution_csv(const Instance& instance, const Enumeration& enumeration,
                        const Solution& solution, std::ostream& out);

// Reads back the format written above: per-commodity hub assignments plus the
// summary line. Only the fields needed downstream are reconstructed.
struct SolutionFileRow {
  int origin = 0;
  int destination = 0;
  bool served = false;
  double t_direct = 0.0;
  double t_prime = 0.0;
  double demand = 0.0;
  double profit = 0.0;
  std::vector<int> hubs;
};
struct SolutionFile {
  std::vector<SolutionFileRow> rows;
  std::vector<int> line_nodes;
  double objective = 0.0;
};
SolutionFile read_solution_csv(const std::string& path);

}  // namespace hubline
