#pragma once

#include <string>
#include <vector>

#include "hubline/instance.hpp"

namespace hubline {

enum class ArcKind { access, hub, exit };

struct AuxArc {
  int from = 0;
  int to = 0;
  double time = 0.0;
  ArcKind kind = ArcKind::hub;
  friend bool operator==(const AuxArc&, const AuxArc&) = default;
};

// Per-commodity routing graph. Nodes are the instance nodes plus a copy of the
// origin (id n, "origin acting as hub") and a copy of the destination (id n+1,
// "destination acting as hub"); the plain origin/destination ids only ever act
// as terminals. Structure:
//   - access arcs (o, i): reach the line at hub i, weight t_oi + access time;
//   - hub arcs (i, j): ride the line, weight alpha * t_ij, only over candidate
//     hub edges;
//   - exit arcs (j, d): leave the line at hub j, weight exit time + t_jd.
// Every o -> d path of k+2 nodes is a service via k hubs whose exact
// door-to-door time is the path length.
class AuxGraph {
 public:
  struct Options {
    // Keep an arc only when some cheapest completion through it does not
    // exceed the direct time (the per-arc admission tests). Off builds the
    // raw structural graph.
    bool admission_tests = true;
    // Drop nodes that cannot sit on any origin -> destination walk (not
    // reachable from the origin or not co-reachable to the destination).
    bool degree_prune = true;
  };

  AuxGraph(const Instance& instance, const DerivedTimes& derived, int origin, int destination);
  AuxGraph(const Instance& instance, const DerivedTimes& derived, int origin, int destination,
           Options options);

  int origin() const noexcept { return origin_; }
  int destination() const noexcept { return destination_; }
  int n_original() const noexcept { return n_; }
  int origin_copy() const noexcept { return n_; }
  int destination_copy() const noexcept { return n_ + 1; }
  // Maps a node id back to the instance node it stands for.
  int resolve(int id) const noexcept {
    return id == n_ ? origin_ : (id == n_ + 1 ? destination_ : id);
  }
  double t_direct() const noexcept { return t_direct_; }

  // Surviving node ids, ascending.
  const std::vector<int>& nodes() const noexcept { return nodes_; }
  // All arcs sorted by (from, to).
  const std::vector<AuxArc>& arcs() const noexcept { return arcs_; }
  // Out-arcs of a node, targets ascending. Empty for removed nodes.
  const std::vector<AuxArc>& outgoing(int id) const { return adj_[id]; }

  // Graphviz rendering for debugging dumps.
  std::string to_dot() const;

 private:
  int n_;
  int origin_;
  int destination_;
  double t_direct_;
  std::vector<int> nodes_;
  std::vector<AuxArc> arcs_;
  std::vector<std::vector<AuxArc>> adj_;
};

}  // namespace hubline
