#include "hubline/aux_graph.hpp"

#include <algorithm>
#include <sstream>

#include "hubline/errors.hpp"

namespace hubline {

AuxGraph::AuxGraph(const Instance& instance, const DerivedTimes& derived, int origin,
                   int destination)
    : AuxGraph(instance, derived, origin, destination, Options()) {}

AuxGraph::AuxGraph(const Instance& instance, const DerivedTimes& derived, int origin,
                   int destination, Options options)
    : n_(instance.n()), origin_(origin), destination_(destination) {
  const int n = n_;
  if (origin < 0 || origin >= n || destination < 0 || destination >= n || origin == destination)
    throw ValidationError("auxiliary graph needs two distinct instance nodes");
  if (!instance.metric_closed())
    throw ValidationError("auxiliary graph needs a metric-closed instance");

  const double alpha = instance.params().alpha;
  t_direct_ = instance.time(origin, destination);
  const int o_copy = origin_copy();
  const int d_copy = destination_copy();

  // Hub roles: every node except the terminals, plus the two copies. The
  // origin copy never receives a hub arc and the destination copy never emits
  // one, so entering the line at the origin or leaving it at the destination
  // happens only through the corresponding copy's single access/exit arc.
  std::vector<int> hub_ids;
  for (int v = 0; v < n; ++v)
    if (v != origin && v != destination) hub_ids.push_back(v);
  hub_ids.push_back(o_copy);
  hub_ids.push_back(d_copy);

  const auto access_leg = [&](int id) {
    const int v = resolve(id);
    return instance.time(origin, v) + derived.access[v];
  };
  const auto exit_leg = [&](int id) {
    const int v = resolve(id);
    return derived.exit[v] + instance.time(v, destination);
  };

  std::vector<AuxArc> hub_arcs;
  std::vector<char> access_ok(static_cast<std::size_t>(n) + 2, 0);
  std::vector<char> exit_ok(static_cast<std::size_t>(n) + 2, 0);
  for (int u : hub_ids) {
    if (u == d_copy) continue;
    for (int v : hub_ids) {
      if (v == o_copy || v == u) continue;
      const int uk = resolve(u);
      const int vk = resolve(v);
      if (instance.edge_index(uk, vk) < 0) continue;
      const double ride = alpha * instance.time(uk, vk);
      if (options.admission_tests) {
        if (ride > t_direct_) continue;
        if (access_leg(u) + ride <= t_direct_) access_ok[u] = 1;
        if (ride + exit_leg(v) <= t_direct_) exit_ok[v] = 1;
      }
      hub_arcs.push_back({u, v, ride, ArcKind::hub});
    }
  }
  if (!options.admission_tests) {
    for (int v : hub_ids) access_ok[v] = exit_ok[v] = 1;
  }

  arcs_.clear();
  for (int v : hub_ids)
    if (v != d_copy && access_ok[v])
      arcs_.push_back({origin, v, access_leg(v), ArcKind::access});
  arcs_.insert(arcs_.end(), hub_arcs.begin(), hub_arcs.end());
  for (int v : hub_ids)
    if (v != o_copy && exit_ok[v])
      arcs_.push_back({v, destination, exit_leg(v), ArcKind::exit});

  // A node earns its keep only on some origin -> destination walk: it must be
  // reachable from the origin and reach the destination. This subsumes
  // dropping interior nodes that lack an in-arc or an out-arc (iterated to a
  // fixpoint), and clears hub cycles the origin can never board.
  std::vector<char> alive(static_cast<std::size_t>(n) + 2, 0);
  alive[origin] = alive[destination] = 1;
  for (int v : hub_ids) alive[v] = 1;
  if (options.degree_prune) {
    const auto sweep = [&](int start, bool forward) {
      std::vector<char> seen(static_cast<std::size_t>(n) + 2, 0);
      std::vector<int> stack{start};
      seen[start] = 1;
      while (!stack.empty()) {
        const int at = stack.back();
        stack.pop_back();
        for (const auto& a : arcs_) {
          const int from = forward ? a.from : a.to;
          const int to = forward ? a.to : a.from;
          if (from == at && !seen[to]) {
            seen[to] = 1;
            stack.push_back(to);
          }
        }
      }
      return seen;
    };
    const std::vector<char> fwd = sweep(origin, true);
    const std::vector<char> bwd = sweep(destination, false);
    for (int v : hub_ids) alive[v] = fwd[v] && bwd[v];
    std::erase_if(arcs_, [&](const AuxArc& a) { return !alive[a.from] || !alive[a.to]; });
  }

  std::sort(arcs_.begin(), arcs_.end(),
            [](const AuxArc& a, const AuxArc& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  for (int id = 0; id < n + 2; ++id)
    if (alive[id]) nodes_.push_back(id);
  adj_.assign(static_cast<std::size_t>(n) + 2, {});
  for (const auto& a : arcs_) adj_[a.from].push_back(a);
}

std::string AuxGraph::to_dot() const {
  std::ostringstream os;
  os << "digraph aux {\n";
  os << "  rankdir=LR;\n";
  for (int id : nodes_) {
    os << "  n" << id << " [label=\"";
    if (id == origin_copy()) os << resolve(id) << "'";
    else if (id == destination_copy()) os << resolve(id) << "'";
    else os << id;
    os << "\"";
    if (id == origin_ || id == destination_) os << ", shape=doublecircle";
    os << "];\n";
  }
  for (const auto& a : arcs_) {
    os << "  n" << a.from << " -> n" << a.to << " [label=\"" << a.time << "\"";
    if (a.kind == ArcKind::access) os << ", color=blue";
    else if (a.kind == ArcKind::exit) os << ", color=red";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace hubline
