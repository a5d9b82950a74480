#include "hubline/paths.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <queue>
#include <set>
#include <string>
#include <thread>

#include "hubline/errors.hpp"

namespace hubline {

namespace {

// Absolute tolerance for comparisons against the direct time and for the
// two-hub dominance test; well above accumulated rounding, well below data
// resolution.
constexpr double kTimeTol = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) workers = 1;
  std::atomic<std::size_t> cursor{0};
  auto drain = [&] {
    for (std::size_t i; (i = cursor.fetch_add(1)) < count;) fn(i);
  };
  if (workers == 1 || count <= 1) {
    drain();
    return;
  }
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::size_t>(workers, count));
  pool.reserve(spawn);
  for (int w = 0; w < spawn; ++w) pool.emplace_back(drain);
  for (auto& t : pool) t.join();
}

void rethrow_collected(const std::vector<std::string>& errors, const Instance& instance) {
  std::string joined;
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) {
      const auto& c = instance.commodities()[i];
      joined += "commodity (" + std::to_string(c.origin) + "," + std::to_string(c.destination) +
                "): " + errors[i] + "\n";
    }
  if (!joined.empty()) throw ValidationError("enumeration failed for some commodities:\n" + joined);
}

}  // namespace

const char* path_type_name(PathType t) {
  switch (t) {
    case PathType::odh: return "ODH";
    case PathType::oh: return "OH";
    case PathType::dh: return "DH";
    case PathType::odnh: return "ODNH";
  }
  return "?";
}

// Yen's algorithm over the auxiliary graph. Total order on paths is
// (time, node sequence); the shortest-path subroutine minimizes the same order
// so ties resolve identically everywhere. Candidate times are always re-summed
// left to right over the full sequence, keeping equal-time comparisons exact.
struct KShortestStream::Impl {
  const AuxGraph& g;
  std::uint64_t k_cap;
  std::uint64_t yielded = 0;
  bool started = false;
  bool exhausted = false;
  int n2;

  std::vector<double> arc_time;  // (n2 x n2), negative = absent
  std::vector<std::vector<int>> accepted;
  std::set<std::vector<int>> accepted_set;
  struct Cand {
    double time;
    std::vector<int> seq;
    friend bool operator<(const Cand& a, const Cand& b) {
      if (a.time != b.time) return a.time < b.time;
      return a.seq < b.seq;
    }
  };
  std::set<Cand> frontier;

  Impl(const AuxGraph& graph, std::uint64_t cap) : g(graph), k_cap(cap) {
    n2 = g.n_original() + 2;
    arc_time.assign(static_cast<std::size_t>(n2) * n2, -1.0);
    for (const auto& a : g.arcs()) arc_time[static_cast<std::size_t>(a.from) * n2 + a.to] = a.time;
  }

  double time_of(const std::vector<int>& seq) const {
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
      t += arc_time[static_cast<std::size_t>(seq[i]) * n2 + seq[i + 1]];
    return t;
  }

  std::optional<std::vector<int>> shortest(int start, const std::vector<char>& banned_node,
                                           const std::vector<char>& banned_arc) const {
    struct Entry {
      double dist;
      std::vector<int> seq;
    };
    auto greater = [](const Entry& a, const Entry& b) {
      if (a.dist != b.dist) return a.dist > b.dist;
      return a.seq > b.seq;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(greater)> pq(greater);
    std::vector<char> done(n2, 0);
    pq.push({0.0, {start}});
    while (!pq.empty()) {
      Entry e = pq.top();
      pq.pop();
      const int v = e.seq.back();
      if (done[v]) continue;
      done[v] = 1;
      if (v == g.destination()) return e.seq;
      for (const auto& a : g.outgoing(v)) {
        if (done[a.to] || banned_node[a.to]) continue;
        if (banned_arc[static_cast<std::size_t>(v) * n2 + a.to]) continue;
        Entry child{e.dist + a.time, e.seq};
        child.seq.push_back(a.to);
        pq.push(std::move(child));
      }
    }
    return std::nullopt;
  }

  void spur_from(const std::vector<int>& path) {
    std::vector<char> banned_node(n2, 0);
    std::vector<char> banned_arc(static_cast<std::size_t>(n2) * n2, 0);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      std::fill(banned_arc.begin(), banned_arc.end(), 0);
      for (const auto& q : accepted)
        if (q.size() > i + 1 && std::equal(path.begin(), path.begin() + i + 1, q.begin()))
          banned_arc[static_cast<std::size_t>(q[i]) * n2 + q[i + 1]] = 1;
      auto spur = shortest(path[i], banned_node, banned_arc);
      if (spur) {
        std::vector<int> seq(path.begin(), path.begin() + i);
        seq.insert(seq.end(), spur->begin(), spur->end());
        if (!accepted_set.contains(seq)) frontier.insert({time_of(seq), std::move(seq)});
      }
      banned_node[path[i]] = 1;  // root grows by the spur node for the next i
    }
  }

  std::optional<std::pair<double, std::vector<int>>> next() {
    if (exhausted) return std::nullopt;
    if (yielded >= k_cap)
      throw CapExceededError("path stream cap of " + std::to_string(k_cap) + " reached", yielded);
    if (!started) {
      started = true;
      auto sp = shortest(g.origin(), std::vector<char>(n2, 0),
                         std::vector<char>(static_cast<std::size_t>(n2) * n2, 0));
      if (!sp) {
        exhausted = true;
        return std::nullopt;
      }
      accepted.push_back(*sp);
      accepted_set.insert(*sp);
      ++yielded;
      return std::make_pair(time_of(*sp), *sp);
    }
    spur_from(accepted.back());
    if (frontier.empty()) {
      exhausted = true;
      return std::nullopt;
    }
    Cand best = *frontier.begin();
    frontier.erase(frontier.begin());
    accepted.push_back(best.seq);
    accepted_set.insert(best.seq);
    ++yielded;
    return std::make_pair(best.time, std::move(best.seq));
  }
};

KShortestStream::KShortestStream(const AuxGraph& graph, std::uint64_t k_cap)
    : impl_(std::make_unique<Impl>(graph, k_cap)) {}
KShortestStream::~KShortestStream() = default;
KShortestStream::KShortestStream(KShortestStream&&) noexcept = default;
KShortestStream& KShortestStream::operator=(KShortestStream&&) noexcept = default;

std::optional<std::pair<double, std::vector<int>>> KShortestStream::next() { return impl_->next(); }

CommodityBound commodity_upper_bound(const Instance& instance, const AuxGraph& graph,
                                     const Commodity& commodity, std::uint64_t k_cap) {
  CommodityBound out;
  out.origin = commodity.origin;
  out.destination = commodity.destination;
  const double t_dir = graph.t_direct();
  const int p = instance.params().p;
  const ProfitTerm term{commodity.revenue, instance.nodes()[commodity.origin].population,
                        instance.nodes()[commodity.destination].population, t_dir,
                        instance.params().r};
  KShortestStream stream(graph, k_cap);
  double best_seen = -1.0;
  try {
    while (auto item = stream.next()) {
      const auto& [time, seq] = *item;
      // Nondecreasing stream: once nothing beats the direct time, nothing will.
      if (!(time < t_dir)) return out;
      if (best_seen < 0.0) best_seen = time;
      if (seq.size() - 2 <= static_cast<std::size_t>(p)) {
        out.ub = profit(term, time);
        out.witness_time = time;
        std::vector<int> hubs;
        for (std::size_t i = 1; i + 1 < seq.size(); ++i) hubs.push_back(graph.resolve(seq[i]));
        out.witness_hubs = std::move(hubs);
        return out;
      }
    }
    return out;  // exhausted without an improving path of <= p hubs
  } catch (const CapExceededError&) {
    out.capped = true;
    if (best_seen >= 0.0) {
      // Every admissible service is at least as slow as the best time seen, so
      // the profit there still bounds from above.
      out.ub = profit(term, best_seen);
      out.witness_time = best_seen;
    }
    return out;
  }
}

std::vector<CandidatePath> enumerate_candidates(const Instance& instance,
                                                const DerivedTimes& derived, const AuxGraph& graph,
                                                const Commodity& commodity, bool strict_filter,
                                                bool selfloop_exempt) {
  const int p = instance.params().p;
  const double alpha = instance.params().alpha;
  const double t_dir = graph.t_direct();
  const int o = commodity.origin;
  const int d = commodity.destination;
  const ProfitTerm term{commodity.revenue, instance.nodes()[o].population,
                        instance.nodes()[d].population, t_dir, instance.params().r};
  const int n2 = graph.n_original() + 2;

  std::vector<CandidatePath> out;
  const auto handle = [&](const std::vector<int>& seq, double total) {
    const std::size_t hubs = seq.size() - 2;
    if (hubs < 2) return;
    if (strict_filter ? !(total < t_dir - kTimeTol) : !(total <= t_dir + kTimeTol)) return;

    std::vector<int> resolved(hubs);
    for (std::size_t i = 0; i < hubs; ++i) resolved[i] = graph.resolve(seq[i + 1]);

    // A ride is dominated when hopping on just before one of its hub arcs and
    // off just after is already at least as fast. A two-hub ride is that
    // shortcut itself, so by default it does not knock itself out.
    if (hubs > 2 || !selfloop_exempt) {
      for (std::size_t i = 0; i + 1 < hubs; ++i) {
        const int hi = resolved[i];
        const int hj = resolved[i + 1];
        const double shortcut = instance.time(o, hi) + derived.access[hi] +
                                alpha * instance.time(hi, hj) + derived.exit[hj] +
                                instance.time(hj, d);
        if (shortcut <= total + kTimeTol) return;
      }
    }

    CandidatePath cand;
    cand.origin = o;
    cand.destination = d;
    cand.tau = total;
    cand.profit = profit(term, std::min(total, t_dir));
    const bool o_hub = seq[1] == graph.origin_copy();
    const bool d_hub = seq[seq.size() - 2] == graph.destination_copy();
    cand.ptype = o_hub ? (d_hub ? PathType::odh : PathType::oh)
                       : (d_hub ? PathType::dh : PathType::odnh);
    for (std::size_t i = 0; i + 1 < hubs; ++i)
      cand.edge_ids.push_back(instance.edge_index(resolved[i], resolved[i + 1]));
    std::sort(cand.edge_ids.begin(), cand.edge_ids.end());
    cand.hubs = std::move(resolved);
    out.push_back(std::move(cand));
  };

  std::vector<int> path{graph.origin()};
  std::vector<char> visited(n2, 0);
  visited[graph.origin()] = 1;
  const std::function<void(int, double)> dfs = [&](int node, double acc) {
    for (const auto& a : graph.outgoing(node)) {
      if (a.to == d) {
        path.push_back(d);
        handle(path, acc + a.time);
        path.pop_back();
        continue;
      }
      if (visited[a.to]) continue;
      if (static_cast<int>(path.size()) > p) continue;  // would exceed p hubs
      visited[a.to] = 1;
      path.push_back(a.to);
      dfs(a.to, acc + a.time);
      path.pop_back();
      visited[a.to] = 0;
    }
  };
  dfs(graph.origin(), 0.0);

  std::sort(out.begin(), out.end(), [](const CandidatePath& a, const CandidatePath& b) {
    if (a.tau != b.tau) return a.tau < b.tau;
    return a.hubs < b.hubs;
  });
  return out;
}

Enumeration enumerate_all(const Instance& instance, const DerivedTimes& derived, int workers,
                          bool strict_filter, bool selfloop_exempt) {
  const auto& commodities = instance.commodities();
  Enumeration result;
  result.per_commodity.resize(commodities.size());
  std::vector<std::string> errors(commodities.size());

  auto t0 = Clock::now();
  std::vector<std::optional<AuxGraph>> graphs(commodities.size());
  parallel_for(commodities.size(), workers, [&](std::size_t i) {
    try {
      graphs[i].emplace(instance, derived, commodities[i].origin, commodities[i].destination);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  result.stats.t_prep_seconds = seconds_since(t0);
  rethrow_collected(errors, instance);

  auto t1 = Clock::now();
  parallel_for(commodities.size(), workers, [&](std::size_t i) {
    try {
      result.per_commodity[i] = enumerate_candidates(instance, derived, *graphs[i],
                                                     commodities[i], strict_filter,
                                                     selfloop_exempt);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  result.stats.t_path_seconds = seconds_since(t1);
  rethrow_collected(errors, instance);

  for (const auto& list : result.per_commodity) {
    result.stats.n_path += list.size();
    for (const auto& cand : list) ++result.stats.by_type[static_cast<int>(cand.ptype)];
  }
  return result;
}

std::vector<CommodityBound> compute_bounds(const Instance& instance, const DerivedTimes& derived,
                                           int workers, std::uint64_t k_cap) {
  const auto& commodities = instance.commodities();
  std::vector<CommodityBound> bounds(commodities.size());
  std::vector<std::string> errors(commodities.size());
  parallel_for(commodities.size(), workers, [&](std::size_t i) {
    try {
      const AuxGraph graph(instance, derived, commodities[i].origin, commodities[i].destination);
      bounds[i] = commodity_upper_bound(instance, graph, commodities[i], k_cap);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  rethrow_collected(errors, instance);
  return bounds;
}

}  // namespace hubline
