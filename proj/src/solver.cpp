#include "hubline/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <queue>
#include <sstream>

#include "hubline/errors.hpp"
#include "hubline/gravity.hpp"

namespace hubline {

namespace {

constexpr double kObjTol = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// True when the sorted id list `sub` is contained in the sorted id list `sup`.
bool subset_of(const std::vector<int>& sub, const std::vector<int>& sup) {
  return std::includes(sup.begin(), sup.end(), sub.begin(), sub.end());
}

}  // namespace

HubLine make_hub_line(const Instance& instance, std::vector<int> nodes) {
  const int p = instance.params().p;
  if (static_cast<int>(nodes.size()) != p)
    throw ValidationError("a hub line needs exactly p=" + std::to_string(p) + " nodes, got " +
                          std::to_string(nodes.size()));
  std::vector<int> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ValidationError("hub line nodes must be distinct");
  for (int v : nodes)
    if (v < 0 || v >= instance.n()) throw ValidationError("hub line node out of range");
  if (nodes.front() > nodes.back()) std::reverse(nodes.begin(), nodes.end());
  HubLine line;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const int e = instance.edge_index(nodes[i], nodes[i + 1]);
    if (e < 0)
      throw ValidationError("consecutive hub line nodes " + std::to_string(nodes[i]) + "," +
                            std::to_string(nodes[i + 1]) + " are not a candidate hub edge");
    line.edge_ids.push_back(e);
  }
  std::sort(line.edge_ids.begin(), line.edge_ids.end());
  line.nodes = std::move(nodes);
  return line;
}

Solution evaluate_line(const Instance& instance, const Enumeration& enumeration,
                       const HubLine& line) {
  const auto& commodities = instance.commodities();
  Solution sol;
  sol.line = line;
  sol.assigned.assign(commodities.size(), -1);
  sol.t_final.resize(commodities.size());
  double objective = 0.0;
  for (std::size_t c = 0; c < commodities.size(); ++c) {
    const auto& cands = enumeration.per_commodity[c];
    int best = -1;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (!subset_of(cands[i].edge_ids, line.edge_ids)) continue;
      if (best < 0 || cands[i].profit > cands[best].profit ||
          (cands[i].profit == cands[best].profit && cands[i].hubs < cands[best].hubs))
        best = static_cast<int>(i);
    }
    if (best >= 0 && cands[best].profit > 0.0) {
      sol.assigned[c] = best;
      sol.t_final[c] = cands[best].tau;
      objective += cands[best].profit;
    } else {
      sol.t_final[c] = instance.time(commodities[c].origin, commodities[c].destination);
    }
  }
  sol.objective = objective;
  sol.metrics = compute_metrics(instance, enumeration, sol);
  return sol;
}

Metrics compute_metrics(const Instance& instance, const Enumeration& enumeration,
                        const Solution& solution, bool weighted) {
  (void)enumeration;
  const auto& commodities = instance.commodities();
  const double r = instance.params().r;
  Metrics m;
  if (commodities.empty()) return m;
  std::size_t served = 0;
  double demand_served = 0.0, demand_all = 0.0;
  double time_before = 0.0, time_after = 0.0;
  for (std::size_t c = 0; c < commodities.size(); ++c) {
    const auto& cm = commodities[c];
    const double t_dir = instance.time(cm.origin, cm.destination);
    const double t_fin = solution.t_final[c];
    const double w = demand(instance.nodes()[cm.origin].population,
                            instance.nodes()[cm.destination].population, t_fin, r);
    const double weight = weighted ? w : 1.0;
    demand_all += w;
    if (solution.assigned[c] >= 0) {
      ++served;
      demand_served += w;
    }
    time_before += weight * t_dir;
    time_after += weight * t_fin;
  }
  m.pct_od_served = 100.0 * static_cast<double>(served) / static_cast<double>(commodities.size());
  m.pct_demand_served = 100.0 * demand_served / demand_all;
  m.pct_time_saved = 100.0 * (time_before - time_after) / time_before;
  return m;
}

namespace {

// Visits every canonical line (front < back) in lexicographic node order.
// Returns false when the visitor asks to stop.
void for_each_line(const Instance& instance, std::uint64_t line_cap,
                   const std::function<void(const std::vector<int>&)>& visit) {
  const int n = instance.n();
  const int p = instance.params().p;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [k, m] : instance.hub_edges()) {
    adj[k].push_back(m);
    adj[m].push_back(k);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  std::uint64_t emitted = 0;
  std::vector<int> path;
  std::vector<char> used(n, 0);
  const std::function<void()> extend = [&] {
    if (static_cast<int>(path.size()) == p) {
      if (path.front() < path.back()) {
        if (++emitted > line_cap)
          throw CapExceededError("line enumeration cap of " + std::to_string(line_cap) +
                                     " reached; at least that many lines exist",
                                 line_cap);
        visit(path);
      }
      return;
    }
    for (int next : adj[path.back()]) {
      if (used[next]) continue;
      used[next] = 1;
      path.push_back(next);
      extend();
      path.pop_back();
      used[next] = 0;
    }
  };
  for (int s = 0; s < n; ++s) {
    used[s] = 1;
    path.assign(1, s);
    extend();
    used[s] = 0;
  }
}

}  // namespace

SolveResult solve_enumerate(const Instance& instance, const Enumeration& enumeration,
                            std::uint64_t line_cap) {
  const auto t0 = Clock::now();
  SolveResult res;
  bool have = false;
  for_each_line(instance, line_cap, [&](const std::vector<int>& nodes) {
    ++res.stats.lines_evaluated;
    Solution sol = evaluate_line(instance, enumeration, make_hub_line(instance, nodes));
    if (!have || sol.objective > res.solution.objective) {
      res.solution = std::move(sol);
      have = true;
    }
  });
  if (!have) throw ValidationError("the candidate hub edge set admits no hub line");
  res.stats.seconds = seconds_since(t0);
  return res;
}

namespace {

// Union of a partial line's edges with a candidate's edges, tested for "could
// still lie on one simple path with at most p-1 edges": every endpoint degree
// at most 2, no cycle, and enough edge budget to chain the fragments together.
class CompletionTest {
 public:
  CompletionTest(const Instance& instance, int p)
      : instance_(instance), p_(p), parent_(instance.n(), -1), degree_(instance.n(), 0) {}

  bool compatible(const std::vector<int>& line_edges, const std::vector<char>& excluded,
                  const std::vector<int>& cand_edges) {
    for (int e : cand_edges)
      if (excluded[e]) return false;
    merged_.assign(line_edges.begin(), line_edges.end());
    for (int e : cand_edges)
      if (!std::binary_search(line_edges.begin(), line_edges.end(), e)) merged_.push_back(e);

    bool ok = static_cast<int>(merged_.size()) <= p_ - 1;
    touched_.clear();
    for (std::size_t i = 0; ok && i < merged_.size(); ++i) {
      const auto& edge = instance_.hub_edges()[merged_[i]];
      touch(edge.k);
      touch(edge.m);
      if (++degree_[edge.k] > 2 || ++degree_[edge.m] > 2) {
        ok = false;
        break;
      }
      const int rk = find(edge.k);
      const int rm = find(edge.m);
      if (rk == rm) {  // cycle
        ok = false;
        break;
      }
      parent_[rk] = rm;
    }
    if (ok) {
      // Chaining f disjoint fragments into one line costs f-1 extra edges.
      int fragments = 0;
      for (int v : touched_)
        if (find(v) == v) ++fragments;
      ok = static_cast<int>(merged_.size()) + (fragments - 1) <= p_ - 1;
    }
    for (int v : touched_) {
      parent_[v] = -1;
      degree_[v] = 0;
    }
    return ok;
  }

 private:
  void touch(int v) {
    if (parent_[v] < 0) {
      parent_[v] = v;
      touched_.push_back(v);
    }
  }
  int find(int v) { return parent_[v] == v ? v : parent_[v] = find(parent_[v]); }

  const Instance& instance_;
  int p_;
  std::vector<int> parent_;
  std::vector<int> degree_;
  std::vector<int> merged_;
  std::vector<int> touched_;
};

}  // namespace

SolveResult solve_bnb(const Instance& instance, const Enumeration& enumeration,
                      const std::vector<CommodityBound>& bounds, std::uint64_t node_cap) {
  const auto t0 = Clock::now();
  const auto& commodities = instance.commodities();
  const int p = instance.params().p;
  const std::size_t n_edges = instance.hub_edges().size();

  // Candidates by decreasing profit; the bound walks each list until the first
  // one that still fits the partial line.
  std::vector<std::vector<const CandidatePath*>> by_profit(commodities.size());
  for (std::size_t c = 0; c < commodities.size(); ++c) {
    auto& list = by_profit[c];
    for (const auto& cand : enumeration.per_commodity[c]) list.push_back(&cand);
    std::sort(list.begin(), list.end(), [](const CandidatePath* a, const CandidatePath* b) {
      if (a->profit != b->profit) return a->profit > b->profit;
      return a->hubs < b->hubs;
    });
  }

  CompletionTest tester(instance, p);
  const auto node_bound = [&](const std::vector<int>& line_edges,
                              const std::vector<char>& excluded) {
    double total = 0.0;
    for (std::size_t c = 0; c < commodities.size(); ++c) {
      if (bounds[c].ub <= 0.0 && by_profit[c].empty()) continue;
      for (const CandidatePath* cand : by_profit[c]) {
        if (cand->profit <= 0.0) break;
        if (tester.compatible(line_edges, excluded, cand->edge_ids)) {
          total += cand->profit;
          break;
        }
      }
    }
    return total;
  };

  struct Node {
    std::vector<int> path;        // node ids, empty at the root
    std::vector<int> line_edges;  // sorted edge ids of the partial line
    std::vector<char> excluded;   // edge ids barred from every completion
    double bound = 0.0;
    std::uint64_t seq = 0;
  };
  const auto worse = [](const Node& a, const Node& b) {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.seq > b.seq;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> queue(worse);

  SolveResult res;
  // Seed the incumbent with the lexicographically first line so ties and
  // all-zero instances resolve exactly as exhaustive search does.
  bool have_incumbent = false;
  try {
    for_each_line(instance, 1, [&](const std::vector<int>& nodes) {
      res.solution = evaluate_line(instance, enumeration, make_hub_line(instance, nodes));
      have_incumbent = true;
    });
  } catch (const CapExceededError&) {
  }
  if (!have_incumbent) throw ValidationError("the candidate hub edge set admits no hub line");

  std::uint64_t seq = 0;
  Node root;
  root.excluded.assign(n_edges, 0);
  root.bound = node_bound(root.line_edges, root.excluded);
  res.stats.root_bound = root.bound;
  queue.push(std::move(root));

  while (!queue.empty()) {
    Node node = queue.top();
    queue.pop();
    if (node.bound <= res.solution.objective + kObjTol) break;  // best-first: done
    if (++res.stats.nodes_expanded > node_cap)
      throw CapExceededError("branch-and-bound node cap of " + std::to_string(node_cap) +
                                 " reached",
                             node_cap);

    // Usable extensions, ascending edge id.
    std::vector<int> attachable;
    for (std::size_t e = 0; e < n_edges; ++e) {
      if (node.excluded[e]) continue;
      const auto& edge = instance.hub_edges()[e];
      if (node.path.empty()) {
        attachable.push_back(static_cast<int>(e));
        continue;
      }
      const int head = node.path.front();
      const int tail = node.path.back();
      const bool at_head = edge.k == head || edge.m == head;
      const bool at_tail = edge.k == tail || edge.m == tail;
      if (!at_head && !at_tail) continue;
      const int other = (edge.k == head || edge.k == tail) ? edge.m : edge.k;
      if (std::find(node.path.begin(), node.path.end(), other) != node.path.end()) continue;
      attachable.push_back(static_cast<int>(e));
    }

    std::vector<char> child_excluded = node.excluded;
    for (int e : attachable) {
      const auto& edge = instance.hub_edges()[e];
      Node child;
      child.path = node.path;
      if (child.path.empty()) {
        child.path = {edge.k, edge.m};
      } else if (edge.k == child.path.front() || edge.m == child.path.front()) {
        child.path.insert(child.path.begin(),
                          edge.k == child.path.front() ? edge.m : edge.k);
      } else {
        child.path.push_back(edge.k == child.path.back() ? edge.m : edge.k);
      }
      child.line_edges = node.line_edges;
      child.line_edges.insert(
          std::upper_bound(child.line_edges.begin(), child.line_edges.end(), e), e);
      child.excluded = child_excluded;
      child_excluded[e] = 1;  // later siblings must not reuse this edge

      if (static_cast<int>(child.path.size()) == p) {
        Solution sol = evaluate_line(instance, enumeration, make_hub_line(instance, child.path));
        if (sol.objective > res.solution.objective) res.solution = std::move(sol);
        continue;
      }
      child.bound = node_bound(child.line_edges, child.excluded);
      if (child.bound <= res.solution.objective + kObjTol) continue;
      child.seq = ++seq;
      queue.push(std::move(child));
    }
  }

  res.stats.seconds = seconds_since(t0);
  return res;
}

void write_solution_csv(const Instance& instance, const Enumeration& enumeration,
                        const Solution& solution, std::ostream& out) {
  const auto& commodities = instance.commodities();
  const double r = instance.params().r;
  out << "o,d,served,t_direct,t_prime,demand,profit,hubs\n";
  for (std::size_t c = 0; c < commodities.size(); ++c) {
    const auto& cm = commodities[c];
    const double t_dir = instance.time(cm.origin, cm.destination);
    const double t_fin = solution.t_final[c];
    const double w = demand(instance.nodes()[cm.origin].population,
                            instance.nodes()[cm.destination].population, t_fin, r);
    out << cm.origin << ',' << cm.destination << ',' << (solution.assigned[c] >= 0 ? 1 : 0) << ','
        << fmt_num(t_dir) << ',' << fmt_num(t_fin) << ',' << fmt_num(w) << ',';
    if (solution.assigned[c] >= 0) {
      const auto& cand = enumeration.per_commodity[c][solution.assigned[c]];
      out << fmt_num(cand.profit) << ',';
      for (std::size_t i = 0; i < cand.hubs.size(); ++i)
        out << (i ? ";" : "") << cand.hubs[i];
    } else {
      out << fmt_num(0.0) << ',';
    }
    out << '\n';
  }
  out << "# objective," << fmt_num(solution.objective) << '\n';
  out << "# line,";
  for (std::size_t i = 0; i < solution.line.nodes.size(); ++i)
    out << (i ? ";" : "") << solution.line.nodes[i];
  out << '\n';
  out << "# pct_od_served," << fmt_num(solution.metrics.pct_od_served) << '\n';
  out << "# pct_demand_served," << fmt_num(solution.metrics.pct_demand_served) << '\n';
  out << "# pct_time_saved," << fmt_num(solution.metrics.pct_time_saved) << '\n';
}

SolutionFile read_solution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  SolutionFile file;
  std::string line;
  std::uint64_t ln = 0;
  const auto parse_ints = [&](const std::string& s) {
    std::vector<int> ids;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ';'))
      if (!part.empty()) ids.push_back(std::stoi(part));
    return ids;
  };
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string key, value;
      if (!std::getline(ss, key, ',') || !std::getline(ss, value)) continue;
      key.erase(0, key.find_first_not_of(' '));
      if (key == "objective") file.objective = std::stod(value);
      else if (key == "line") file.line_nodes = parse_ints(value);
      continue;
    }
    if (line.rfind("o,d,", 0) == 0) continue;  // header
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 7) throw ParseError(path, ln, "expected at least 7 columns");
    SolutionFileRow row;
    try {
      row.origin = std::stoi(fields[0]);
      row.destination = std::stoi(fields[1]);
      row.served = std::stoi(fields[2]) != 0;
      row.t_direct = std::stod(fields[3]);
      row.t_prime = std::stod(fields[4]);
      row.demand = std::stod(fields[5]);
      row.profit = std::stod(fields[6]);
      if (fields.size() > 7) row.hubs = parse_ints(fields[7]);
    } catch (const std::exception&) {
      throw ParseError(path, ln, "malformed row");
    }
    file.rows.push_back(std::move(row));
  }
  return file;
}

}  // namespace hubline
