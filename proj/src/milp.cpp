#include "hubline/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "hubline/errors.hpp"
#include "hubline/gravity.hpp"

namespace hubline {

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kInfBound = 1e20;

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void add_term(MilpRow& row, int var, double coef) {
  if (coef != 0.0) row.terms.emplace_back(var, coef);
}

}  // namespace

const char* variant_name(MilpVariant v) {
  switch (v) {
    case MilpVariant::f1l_flow: return "f1l_flow";
    case MilpVariant::f1l_sec: return "f1l_sec";
    case MilpVariant::f2l: return "f2l";
    case MilpVariant::f2l_prime: return "f2l_prime";
  }
  return "?";
}

MilpVariant parse_variant(const std::string& name) {
  if (name == "f1l_flow") return MilpVariant::f1l_flow;
  if (name == "f1l_sec") return MilpVariant::f1l_sec;
  if (name == "f2l") return MilpVariant::f2l;
  if (name == "f2l_prime") return MilpVariant::f2l_prime;
  throw ValidationError("unknown formulation variant '" + name +
                        "' (expected f1l_flow, f1l_sec, f2l or f2l_prime)");
}

int MilpModel::arc_index(int k, int m) const {
  const auto it = std::lower_bound(arcs.begin(), arcs.end(), std::make_pair(k, m));
  if (it == arcs.end() || *it != std::make_pair(k, m)) return -1;
  return static_cast<int>(it - arcs.begin());
}

int MilpModel::var_index(const std::string& name) const {
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name) return static_cast<int>(i);
  return -1;
}

MilpModel build_milp(const Instance& instance, const Enumeration& enumeration,
                     MilpVariant variant, MilpCuts cuts) {
  const bool edge_based = variant == MilpVariant::f1l_flow || variant == MilpVariant::f1l_sec;
  if (cuts.ineq_new && variant != MilpVariant::f2l_prime)
    throw ValidationError(std::string("ineq_new requires the aggregated arc formulation; it "
                                      "cannot be combined with ") +
                          variant_name(variant));

  const int n = instance.n();
  const int p = instance.params().p;
  const auto& edges = instance.hub_edges();
  const auto& commodities = instance.commodities();

  MilpModel model;
  model.variant = variant;
  model.cuts = cuts;
  model.n = n;

  for (const auto& [k, m] : edges) {
    model.arcs.emplace_back(k, m);
    model.arcs.emplace_back(m, k);
  }
  std::sort(model.arcs.begin(), model.arcs.end());

  // Variables: z, then y or y', then l (arc based), then f (flow), then v.
  model.z0 = 0;
  for (int k = 0; k < n; ++k)
    model.vars.push_back({"z_" + std::to_string(k), VarKind::binary, 0.0, 1.0, 0.0});
  if (edge_based) {
    model.y0 = static_cast<int>(model.vars.size());
    for (const auto& [k, m] : edges)
      model.vars.push_back(
          {"y_" + std::to_string(k) + "_" + std::to_string(m), VarKind::binary, 0.0, 1.0, 0.0});
  } else {
    model.yp0 = static_cast<int>(model.vars.size());
    for (const auto& [k, m] : model.arcs)
      model.vars.push_back(
          {"yp_" + std::to_string(k) + "_" + std::to_string(m), VarKind::binary, 0.0, 1.0, 0.0});
    model.l0 = static_cast<int>(model.vars.size());
    for (int k = 0; k < n; ++k)
      model.vars.push_back({"l_" + std::to_string(k), VarKind::continuous, 0.0,
                            static_cast<double>(n - 1), 0.0});
  }
  if (variant == MilpVariant::f1l_flow) {
    model.f0 = static_cast<int>(model.vars.size());
    for (const auto& [k, m] : model.arcs)
      model.vars.push_back({"f_" + std::to_string(k) + "_" + std::to_string(m),
                            VarKind::continuous, 0.0, kInfBound, 0.0});
  }
  for (std::size_t c = 0; c < commodities.size(); ++c) {
    model.v0.push_back(static_cast<int>(model.vars.size()));
    const auto& cands = enumeration.per_commodity[c];
    for (std::size_t i = 0; i < cands.size(); ++i)
      model.vars.push_back({"v_" + std::to_string(c) + "_" + std::to_string(i), VarKind::binary,
                            0.0, 1.0, cands[i].profit});
  }

  // Rows.
  {
    MilpRow row{"hubs", 'E', static_cast<double>(p), {}};
    for (int k = 0; k < n; ++k) add_term(row, model.var_z(k), 1.0);
    model.rows.push_back(std::move(row));
  }
  if (edge_based) {
    MilpRow row{"edges", 'E', static_cast<double>(p - 1), {}};
    for (std::size_t e = 0; e < edges.size(); ++e) add_term(row, model.var_y(static_cast<int>(e)), 1.0);
    model.rows.push_back(std::move(row));
    for (int k = 0; k < n; ++k) {
      MilpRow deg{"deg_" + std::to_string(k), 'L', 0.0, {}};
      for (std::size_t e = 0; e < edges.size(); ++e)
        if (edges[e].k == k || edges[e].m == k) add_term(deg, model.var_y(static_cast<int>(e)), 1.0);
      add_term(deg, model.var_z(k), -2.0);
      model.rows.push_back(std::move(deg));
    }
  } else {
    MilpRow row{"arcs", 'E', static_cast<double>(p - 1), {}};
    for (std::size_t a = 0; a < model.arcs.size(); ++a) add_term(row, model.yp0 + static_cast<int>(a), 1.0);
    model.rows.push_back(std::move(row));
    if (variant == MilpVariant::f2l) {
      for (int k = 0; k < n; ++k) {
        MilpRow out{"outdeg_" + std::to_string(k), 'L', 0.0, {}};
        for (std::size_t a = 0; a < model.arcs.size(); ++a)
          if (model.arcs[a].first == k) add_term(out, model.yp0 + static_cast<int>(a), 1.0);
        add_term(out, model.var_z(k), -1.0);
        model.rows.push_back(std::move(out));
      }
      for (int k = 0; k < n; ++k) {
        MilpRow in{"indeg_" + std::to_string(k), 'L', 0.0, {}};
        for (std::size_t a = 0; a < model.arcs.size(); ++a)
          if (model.arcs[a].second == k) add_term(in, model.yp0 + static_cast<int>(a), 1.0);
        add_term(in, model.var_z(k), -1.0);
        model.rows.push_back(std::move(in));
      }
    } else {
      for (int k = 0; k < n; ++k) {
        MilpRow agg{"aggdeg_" + std::to_string(k), 'L', 0.0, {}};
        for (std::size_t a = 0; a < model.arcs.size(); ++a)
          if (model.arcs[a].first == k || model.arcs[a].second == k)
            add_term(agg, model.yp0 + static_cast<int>(a), 1.0);
        add_term(agg, model.var_z(k), -2.0);
        model.rows.push_back(std::move(agg));
      }
    }
    for (std::size_t a = 0; a < model.arcs.size(); ++a) {
      const auto [k, m] = model.arcs[a];
      MilpRow mtz{"mtz_" + std::to_string(k) + "_" + std::to_string(m), 'L',
                  static_cast<double>(n - 1), {}};
      add_term(mtz, model.var_l(k), 1.0);
      add_term(mtz, model.var_l(m), -1.0);
      add_term(mtz, model.yp0 + static_cast<int>(a), static_cast<double>(n));
      model.rows.push_back(std::move(mtz));
    }
  }
  if (variant == MilpVariant::f1l_flow) {
    for (int k = 0; k < n; ++k) {
      MilpRow cap{"flowcap_" + std::to_string(k), 'L', 0.0, {}};
      for (std::size_t a = 0; a < model.arcs.size(); ++a)
        if (model.arcs[a].first == k) add_term(cap, model.f0 + static_cast<int>(a), 1.0);
      add_term(cap, model.var_z(k), -static_cast<double>(p - 1));
      model.rows.push_back(std::move(cap));
    }
    // One unit of flow must reach every open hub from the highest-indexed open
    // hub; written for every node pair m < k.
    for (int m = 0; m < n; ++m)
      for (int k = m + 1; k < n; ++k) {
        MilpRow bal{"flowbal_" + std::to_string(m) + "_" + std::to_string(k), 'G',
                    -static_cast<double>(p), {}};
        for (std::size_t a = 0; a < model.arcs.size(); ++a) {
          if (model.arcs[a].second == m) add_term(bal, model.f0 + static_cast<int>(a), 1.0);
          else if (model.arcs[a].first == m) add_term(bal, model.f0 + static_cast<int>(a), -1.0);
        }
        add_term(bal, model.var_z(m), -1.0);
        add_term(bal, model.var_z(k), -static_cast<double>(p));
        model.rows.push_back(std::move(bal));
      }
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [k, m] = edges[e];
      MilpRow fe{"flowedge_" + std::to_string(k) + "_" + std::to_string(m), 'L', 0.0, {}};
      add_term(fe, model.var_f(k, m), 1.0);
      add_term(fe, model.var_f(m, k), 1.0);
      add_term(fe, model.var_y(static_cast<int>(e)), -static_cast<double>(p - 1));
      model.rows.push_back(std::move(fe));
    }
  }
  for (std::size_t c = 0; c < commodities.size(); ++c) {
    MilpRow assign{"assign_" + std::to_string(c), 'L', 1.0, {}};
    const auto& cands = enumeration.per_commodity[c];
    for (std::size_t i = 0; i < cands.size(); ++i)
      add_term(assign, model.var_v(static_cast<int>(c), static_cast<int>(i)), 1.0);
    model.rows.push_back(std::move(assign));
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    for (std::size_t c = 0; c < commodities.size(); ++c) {
      MilpRow link{"link_" + std::to_string(e) + "_" + std::to_string(c), 'L', 0.0, {}};
      const auto& cands = enumeration.per_commodity[c];
      for (std::size_t i = 0; i < cands.size(); ++i)
        if (std::binary_search(cands[i].edge_ids.begin(), cands[i].edge_ids.end(),
                               static_cast<int>(e)))
          add_term(link, model.var_v(static_cast<int>(c), static_cast<int>(i)), 1.0);
      if (edge_based) {
        add_term(link, model.var_y(static_cast<int>(e)), -1.0);
      } else {
        add_term(link, model.var_yp(edges[e].k, edges[e].m), -1.0);
        add_term(link, model.var_yp(edges[e].m, edges[e].k), -1.0);
      }
      model.rows.push_back(std::move(link));
    }
  }
  if (cuts.desthub_orhub) {
    for (std::size_t c = 0; c < commodities.size(); ++c) {
      MilpRow dhub{"dhub_" + std::to_string(c), 'L', 0.0, {}};
      const auto& cands = enumeration.per_commodity[c];
      for (std::size_t i = 0; i < cands.size(); ++i)
        if (cands[i].ptype == PathType::odh || cands[i].ptype == PathType::dh)
          add_term(dhub, model.var_v(static_cast<int>(c), static_cast<int>(i)), 1.0);
      add_term(dhub, model.var_z(commodities[c].destination), -1.0);
      model.rows.push_back(std::move(dhub));
    }
    for (std::size_t c = 0; c < commodities.size(); ++c) {
      MilpRow ohub{"ohub_" + std::to_string(c), 'L', 0.0, {}};
      const auto& cands = enumeration.per_commodity[c];
      for (std::size_t i = 0; i < cands.size(); ++i)
        if (cands[i].ptype == PathType::odh || cands[i].ptype == PathType::oh)
          add_term(ohub, model.var_v(static_cast<int>(c), static_cast<int>(i)), 1.0);
      add_term(ohub, model.var_z(commodities[c].origin), -1.0);
      model.rows.push_back(std::move(ohub));
    }
  }
  if (cuts.ineq_new) {
    // Every open hub below another open hub needs an outgoing arc.
    for (int k = 0; k + 1 < n; ++k)
      for (int m = k + 1; m < n; ++m) {
        MilpRow row{"outpair_" + std::to_string(k) + "_" + std::to_string(m), 'L', 1.0, {}};
        add_term(row, model.var_z(k), 1.0);
        add_term(row, model.var_z(m), 1.0);
        for (std::size_t a = 0; a < model.arcs.size(); ++a)
          if (model.arcs[a].first == k) add_term(row, model.yp0 + static_cast<int>(a), -1.0);
        model.rows.push_back(std::move(row));
      }
  }
  return model;
}

void add_sec_cuts(MilpModel& model, const Instance& instance, const std::vector<SecCut>& cuts) {
  if (model.y0 < 0)
    throw ValidationError("subtour elimination rows need the edge formulation (f1l_*)");
  for (const auto& cut : cuts) {
    if (cut.nodes.size() < 2) throw ValidationError("a subtour cut needs at least two nodes");
    MilpRow row{"sec_" + std::to_string(model.sec_registry.size()), 'L', 0.0, {}};
    const auto inside = [&](int v) {
      return std::binary_search(cut.nodes.begin(), cut.nodes.end(), v);
    };
    const auto& edges = instance.hub_edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (inside(edges[e].k) && inside(edges[e].m))
        add_term(row, model.var_y(static_cast<int>(e)), 1.0);
    for (int v : cut.nodes)
      if (v != cut.anchor) add_term(row, model.var_z(v), -1.0);
    model.rows.push_back(std::move(row));
    model.sec_registry.push_back(cut);
  }
}

std::vector<SecCut> separate_sec(const Instance& instance, const std::vector<double>& z_values,
                                 const std::vector<double>& y_values) {
  const int n = instance.n();
  const auto& edges = instance.hub_edges();
  std::vector<int> parent(n);
  for (int v = 0; v < n; ++v) parent[v] = v;
  const std::function<int(int)> find = [&](int v) {
    return parent[v] == v ? v : parent[v] = find(parent[v]);
  };
  std::vector<std::size_t> support;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (y_values[e] >= 0.5) {
      support.push_back(e);
      parent[find(edges[e].k)] = find(edges[e].m);
    }

  std::map<int, std::vector<int>> comp_nodes;
  std::vector<char> touched(n, 0);
  for (std::size_t e : support) {
    for (int v : {edges[e].k, edges[e].m})
      if (!touched[v]) {
        touched[v] = 1;
        comp_nodes[find(v)].push_back(v);
      }
  }
  std::map<int, int> comp_edges;
  for (std::size_t e : support) ++comp_edges[find(edges[e].k)];

  std::vector<SecCut> cuts;
  for (auto& [root, nodes] : comp_nodes) {
    std::sort(nodes.begin(), nodes.end());
    double rhs = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) rhs += z_values[nodes[i]];
    if (static_cast<double>(comp_edges[root]) > rhs + kIntTol)
      cuts.push_back({nodes, nodes.front()});
  }
  return cuts;
}

namespace {

// Fixed-width field plus at least one separating space for long names.
std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

void write_mps(const MilpModel& model, std::ostream& out) {
  out << "NAME          hubline_" << variant_name(model.variant) << "\n";
  if (model.maximize) out << "OBJSENSE\n    MAX\n";
  out << "ROWS\n";
  out << " N  profit\n";
  for (const auto& row : model.rows) out << " " << row.sense << "  " << row.name << "\n";

  // Column entries grouped by variable, rows in model order, so the file is a
  // pure function of the model.
  std::vector<std::vector<std::pair<std::size_t, double>>> by_var(model.vars.size());
  for (std::size_t r = 0; r < model.rows.size(); ++r)
    for (const auto& [var, coef] : model.rows[r].terms) by_var[var].emplace_back(r, coef);

  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (std::size_t v = 0; v < model.vars.size(); ++v) {
    const auto& var = model.vars[v];
    const bool want_int = var.kind == VarKind::binary;
    if (want_int != in_int) {
      out << "    " << pad("M" + std::to_string(marker++), 10) << pad("'MARKER'", 25)
          << (want_int ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = want_int;
    }
    bool wrote = false;
    if (var.obj != 0.0) {
      out << "    " << pad(var.name, 10) << pad("profit", 10) << fmt_num(var.obj) << "\n";
      wrote = true;
    }
    for (const auto& [r, coef] : by_var[v]) {
      out << "    " << pad(var.name, 10) << pad(model.rows[r].name, 10) << fmt_num(coef) << "\n";
      wrote = true;
    }
    if (!wrote) out << "    " << pad(var.name, 10) << pad("profit", 10) << "0\n";
  }
  if (in_int) out << "    " << pad("M" + std::to_string(marker++), 10) << pad("'MARKER'", 25)
                  << "'INTEND'\n";

  out << "RHS\n";
  for (const auto& row : model.rows)
    if (row.rhs != 0.0)
      out << "    " << pad("RHS", 10) << pad(row.name, 10) << fmt_num(row.rhs) << "\n";

  out << "BOUNDS\n";
  for (const auto& var : model.vars) {
    if (var.kind == VarKind::binary) {
      out << " BV " << pad("BND", 10) << var.name << "\n";
    } else {
      if (var.lb != 0.0) out << " LO " << pad("BND", 10) << pad(var.name, 10) << fmt_num(var.lb) << "\n";
      out << " UP " << pad("BND", 10) << pad(var.name, 10) << fmt_num(var.ub) << "\n";
    }
  }
  out << "ENDATA\n";
}

void write_lp_terms(std::ostream& out, const std::vector<std::pair<int, double>>& terms,
                    const MilpModel& model, bool lead_sign) {
  int per_line = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& [var, coef] = terms[i];
    if (i == 0 && !lead_sign) {
      if (coef == 1.0) out << model.vars[var].name;
      else if (coef == -1.0) out << "- " << model.vars[var].name;
      else out << fmt_num(coef) << " " << model.vars[var].name;
    } else {
      out << (coef < 0.0 ? " - " : " + ");
      const double mag = std::abs(coef);
      if (mag == 1.0) out << model.vars[var].name;
      else out << fmt_num(mag) << " " << model.vars[var].name;
    }
    if (++per_line == 8 && i + 1 < terms.size()) {
      out << "\n      ";
      per_line = 0;
    }
  }
  if (terms.empty()) out << "0 " << model.vars[0].name;
}

void write_lp(const MilpModel& model, std::ostream& out) {
  out << "\\ hubline " << variant_name(model.variant) << "\n";
  out << (model.maximize ? "Maximize\n" : "Minimize\n");
  std::vector<std::pair<int, double>> obj;
  for (std::size_t v = 0; v < model.vars.size(); ++v)
    if (model.vars[v].obj != 0.0) obj.emplace_back(static_cast<int>(v), model.vars[v].obj);
  out << " profit: ";
  write_lp_terms(out, obj, model, false);
  out << "\nSubject To\n";
  for (const auto& row : model.rows) {
    out << " " << row.name << ": ";
    write_lp_terms(out, row.terms, model, false);
    out << (row.sense == 'L' ? " <= " : row.sense == 'G' ? " >= " : " = ") << fmt_num(row.rhs)
        << "\n";
  }
  out << "Bounds\n";
  for (const auto& var : model.vars)
    if (var.kind == VarKind::continuous)
      out << " " << fmt_num(var.lb) << " <= " << var.name << " <= " << fmt_num(var.ub) << "\n";
  out << "Binaries\n";
  int per_line = 0;
  for (const auto& var : model.vars)
    if (var.kind == VarKind::binary) {
      out << " " << var.name;
      if (++per_line == 10) {
        out << "\n";
        per_line = 0;
      }
    }
  if (per_line) out << "\n";
  out << "End\n";
}

}  // namespace

void write_model(const MilpModel& model, MilpFormat format, std::ostream& out) {
  if (format == MilpFormat::mps) write_mps(model, out);
  else write_lp(model, out);
}

void export_model(const MilpModel& model, MilpFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_model(model, format, out);
  out.flush();
  if (!out) throw IoError("failed while writing " + path);
}

std::vector<double> import_solution(const MilpModel& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < model.vars.size(); ++i) index[model.vars[i].name] = static_cast<int>(i);
  std::vector<double> x(model.vars.size(), 0.0);
  std::string line;
  std::uint64_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
    std::replace(line.begin(), line.end(), '=', ' ');
    std::istringstream ss(line);
    std::string name;
    if (!(ss >> name)) continue;
    double value = 0.0;
    if (!(ss >> value)) throw ParseError(path, ln, "expected 'name value'");
    const auto it = index.find(name);
    if (it == index.end()) throw ParseError(path, ln, "unknown variable '" + name + "'");
    x[it->second] = value;
  }
  return x;
}

namespace {

// Hub line structure of an assignment: open hubs and open edges.
struct OpenStructure {
  std::vector<int> hubs;
  std::vector<int> edge_ids;
  bool is_path = false;
  std::vector<int> ordered;  // hub sequence when is_path
};

OpenStructure open_structure(const MilpModel& model, const Instance& instance,
                             const std::vector<double>& x) {
  OpenStructure s;
  for (int k = 0; k < model.n; ++k)
    if (x[model.var_z(k)] > 0.5) s.hubs.push_back(k);
  const auto& edges = instance.hub_edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    bool open = false;
    if (model.y0 >= 0) {
      open = x[model.var_y(static_cast<int>(e))] > 0.5;
    } else {
      open = x[model.var_yp(edges[e].k, edges[e].m)] + x[model.var_yp(edges[e].m, edges[e].k)] > 0.5;
    }
    if (open) s.edge_ids.push_back(static_cast<int>(e));
  }

  const int p = instance.params().p;
  if (static_cast<int>(s.hubs.size()) != p || static_cast<int>(s.edge_ids.size()) != p - 1)
    return s;
  std::map<int, std::vector<int>> adj;
  for (int e : s.edge_ids) {
    const auto& edge = edges[e];
    if (!std::binary_search(s.hubs.begin(), s.hubs.end(), edge.k) ||
        !std::binary_search(s.hubs.begin(), s.hubs.end(), edge.m))
      return s;
    adj[edge.k].push_back(edge.m);
    adj[edge.m].push_back(edge.k);
  }
  std::vector<int> ends;
  for (int h : s.hubs) {
    const auto deg = adj.count(h) ? adj[h].size() : 0;
    if (deg > 2) return s;
    if (deg == 1) ends.push_back(h);
    if (deg == 0 && p > 1) return s;  // isolated hub
  }
  if (p == 1) {
    s.is_path = true;
    s.ordered = s.hubs;
    return s;
  }
  if (ends.size() != 2) return s;  // a cycle has none
  int prev = -1, cur = std::min(ends[0], ends[1]);
  s.ordered.push_back(cur);
  while (static_cast<int>(s.ordered.size()) < p) {
    int next = -1;
    for (int nb : adj[cur])
      if (nb != prev) next = nb;
    if (next < 0) return s;
    s.ordered.push_back(next);
    prev = cur;
    cur = next;
  }
  s.is_path = true;
  return s;
}

}  // namespace

VerifyReport verify_solution(const Instance& instance, const Enumeration& enumeration,
                             const MilpModel& model, const std::vector<double>& assignment) {
  if (assignment.size() != model.vars.size())
    throw ValidationError("assignment length does not match the model");
  VerifyReport report;
  const std::vector<double>& x = assignment;

  for (std::size_t v = 0; v < model.vars.size(); ++v) {
    const auto& var = model.vars[v];
    if (x[v] < var.lb - kIntTol || x[v] > var.ub + kIntTol)
      report.violations.push_back(
          {"bound " + var.name, std::max(var.lb - x[v], x[v] - var.ub)});
    if (var.kind == VarKind::binary && std::abs(x[v] - std::round(x[v])) > kIntTol)
      report.violations.push_back({"integrality " + var.name, std::abs(x[v] - std::round(x[v]))});
  }
  for (const auto& row : model.rows) {
    double lhs = 0.0;
    for (const auto& [var, coef] : row.terms) lhs += coef * x[var];
    double violation = 0.0;
    if (row.sense == 'L') violation = lhs - row.rhs;
    else if (row.sense == 'G') violation = row.rhs - lhs;
    else violation = std::abs(lhs - row.rhs);
    if (violation > kIntTol) report.violations.push_back({row.name, violation});
  }
  report.feasible = report.violations.empty();

  for (std::size_t v = 0; v < model.vars.size(); ++v) report.objective += model.vars[v].obj * x[v];

  const OpenStructure structure = open_structure(model, instance, x);
  report.subtour = !structure.is_path;
  if (!report.feasible || report.subtour) return report;

  Solution sol;
  sol.line = make_hub_line(instance, structure.ordered);
  const auto& commodities = instance.commodities();
  sol.assigned.assign(commodities.size(), -1);
  sol.t_final.resize(commodities.size());
  double objective = 0.0;
  for (std::size_t c = 0; c < commodities.size(); ++c) {
    const auto& cands = enumeration.per_commodity[c];
    for (std::size_t i = 0; i < cands.size(); ++i)
      if (x[model.var_v(static_cast<int>(c), static_cast<int>(i))] > 0.5) {
        sol.assigned[c] = static_cast<int>(i);
        break;
      }
    if (sol.assigned[c] >= 0) {
      sol.t_final[c] = cands[sol.assigned[c]].tau;
      objective += cands[sol.assigned[c]].profit;
    } else {
      sol.t_final[c] = instance.time(commodities[c].origin, commodities[c].destination);
    }
  }
  sol.objective = objective;
  sol.metrics = compute_metrics(instance, enumeration, sol);
  report.solution = std::move(sol);
  return report;
}

std::vector<double> assignment_from_solution(const MilpModel& model, const Instance& instance,
                                             const Enumeration& enumeration,
                                             const Solution& solution) {
  std::vector<double> x(model.vars.size(), 0.0);
  const auto& nodes = solution.line.nodes;
  const int p = static_cast<int>(nodes.size());
  for (int k : nodes) x[model.var_z(k)] = 1.0;

  // Position of the largest hub id: flows drain from it, arcs point toward it.
  int q = 0;
  for (int i = 0; i < p; ++i)
    if (nodes[i] > nodes[q]) q = i;

  if (model.y0 >= 0) {
    for (int e : solution.line.edge_ids) x[model.var_y(e)] = 1.0;
    if (model.f0 >= 0) {
      // Edge between positions i,i+1 carries one unit per hub on its far side.
      for (int i = 0; i + 1 < p; ++i) {
        if (i < q) x[model.var_f(nodes[i + 1], nodes[i])] = static_cast<double>(i + 1);
        else x[model.var_f(nodes[i], nodes[i + 1])] = static_cast<double>(p - 1 - i);
      }
    }
  } else {
    const bool toward_max = model.variant == MilpVariant::f2l_prime;
    if (toward_max) {
      // Every hub but the largest keeps an outgoing arc.
      for (int i = 0; i + 1 < p; ++i) {
        if (i < q) x[model.var_yp(nodes[i], nodes[i + 1])] = 1.0;
        else x[model.var_yp(nodes[i + 1], nodes[i])] = 1.0;
      }
      for (int i = 0; i < p; ++i) {
        double l = (i < q) ? static_cast<double>(i)
                           : (i == q ? static_cast<double>(p - 1)
                                     : static_cast<double>(q + (p - 1 - i)));
        x[model.var_l(nodes[i])] = l;
      }
    } else {
      for (int i = 0; i + 1 < p; ++i) x[model.var_yp(nodes[i], nodes[i + 1])] = 1.0;
      for (int i = 0; i < p; ++i) x[model.var_l(nodes[i])] = static_cast<double>(i);
    }
  }

  for (std::size_t c = 0; c < solution.assigned.size(); ++c)
    if (solution.assigned[c] >= 0)
      x[model.var_v(static_cast<int>(c), solution.assigned[c])] = 1.0;
  return x;
}

}  // namespace hubline
