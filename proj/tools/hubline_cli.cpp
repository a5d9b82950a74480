#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hubline/errors.hpp"
#include "hubline/instance.hpp"
#include "hubline/milp.hpp"
#include "hubline/paths.hpp"
#include "hubline/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hubline;

namespace {

constexpr std::uint64_t kSeedOffsetRevenues = 1;
constexpr std::uint64_t kSeedOffsetSparsify = 2;

struct Options {
  std::string instance_path;
  std::string format = "csv-bundle";
  std::string out = ".";
  int n = 0;  // node subset for the cab format, 0 keeps all
  int p = 3;
  double alpha = 0.5;
  double r = 1.0;
  double vartheta = 0.1;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = logical CPUs / 2
  bool strict_filter = true;
  bool selfloop_exempt = true;
  double sparsify_fraction = 1.0;
  double trim = 0.1;
  std::string variant = "f1l_sec";
  std::string cuts;  // comma separated: desthub_orhub, ineq_new
  std::string method = "bnb";
  std::string milp_format = "mps";
  std::string solution_path;
  bool unweighted = false;
};

// Option handles used to tell flag-provided values from bundle defaults.
struct ParamFlags {
  CLI::Option* p = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* r = nullptr;
  CLI::Option* vartheta = nullptr;
  CLI::Option* seed = nullptr;
};

ParamFlags add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--instance", o.instance_path, "Instance file (cab) or directory (csv-bundle)")
      ->required();
  cmd->add_option("--format", o.format, "Instance format")
      ->check(CLI::IsMember({"cab", "csv-bundle"}));
  cmd->add_option("--n", o.n, "Keep only the first N nodes (cab format)");
  ParamFlags flags;
  flags.p = cmd->add_option("--p", o.p, "Number of hubs on the line");
  flags.alpha = cmd->add_option("--alpha", o.alpha, "Hub-edge travel time discount");
  flags.r = cmd->add_option("--r", o.r, "Demand elasticity exponent");
  flags.vartheta = cmd->add_option("--vartheta", o.vartheta, "Access/exit time scale");
  flags.seed = cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--workers", o.workers, "Path-generation threads (0 = CPUs/2)");
  cmd->add_option("--strict-filter", o.strict_filter,
                  "Keep only paths strictly faster than the direct time");
  cmd->add_option("--selfloop-exempt", o.selfloop_exempt,
                  "Exempt two-hub paths from their own shortcut test");
  cmd->add_option("--sparsify", o.sparsify_fraction,
                  "Keep this fraction of candidate hub edges (1 keeps all)");
  cmd->add_option("--trim", o.trim, "Fraction of extreme-time edges dropped before sparsifying");
  cmd->add_option("--out", o.out, "Output directory");
  return flags;
}

int effective_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return std::max(1, static_cast<int>(hc / 2));
}

MilpCuts parse_cuts(const std::string& text) {
  MilpCuts cuts;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item == "none") continue;
    if (item == "desthub_orhub") cuts.desthub_orhub = true;
    else if (item == "ineq_new") cuts.ineq_new = true;
    else throw ValidationError("unknown cut family '" + item + "'");
  }
  return cuts;
}

struct Prepared {
  Instance instance;
  DerivedTimes derived;
  bool revenues_derived = false;
  bool sparsified = false;
};

Prepared prepare(const Options& o, const ParamFlags& flags) {
  Params prm;
  prm.p = o.p;
  prm.alpha = o.alpha;
  prm.r = o.r;
  prm.vartheta = o.vartheta;
  prm.seed = o.seed;

  std::optional<Instance> inst;
  if (o.format == "cab") {
    inst.emplace(load_cab(o.instance_path, o.n, prm));
  } else {
    inst.emplace(load_csv_bundle(o.instance_path));
    Params& eff = inst->params();
    if (flags.p->count()) eff.p = o.p;
    if (flags.alpha->count()) eff.alpha = o.alpha;
    if (flags.r->count()) eff.r = o.r;
    if (flags.vartheta->count()) eff.vartheta = o.vartheta;
    if (flags.seed->count()) eff.seed = o.seed;
  }
  if (!inst->metric_closed()) inst.emplace(metric_closure(*inst));

  Prepared prep{std::move(*inst), {}, false, false};
  const std::uint64_t seed = prep.instance.params().seed;
  if (prep.instance.params().revenue_mode == RevenueMode::gamma_rule) {
    derive_revenues(prep.instance, seed + kSeedOffsetRevenues);
    prep.revenues_derived = true;
  }
  if (o.sparsify_fraction < 1.0) {
    prep.instance = sparsify(prep.instance, o.sparsify_fraction, seed + kSeedOffsetSparsify, o.trim);
    prep.sparsified = true;
  }
  prep.derived = derive_times(prep.instance);
  return prep;
}

json parameter_echo(const std::string& command, const Options& o, const Prepared& prep) {
  const Params& prm = prep.instance.params();
  json echo;
  echo["command"] = command;
  echo["instance"] = o.instance_path;
  echo["format"] = o.format;
  if (o.format == "cab") echo["n_subset"] = o.n;
  echo["n"] = prep.instance.n();
  echo["p"] = prm.p;
  echo["alpha"] = prm.alpha;
  echo["r"] = prm.r;
  echo["vartheta"] = prm.vartheta;
  echo["seed"] = prm.seed;
  echo["seed_revenues"] = prm.seed + kSeedOffsetRevenues;
  echo["seed_sparsify"] = prm.seed + kSeedOffsetSparsify;
  echo["revenues_derived"] = prep.revenues_derived;
  echo["sparsify"] = o.sparsify_fraction;
  echo["trim"] = o.trim;
  echo["sparsified"] = prep.sparsified;
  echo["workers"] = effective_workers(o.workers);
  echo["strict_filter"] = o.strict_filter;
  echo["selfloop_exempt"] = o.selfloop_exempt;
  return echo;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << bytes;
  out.flush();
  if (!out) throw IoError("failed while writing " + path.string());
}

void emit_report(const Options& o, const json& report) {
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "report.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string candidates_csv(const Instance& instance, const Enumeration& enumeration) {
  std::ostringstream out;
  out << "o,d,ptype,tau,profit,hubs\n";
  const auto& commodities = instance.commodities();
  for (std::size_t c = 0; c < commodities.size(); ++c) {
    for (const auto& cand : enumeration.per_commodity[c]) {
      out << commodities[c].origin << ',' << commodities[c].destination << ','
          << path_type_name(cand.ptype) << ',' << fmt_num(cand.tau) << ',' << fmt_num(cand.profit)
          << ',';
      for (std::size_t i = 0; i < cand.hubs.size(); ++i) out << (i ? ";" : "") << cand.hubs[i];
      out << '\n';
    }
  }
  return out.str();
}

json summary_of(const Instance& instance, const Enumeration& enumeration,
                const Solution& solution) {
  json s;
  s["objective"] = solution.objective;
  s["line"] = solution.line.nodes;
  s["pct_od_served"] = solution.metrics.pct_od_served;
  s["pct_demand_served"] = solution.metrics.pct_demand_served;
  s["pct_time_saved"] = solution.metrics.pct_time_saved;
  int served = 0;
  for (int a : solution.assigned) served += a >= 0 ? 1 : 0;
  s["served"] = served;
  s["commodities"] = instance.commodities().size();
  (void)enumeration;
  return s;
}

int cmd_paths(const Options& o, const ParamFlags& flags) {
  Prepared prep = prepare(o, flags);
  const Enumeration enumeration = enumerate_all(prep.instance, prep.derived,
                                                effective_workers(o.workers), o.strict_filter,
                                                o.selfloop_exempt);
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "candidates.csv", candidates_csv(prep.instance, enumeration));

  json report;
  report["parameters"] = parameter_echo("paths", o, prep);
  report["timings"] = {{"t_prep", enumeration.stats.t_prep_seconds},
                       {"t_path", enumeration.stats.t_path_seconds}};
  json summary;
  summary["n_path"] = enumeration.stats.n_path;
  for (int t = 0; t < 4; ++t)
    summary[path_type_name(static_cast<PathType>(t))] = enumeration.stats.by_type[t];
  report["summary"] = summary;
  report["status"] = "ok";
  emit_report(o, report);
  return 0;
}

int cmd_solve(const Options& o, const ParamFlags& flags) {
  if (o.method != "enum" && o.method != "bnb")
    throw ValidationError("unknown --method '" + o.method + "' (expected enum or bnb)");
  Prepared prep = prepare(o, flags);
  const int workers = effective_workers(o.workers);
  const Enumeration enumeration =
      enumerate_all(prep.instance, prep.derived, workers, o.strict_filter, o.selfloop_exempt);

  const auto t0 = std::chrono::steady_clock::now();
  SolveResult result;
  if (o.method == "enum") {
    result = solve_enumerate(prep.instance, enumeration);
  } else {
    const auto bounds = compute_bounds(prep.instance, prep.derived, workers);
    result = solve_bnb(prep.instance, enumeration, bounds);
  }
  const double t_solve = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (o.unweighted)
    result.solution.metrics = compute_metrics(prep.instance, enumeration, result.solution, false);

  std::ostringstream csv;
  write_solution_csv(prep.instance, enumeration, result.solution, csv);
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "solution.csv", csv.str());

  json report;
  report["parameters"] = parameter_echo("solve", o, prep);
  report["parameters"]["method"] = o.method;
  report["parameters"]["unweighted"] = o.unweighted;
  report["timings"] = {{"t_prep", enumeration.stats.t_prep_seconds},
                       {"t_path", enumeration.stats.t_path_seconds},
                       {"t_solve", t_solve}};
  report["summary"] = summary_of(prep.instance, enumeration, result.solution);
  report["summary"]["n_path"] = enumeration.stats.n_path;
  report["summary"]["lines_evaluated"] = result.stats.lines_evaluated;
  report["summary"]["nodes_expanded"] = result.stats.nodes_expanded;
  report["summary"]["root_bound"] = result.stats.root_bound;
  report["status"] = "ok";
  emit_report(o, report);
  return 0;
}

int cmd_export_milp(const Options& o, const ParamFlags& flags) {
  Prepared prep = prepare(o, flags);
  const Enumeration enumeration = enumerate_all(prep.instance, prep.derived,
                                                effective_workers(o.workers), o.strict_filter,
                                                o.selfloop_exempt);
  const MilpModel model =
      build_milp(prep.instance, enumeration, parse_variant(o.variant), parse_cuts(o.cuts));
  const MilpFormat format = o.milp_format == "lp" ? MilpFormat::lp : MilpFormat::mps;
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / (o.milp_format == "lp" ? "model.lp" : "model.mps");
  export_model(model, format, path.string());

  json report;
  report["parameters"] = parameter_echo("export-milp", o, prep);
  report["parameters"]["variant"] = o.variant;
  report["parameters"]["cuts"] = o.cuts;
  report["parameters"]["milp_format"] = o.milp_format;
  report["timings"] = {{"t_prep", enumeration.stats.t_prep_seconds},
                       {"t_path", enumeration.stats.t_path_seconds}};
  report["summary"] = {{"n_path", enumeration.stats.n_path},
                       {"variables", model.vars.size()},
                       {"rows", model.rows.size()},
                       {"file", path.string()}};
  report["status"] = "ok";
  emit_report(o, report);
  return 0;
}

int cmd_cut_loop(const Options& o, const ParamFlags& flags) {
  const MilpVariant variant = parse_variant(o.variant);
  if (variant != MilpVariant::f1l_sec && variant != MilpVariant::f1l_flow)
    throw ValidationError("the cut loop needs an edge formulation (f1l_sec or f1l_flow)");
  Prepared prep = prepare(o, flags);
  const Enumeration enumeration = enumerate_all(prep.instance, prep.derived,
                                                effective_workers(o.workers), o.strict_filter,
                                                o.selfloop_exempt);
  MilpModel model = build_milp(prep.instance, enumeration, variant, parse_cuts(o.cuts));

  fs::create_directories(o.out);
  const fs::path registry_path = fs::path(o.out) / "cuts.json";
  std::vector<SecCut> registry;
  if (fs::exists(registry_path)) {
    std::ifstream in(registry_path);
    json prior = json::parse(in, nullptr, true);
    for (const auto& item : prior) {
      SecCut cut;
      cut.nodes = item["nodes"].get<std::vector<int>>();
      cut.anchor = item["anchor"].get<int>();
      registry.push_back(std::move(cut));
    }
    add_sec_cuts(model, prep.instance, registry);
  }

  const std::vector<double> x = import_solution(model, o.solution_path);
  const VerifyReport verdict = verify_solution(prep.instance, enumeration, model, x);

  json report;
  report["parameters"] = parameter_echo("cut-loop", o, prep);
  report["parameters"]["variant"] = o.variant;
  report["parameters"]["solution"] = o.solution_path;
  report["timings"] = {{"t_prep", enumeration.stats.t_prep_seconds},
                       {"t_path", enumeration.stats.t_path_seconds}};

  if (!verdict.feasible) {
    json viols = json::array();
    for (const auto& v : verdict.violations)
      viols.push_back({{"row", v.row}, {"amount", v.amount}});
    report["summary"] = {{"converged", false}, {"feasible", false}, {"violations", viols}};
    report["status"] = "infeasible";
    emit_report(o, report);
    return 2;
  }

  if (verdict.subtour) {
    std::vector<double> z(model.n), y(prep.instance.hub_edges().size());
    for (int k = 0; k < model.n; ++k) z[k] = x[model.var_z(k)];
    for (std::size_t e = 0; e < y.size(); ++e) y[e] = x[model.var_y(static_cast<int>(e))];
    const std::vector<SecCut> fresh = separate_sec(prep.instance, z, y);
    if (fresh.empty())
      throw CapExceededError("subtour detected but no violated cut separated", 0);
    add_sec_cuts(model, prep.instance, fresh);
    registry.insert(registry.end(), fresh.begin(), fresh.end());

    json reg = json::array();
    for (const auto& cut : registry) reg.push_back({{"nodes", cut.nodes}, {"anchor", cut.anchor}});
    write_file(registry_path, reg.dump(2) + "\n");
    const MilpFormat format = o.milp_format == "lp" ? MilpFormat::lp : MilpFormat::mps;
    const fs::path model_path =
        fs::path(o.out) / (o.milp_format == "lp" ? "model_cut.lp" : "model_cut.mps");
    export_model(model, format, model_path.string());

    report["summary"] = {{"converged", false},
                         {"feasible", true},
                         {"cuts_added", fresh.size()},
                         {"sec_total", registry.size()},
                         {"file", model_path.string()}};
    report["status"] = "cut";
    emit_report(o, report);
    return 0;
  }

  std::ostringstream csv;
  write_solution_csv(prep.instance, enumeration, *verdict.solution, csv);
  write_file(fs::path(o.out) / "solution.csv", csv.str());
  report["summary"] = summary_of(prep.instance, enumeration, *verdict.solution);
  report["summary"]["converged"] = true;
  report["summary"]["sec_total"] = registry.size();
  report["status"] = "ok";
  emit_report(o, report);
  return 0;
}

int cmd_geojson(const Options& o, const ParamFlags& flags) {
  Prepared prep = prepare(o, flags);
  const auto& nodes = prep.instance.nodes();
  for (const auto& node : nodes)
    if (!node.lon || !node.lat)
      throw ValidationError("node " + std::to_string(node.id) + " ('" + node.label +
                            "') has no coordinates");

  std::vector<int> line_nodes;
  std::vector<double> in_demand(nodes.size(), 0.0), out_demand(nodes.size(), 0.0);
  if (!o.solution_path.empty()) {
    const SolutionFile sol = read_solution_csv(o.solution_path);
    line_nodes = sol.line_nodes;
    for (const auto& row : sol.rows)
      if (row.served) {
        out_demand[row.origin] += row.demand;
        in_demand[row.destination] += row.demand;
      }
  }

  json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = json::array();
  if (line_nodes.size() >= 2) {
    json coords = json::array();
    for (int id : line_nodes) coords.push_back({*nodes[id].lon, *nodes[id].lat});
    fc["features"].push_back({{"type", "Feature"},
                              {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                              {"properties", {{"role", "hub_line"}, {"nodes", line_nodes}}}});
  }
  for (const auto& node : nodes) {
    const bool is_hub =
        std::find(line_nodes.begin(), line_nodes.end(), node.id) != line_nodes.end();
    fc["features"].push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "Point"}, {"coordinates", {*node.lon, *node.lat}}}},
         {"properties",
          {{"label", node.label},
           {"population", node.population},
           {"role", is_hub ? "hub" : "node"},
           {"served_demand_in", in_demand[node.id]},
           {"served_demand_out", out_demand[node.id]}}}});
  }

  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "line.geojson", fc.dump(2) + "\n");

  json report;
  report["parameters"] = parameter_echo("geojson", o, prep);
  report["parameters"]["solution"] = o.solution_path;
  report["timings"] = {{"t_prep", 0.0}, {"t_path", 0.0}};
  report["summary"] = {{"features", fc["features"].size()},
                       {"line_nodes", line_nodes.size()}};
  report["status"] = "ok";
  emit_report(o, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Profit-maximizing hub line location with elastic demand"};
  app.require_subcommand(1);

  Options o;
  CLI::App* paths = app.add_subcommand("paths", "Enumerate candidate service paths");
  const ParamFlags paths_flags = add_common(paths, o);

  CLI::App* solve = app.add_subcommand("solve", "Find the optimal hub line");
  const ParamFlags solve_flags = add_common(solve, o);
  solve->add_option("--method", o.method, "enum or bnb")->check(CLI::IsMember({"enum", "bnb"}));
  solve->add_flag("--unweighted", o.unweighted, "Unweighted time-saved metric");

  CLI::App* milp = app.add_subcommand("export-milp", "Write the chosen formulation to a file");
  const ParamFlags milp_flags = add_common(milp, o);
  milp->add_option("--variant", o.variant, "f1l_flow, f1l_sec, f2l or f2l_prime");
  milp->add_option("--cuts", o.cuts, "Comma list: desthub_orhub, ineq_new");
  milp->add_option("--milp-format", o.milp_format, "mps or lp")
      ->check(CLI::IsMember({"mps", "lp"}));

  CLI::App* loop = app.add_subcommand("cut-loop", "One subtour-separation round on a solver solution");
  const ParamFlags loop_flags = add_common(loop, o);
  loop->add_option("--variant", o.variant, "f1l_sec or f1l_flow");
  loop->add_option("--cuts", o.cuts, "Comma list: desthub_orhub");
  loop->add_option("--milp-format", o.milp_format, "mps or lp")
      ->check(CLI::IsMember({"mps", "lp"}));
  loop->add_option("--solution", o.solution_path, "Variable assignment file (name value lines)")
      ->required();

  CLI::App* geo = app.add_subcommand("geojson", "Render nodes and the hub line as GeoJSON");
  const ParamFlags geo_flags = add_common(geo, o);
  geo->add_option("--solution", o.solution_path, "solution.csv produced by solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (paths->parsed()) return cmd_paths(o, paths_flags);
    if (solve->parsed()) return cmd_solve(o, solve_flags);
    if (milp->parsed()) return cmd_export_milp(o, milp_flags);
    if (loop->parsed()) return cmd_cut_loop(o, loop_flags);
    if (geo->parsed()) return cmd_geojson(o, geo_flags);
  } catch (const CapExceededError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
