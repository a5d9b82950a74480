#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hubline/errors.hpp"
#include "hubline/instance.hpp"
#include "hubline/milp.hpp"
#include "hubline/paths.hpp"
#include "hubline/solver.hpp"
#include "support/oracles.hpp"

using namespace hubline;

namespace {

Params base_params(int p, double alpha = 0.5, double r = 1.2, double vartheta = 0.1) {
  Params prm;
  prm.p = p;
  prm.alpha = alpha;
  prm.r = r;
  prm.vartheta = vartheta;
  return prm;
}

struct Fixture {
  Instance inst;
  DerivedTimes derived;
  Enumeration enumeration;
};

Fixture fixture(int n, std::uint64_t seed, const Params& prm) {
  Instance inst = testsupport::random_metric_instance(n, seed, prm);
  DerivedTimes derived = derive_times(inst);
  Enumeration e = enumerate_all(inst, derived, 2);
  return {std::move(inst), std::move(derived), std::move(e)};
}

std::size_t total_candidates(const Enumeration& e) {
  std::size_t t = 0;
  for (const auto& list : e.per_commodity) t += list.size();
  return t;
}

bool has_violation(const VerifyReport& report, const std::string& row) {
  return std::any_of(report.violations.begin(), report.violations.end(),
                     [&](const RowViolation& v) { return v.row == row; });
}

}  // namespace

TEST_CASE("variant names round-trip and unknown names are rejected") {
  for (MilpVariant v : {MilpVariant::f1l_flow, MilpVariant::f1l_sec, MilpVariant::f2l,
                        MilpVariant::f2l_prime})
    CHECK(parse_variant(variant_name(v)) == v);
  CHECK_THROWS_AS(parse_variant("f3"), ValidationError);
}

TEST_CASE("row and variable inventories match the closed-form counts") {
  const Fixture fx = fixture(5, 17, base_params(3));
  const std::size_t n = 5, E = 10, C = 10;
  REQUIRE(fx.inst.hub_edges().size() == E);
  REQUIRE(fx.inst.commodities().size() == C);
  const std::size_t T = total_candidates(fx.enumeration);
  REQUIRE(T > 0);

  SUBCASE("edge formulation with flow rows") {
    const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_flow);
    CHECK(m.vars.size() == n + E + n * (n - 1) + T);
    CHECK(m.rows.size() == 1 + 1 + n + n + n * (n - 1) / 2 + E + C + E * C);

    MilpCuts cuts;
    cuts.desthub_orhub = true;
    const MilpModel mc = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_flow, cuts);
    CHECK(mc.rows.size() == m.rows.size() + 2 * C);
    CHECK(mc.vars.size() == m.vars.size());
  }
  SUBCASE("edge formulation with lazy subtour rows") {
    const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_sec);
    CHECK(m.vars.size() == n + E + T);
    CHECK(m.rows.size() == 1 + 1 + n + C + E * C);
  }
  SUBCASE("arc formulation, split degree rows") {
    const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f2l);
    CHECK(m.vars.size() == n + 2 * E + n + T);
    CHECK(m.rows.size() == 1 + 1 + 2 * n + 2 * E + C + E * C);
  }
  SUBCASE("arc formulation, aggregated degree rows") {
    const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f2l_prime);
    CHECK(m.vars.size() == n + 2 * E + n + T);
    CHECK(m.rows.size() == 1 + 1 + n + 2 * E + C + E * C);

    MilpCuts cuts;
    cuts.ineq_new = true;
    const MilpModel mc = build_milp(fx.inst, fx.enumeration, MilpVariant::f2l_prime, cuts);
    CHECK(mc.rows.size() == m.rows.size() + n * (n - 1) / 2);
  }
}

TEST_CASE("objective puts each candidate's profit on its assignment variable") {
  const Fixture fx = fixture(6, 23, base_params(3));
  const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_sec);
  for (std::size_t c = 0; c < fx.enumeration.per_commodity.size(); ++c) {
    const auto& cands = fx.enumeration.per_commodity[c];
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto& var = m.vars[m.var_v(static_cast<int>(c), static_cast<int>(i))];
      CHECK(var.obj == doctest::Approx(cands[i].profit).epsilon(1e-12));
      CHECK(var.kind == VarKind::binary);
      CHECK(var.name == "v_" + std::to_string(c) + "_" + std::to_string(i));
    }
  }
}

TEST_CASE("a model without candidates is well formed with a zero objective") {
  const Fixture fx = fixture(5, 29, base_params(2, 0.5, 1.0, 10.0));
  REQUIRE(total_candidates(fx.enumeration) == 0);
  const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_sec);
  CHECK(m.vars.size() == 5 + 10);
  for (const auto& var : m.vars) CHECK(var.obj == 0.0);

  std::ostringstream out;
  write_model(m, MilpFormat::mps, out);
  CHECK(out.str().find("ENDATA") != std::string::npos);

  const Solution sol = solve_enumerate(fx.inst, fx.enumeration).solution;
  const VerifyReport report =
      verify_solution(fx.inst, fx.enumeration, m, assignment_from_solution(m, fx.inst, fx.enumeration, sol));
  CHECK(report.feasible);
  CHECK(report.objective == 0.0);
}

TEST_CASE("ordering rows carry the node count and its decrement") {
  const Fixture fx = fixture(4, 31, base_params(2));
  const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f2l);
  std::size_t seen = 0;
  for (const auto& row : m.rows) {
    if (row.name.rfind("mtz_", 0) != 0) continue;
    ++seen;
    CHECK(row.sense == 'L');
    CHECK(row.rhs == 3.0);
    bool found_arc = false;
    for (const auto& [var, coef] : row.terms) {
      if (m.vars[var].name.rfind("yp_", 0) == 0) {
        CHECK(coef == 4.0);
        found_arc = true;
      }
    }
    CHECK(found_arc);
  }
  CHECK(seen == 2 * fx.inst.hub_edges().size());
}

TEST_CASE("the outgoing-arc strengthening only fits the aggregated arc variant") {
  const Fixture fx = fixture(4, 37, base_params(2));
  MilpCuts cuts;
  cuts.ineq_new = true;
  CHECK_THROWS_AS(build_milp(fx.inst, fx.enumeration, MilpVariant::f2l, cuts), ValidationError);
  CHECK_THROWS_AS(build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_flow, cuts),
                  ValidationError);
  CHECK_THROWS_AS(build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_sec, cuts),
                  ValidationError);
  CHECK_NOTHROW(build_milp(fx.inst, fx.enumeration, MilpVariant::f2l_prime, cuts));
}

TEST_CASE("the all-zeros point violates the hub cardinality row") {
  const Fixture fx = fixture(5, 41, base_params(3));
  const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_sec);
  const VerifyReport report =
      verify_solution(fx.inst, fx.enumeration, m, std::vector<double>(m.vars.size(), 0.0));
  CHECK_FALSE(report.feasible);
  CHECK(has_violation(report, "hubs"));
  CHECK(has_violation(report, "edges"));
  for (const auto& v : report.violations)
    if (v.row == "hubs") CHECK(v.amount == doctest::Approx(3.0));
}

TEST_CASE("every native line substitutes into every formulation") {
  const Fixture fx = fixture(6, 47, base_params(3));
  const auto lines = testsupport::all_lines(fx.inst);
  REQUIRE(lines.size() == 60);

  std::vector<std::pair<MilpVariant, MilpCuts>> combos;
  for (MilpVariant v : {MilpVariant::f1l_flow, MilpVariant::f1l_sec, MilpVariant::f2l,
                        MilpVariant::f2l_prime}) {
    combos.push_back({v, MilpCuts{}});
    MilpCuts dh;
    dh.desthub_orhub = true;
    combos.push_back({v, dh});
  }
  MilpCuts all;
  all.desthub_orhub = true;
  all.ineq_new = true;
  combos.push_back({MilpVariant::f2l_prime, all});

  double best_native = -1.0;
  for (const auto& line : lines)
    best_native = std::max(best_native, evaluate_line(fx.inst, fx.enumeration, line).objective);

  for (const auto& [variant, cuts] : combos) {
    const MilpModel m = build_milp(fx.inst, fx.enumeration, variant, cuts);
    double best_milp = -1.0;
    for (const auto& line : lines) {
      const Solution sol = evaluate_line(fx.inst, fx.enumeration, line);
      const auto x = assignment_from_solution(m, fx.inst, fx.enumeration, sol);
      const VerifyReport report = verify_solution(fx.inst, fx.enumeration, m, x);
      CHECK(report.feasible);
      CHECK_FALSE(report.subtour);
      CHECK(report.objective == doctest::Approx(sol.objective).epsilon(1e-9));
      CHECK(report.objective ==
            doctest::Approx(testsupport::brute_line_objective(fx.inst, fx.enumeration, line))
                .epsilon(1e-9));
      REQUIRE(report.solution.has_value());
      CHECK(report.solution->line.nodes == line.nodes);
      CHECK(report.solution->assigned == sol.assigned);
      best_milp = std::max(best_milp, report.objective);
    }
    CHECK(best_milp == doctest::Approx(best_native).epsilon(1e-9));
  }
}

TEST_CASE("component analysis separates cycles and leaves paths alone") {
  const Fixture fx = fixture(7, 53, base_params(4));
  const auto& inst = fx.inst;
  std::vector<double> z(7, 0.0), y(inst.hub_edges().size(), 0.0);

  SUBCASE("a three-cycle yields its cut, violated by one") {
    for (int v : {1, 2, 3}) z[v] = 1.0;
    z[5] = 1.0;  // fourth hub, isolated
    for (auto [a, b] : {std::pair{1, 2}, {2, 3}, {1, 3}}) y[inst.edge_index(a, b)] = 1.0;
    const auto cuts = separate_sec(inst, z, y);
    REQUIRE(cuts.size() == 1);
    CHECK(cuts[0].nodes == std::vector<int>{1, 2, 3});
    CHECK(cuts[0].anchor == 1);

    double lhs = 0.0, rhs = 0.0;
    for (std::size_t e = 0; e < inst.hub_edges().size(); ++e) {
      const auto& edge = inst.hub_edges()[e];
      const bool in = std::binary_search(cuts[0].nodes.begin(), cuts[0].nodes.end(), edge.k) &&
                      std::binary_search(cuts[0].nodes.begin(), cuts[0].nodes.end(), edge.m);
      if (in) lhs += y[e];
    }
    for (int v : cuts[0].nodes)
      if (v != cuts[0].anchor) rhs += z[v];
    CHECK(lhs - rhs >= 1.0);
  }
  SUBCASE("a simple path yields nothing") {
    for (int v : {0, 1, 2, 4}) z[v] = 1.0;
    for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {2, 4}}) y[inst.edge_index(a, b)] = 1.0;
    CHECK(separate_sec(inst, z, y).empty());
  }
  SUBCASE("only the cyclic component of a mixed support is cut") {
    for (int v : {0, 1, 3, 4, 5}) z[v] = 1.0;
    y[inst.edge_index(0, 1)] = 1.0;
    for (auto [a, b] : {std::pair{3, 4}, {4, 5}, {3, 5}}) y[inst.edge_index(a, b)] = 1.0;
    const auto cuts = separate_sec(inst, z, y);
    REQUIRE(cuts.size() == 1);
    CHECK(cuts[0].nodes == std::vector<int>{3, 4, 5});
  }
}

TEST_CASE("appended subtour rows kill the cycle assignment they target") {
  const Fixture fx = fixture(6, 59, base_params(4));
  MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_sec);

  std::vector<double> x(m.vars.size(), 0.0);
  for (int v : {0, 1, 2, 4}) x[m.var_z(v)] = 1.0;
  for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {0, 2}})
    x[m.var_y(fx.inst.edge_index(a, b))] = 1.0;

  VerifyReport before = verify_solution(fx.inst, fx.enumeration, m, x);
  CHECK(before.feasible);  // the lazy family starts empty
  CHECK(before.subtour);
  CHECK_FALSE(before.solution.has_value());

  std::vector<double> z(6, 0.0), y(fx.inst.hub_edges().size(), 0.0);
  for (int k = 0; k < 6; ++k) z[k] = x[m.var_z(k)];
  for (std::size_t e = 0; e < y.size(); ++e) y[e] = x[m.var_y(static_cast<int>(e))];
  const auto cuts = separate_sec(fx.inst, z, y);
  REQUIRE(cuts.size() == 1);

  add_sec_cuts(m, fx.inst, cuts);
  CHECK(m.sec_registry.size() == 1);
  CHECK(m.rows.back().name == "sec_0");

  x.resize(m.vars.size(), 0.0);  // no new variables were introduced
  VerifyReport after = verify_solution(fx.inst, fx.enumeration, m, x);
  CHECK_FALSE(after.feasible);
  CHECK(has_violation(after, "sec_0"));

  const MilpModel arc = build_milp(fx.inst, fx.enumeration, MilpVariant::f2l);
  MilpModel arc_copy = arc;
  CHECK_THROWS_AS(add_sec_cuts(arc_copy, fx.inst, cuts), ValidationError);
  MilpModel m2 = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_sec);
  CHECK_THROWS_AS(add_sec_cuts(m2, fx.inst, {SecCut{{3}, 3}}), ValidationError);
}

TEST_CASE("subtour rows never exclude a real line") {
  const Fixture fx = fixture(6, 61, base_params(4));
  MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_sec);
  std::vector<SecCut> cuts;
  cuts.push_back({{0, 1, 2}, 0});
  cuts.push_back({{2, 3, 4, 5}, 2});
  add_sec_cuts(m, fx.inst, cuts);
  for (const auto& line : testsupport::all_lines(fx.inst)) {
    const Solution sol = evaluate_line(fx.inst, fx.enumeration, line);
    const VerifyReport report =
        verify_solution(fx.inst, fx.enumeration, m, assignment_from_solution(m, fx.inst, fx.enumeration, sol));
    CHECK(report.feasible);
  }
}

TEST_CASE("text exports are deterministic and structurally sound") {
  const Fixture fx = fixture(5, 67, base_params(3));
  MilpCuts cuts;
  cuts.desthub_orhub = true;
  const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_flow, cuts);

  std::ostringstream a, b;
  write_model(m, MilpFormat::mps, a);
  write_model(m, MilpFormat::mps, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("OBJSENSE") != std::string::npos);
  CHECK(a.str().find("'INTORG'") != std::string::npos);
  CHECK(a.str().find("'INTEND'") != std::string::npos);
  CHECK(a.str().find("ENDATA") != std::string::npos);
  CHECK(a.str().find("BOUNDS") != std::string::npos);

  std::ostringstream la, lb;
  write_model(m, MilpFormat::lp, la);
  write_model(m, MilpFormat::lp, lb);
  CHECK(la.str() == lb.str());
  CHECK(la.str().find("Maximize") != std::string::npos);
  CHECK(la.str().find("Subject To") != std::string::npos);
  CHECK(la.str().find("Binaries") != std::string::npos);
  CHECK(la.str().find("End") != std::string::npos);

  export_model(m, MilpFormat::mps, "milp_export_a.mps");
  export_model(m, MilpFormat::mps, "milp_export_b.mps");
  CHECK(testsupport::file_digest("milp_export_a.mps") ==
        testsupport::file_digest("milp_export_b.mps"));
  std::ifstream in("milp_export_a.mps", std::ios::binary);
  std::stringstream file;
  file << in.rdbuf();
  CHECK(file.str() == a.str());
  std::remove("milp_export_a.mps");
  std::remove("milp_export_b.mps");

  CHECK_THROWS_AS(export_model(m, MilpFormat::mps, "no_such_dir/model.mps"), IoError);
}

TEST_CASE("solution files read back by name with strict vocabulary") {
  const Fixture fx = fixture(5, 71, base_params(2));
  const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_sec);

  const std::string path = "milp_sol.txt";
  {
    std::ofstream out(path);
    out << "# solver output\n";
    out << "\n";
    out << "z_0 1\n";
    out << "z_1=1\n";
    out << "y_0_1 1  # the open edge\n";
  }
  const auto x = import_solution(m, path);
  CHECK(x[m.var_z(0)] == 1.0);
  CHECK(x[m.var_z(1)] == 1.0);
  CHECK(x[m.var_y(fx.inst.edge_index(0, 1))] == 1.0);
  CHECK(x[m.var_z(2)] == 0.0);

  {
    std::ofstream out(path);
    out << "w_9 1\n";
  }
  CHECK_THROWS_AS(import_solution(m, path), ParseError);
  {
    std::ofstream out(path);
    out << "z_0\n";
  }
  CHECK_THROWS_AS(import_solution(m, path), ParseError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(import_solution(m, "milp_sol_missing.txt"), IoError);

  const Solution sol = solve_enumerate(fx.inst, fx.enumeration).solution;
  const auto native = assignment_from_solution(m, fx.inst, fx.enumeration, sol);
  {
    std::ofstream out("milp_sol2.txt");
    for (std::size_t v = 0; v < native.size(); ++v)
      if (native[v] != 0.0) out << m.vars[v].name << " " << native[v] << "\n";
  }
  const auto imported = import_solution(m, "milp_sol2.txt");
  std::remove("milp_sol2.txt");
  CHECK(imported == native);
}

TEST_CASE("verification flags bound, integrality and row breaches") {
  const Fixture fx = fixture(5, 73, base_params(2));
  const MilpModel m = build_milp(fx.inst, fx.enumeration, MilpVariant::f1l_sec);
  const Solution sol = solve_enumerate(fx.inst, fx.enumeration).solution;
  auto x = assignment_from_solution(m, fx.inst, fx.enumeration, sol);
  REQUIRE(verify_solution(fx.inst, fx.enumeration, m, x).feasible);

  auto bad = x;
  bad[m.var_z(0)] = 1.5;
  VerifyReport r1 = verify_solution(fx.inst, fx.enumeration, m, bad);
  CHECK_FALSE(r1.feasible);
  CHECK(has_violation(r1, "bound z_0"));
  CHECK(has_violation(r1, "integrality z_0"));

  bad = x;
  bad[m.var_z(2)] = 0.4;
  VerifyReport r2 = verify_solution(fx.inst, fx.enumeration, m, bad);
  CHECK_FALSE(r2.feasible);
  CHECK(has_violation(r2, "integrality z_2"));
  CHECK(has_violation(r2, "hubs"));

  CHECK_THROWS_AS(verify_solution(fx.inst, fx.enumeration, m, std::vector<double>(3, 0.0)),
                  ValidationError);
}
