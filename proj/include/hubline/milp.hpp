#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hubline/instance.hpp"
#include "hubline/paths.hpp"
#include "hubline/solver.hpp"

namespace hubline {

// The two line formulations: edge based (with either explicit flow rows or an
// external subtour-elimination loop) and arc based (MTZ ordering), the latter
// with per-direction or aggregated degree coupling.
enum class MilpVariant { f1l_flow, f1l_sec, f2l, f2l_prime };

const char* variant_name(MilpVariant v);
MilpVariant parse_variant(const std::string& name);

struct MilpCuts {
  bool desthub_orhub = false;  // endpoint-must-be-hub rows per commodity
  bool ineq_new = false;       // outgoing-arc strengthening, f2l_prime only
};

enum class VarKind { binary, continuous };

struct MilpVar {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lb = 0.0;
  double ub = 1.0;
  double obj = 0.0;
};

struct MilpRow {
  std::string name;
  char sense = 'L';  // 'L' <=, 'G' >=, 'E' ==
  double rhs = 0.0;
  std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
};

// Subtour elimination cut on node set `nodes` (sorted, >= 2 of them), with the
// lowest-id node left out of the right-hand side.
struct SecCut {
  std::vector<int> nodes;
  int anchor = 0;
};

struct MilpModel {
  MilpVariant variant = MilpVariant::f1l_flow;
  MilpCuts cuts;
  int n = 0;
  bool maximize = true;
  std::vector<MilpVar> vars;
  std::vector<MilpRow> rows;
  std::vector<SecCut> sec_registry;

  // Variable blocks. Offsets are -1 when the variant lacks the block.
  int z0 = 0;
  int y0 = -1;                            // undirected edge variables (f1l)
  int yp0 = -1;                           // directed arc variables (f2l)
  int l0 = -1;                            // MTZ order variables (f2l)
  int f0 = -1;                            // flow variables (f1l_flow)
  std::vector<std::pair<int, int>> arcs;  // directed (k,m) pairs, sorted
  std::vector<int> v0;                    // per-commodity offset of v variables

  int var_z(int k) const { return z0 + k; }
  int var_y(int e) const { return y0 + e; }
  int var_v(int c, int i) const { return v0[c] + i; }
  int arc_index(int k, int m) const;  // index into arcs, -1 if absent
  int var_yp(int k, int m) const { return yp0 + arc_index(k, m); }
  int var_f(int k, int m) const { return f0 + arc_index(k, m); }
  int var_l(int k) const { return l0 + k; }
  int var_index(const std::string& name) const;  // -1 if unknown
};

// Assembles the chosen formulation over the enumerated candidates. The
// objective carries each candidate's profit on its v variable.
MilpModel build_milp(const Instance& instance, const Enumeration& enumeration,
                     MilpVariant variant, MilpCuts cuts = {});

// Appends subtour elimination rows to an f1l_sec (or f1l_flow) model and
// records them in the cut registry.
void add_sec_cuts(MilpModel& model, const Instance& instance, const std::vector<SecCut>& cuts);

// Component analysis of the y support graph (threshold 0.5): returns one
// violated cut per component that is not open-path shaped. Exact on integer
// inputs, heuristic on fractional ones.
std::vector<SecCut> separate_sec(const Instance& instance, const std::vector<double>& z_values,
                                 const std::vector<double>& y_values);

enum class MilpFormat { mps, lp };

// Deterministic text export: fixed-field MPS (12 significant digits) or the
// CPLEX LP dialect. Same model, same bytes.
void write_model(const MilpModel& model, MilpFormat format, std::ostream& out);
void export_model(const MilpModel& model, MilpFormat format, const std::string& path);

// Reads `name value` (or `name=value`) lines, ignoring blank lines and
// `#` comments. Unknown names are an error; missing variables default to 0.
std::vector<double> import_solution(const MilpModel& model, const std::string& path);

struct RowViolation {
  std::string row;   // row or bound identifier
  double amount;     // how far outside the feasible side
};

struct VerifyReport {
  bool feasible = false;  // every row, bound and integrality within 1e-6
  std::vector<RowViolation> violations;
  bool subtour = false;  // open-hub structure is not one simple path
  double objective = 0.0;  // recomputed from the v assignment
  std::optional<Solution> solution;  // present when feasible and line shaped
};

// Checks an assignment against every row at integrality tolerance 1e-6,
// reconstructs the hub line from the z/y (or y') support, re-derives the
// commodity assignments from v and recomputes the objective independently.
VerifyReport verify_solution(const Instance& instance, const Enumeration& enumeration,
                             const MilpModel& model, const std::vector<double>& assignment);

// Translates a native solution into a feasible variable assignment for
// `model` (flow and ordering variables included). Inverse of verify_solution
// on optimal solutions.
std::vector<double> assignment_from_solution(const MilpModel& model, const Instance& instance,
                                             const Enumeration& enumeration,
                                             const Solution& solution);

}  // namespace hubline
