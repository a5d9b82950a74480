#pragma once

#include <vector>

namespace hubline {

// One origin-destination market under the gravity demand law
//   w(t) = P_o * P_d / t^r,
// served at revenue R per unit of demand per unit of time saved. The profit of
// serving the market at door-to-door time t_prime <= t_direct is
//   f(t_prime) = R * P_o * P_d * (t_direct - t_prime) / t_prime^r.
struct ProfitTerm {
  double revenue = 0.0;      // R, revenue rate
  double pop_origin = 0.0;   // P_o
  double pop_dest = 0.0;     // P_d
  double t_direct = 0.0;     // current (shortest) direct travel time
  double r = 1.0;            // demand elasticity exponent, r > 0
};

// P_o * P_d / t^r. Throws std::domain_error when t <= 0.
double demand(double pop_origin, double pop_dest, double t, double r);

// f(t_prime) as above. Zero when t_prime == t_direct. Throws std::domain_error
// when t_prime <= 0 or t_prime > t_direct.
double profit(const ProfitTerm& term, double t_prime);

// First derivative of f; nonpositive on (0, t_direct] for r >= 1
// (the profit never improves by slowing the service down).
double profit_d1(const ProfitTerm& term, double t_prime);

// Second derivative of f; nonnegative on (0, t_direct] for r >= 1 (convexity).
double profit_d2(const ProfitTerm& term, double t_prime);

// Door-to-door time of serving origin -> hub_sequence -> destination:
// access leg, access time at the first hub, discounted line legs, exit time at
// the last hub, exit leg. `times` is a row-major n x n matrix. Legs with equal
// endpoints cost zero (origin or destination acting as a hub).
// Throws ValidationError when hub_sequence has fewer than two hubs.
double path_time(int origin, const std::vector<int>& hub_sequence, int destination,
                 const std::vector<double>& times, int n, double access_time,
                 double exit_time, double alpha);

}  // namespace hubline
