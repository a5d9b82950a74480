#include "hubline/gravity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hubline/errors.hpp"

namespace hubline {

namespace {

// t^r via exp(r ln t). Keeps the power evaluation identical between the demand
// law, the profit and its derivatives, so algebraic identities between them
// hold to the last ulp achievable.
double pow_rt(double t, double r) { return std::exp(r * std::log(t)); }

}  // namespace

double demand(double pop_origin, double pop_dest, double t, double r) {
  if (!(t > 0.0)) throw std::domain_error("demand: travel time must be positive, got " + std::to_string(t));
  return pop_origin * pop_dest / pow_rt(t, r);
}

double profit(const ProfitTerm& term, double t_prime) {
  if (!(t_prime > 0.0)) throw std::domain_error("profit: service time must be positive, got " + std::to_string(t_prime));
  if (t_prime > term.t_direct)
    throw std::domain_error("profit: service time " + std::to_string(t_prime) +
                            " exceeds direct time " + std::to_string(term.t_direct));
  return term.revenue * term.pop_origin * term.pop_dest * (term.t_direct - t_prime) /
         pow_rt(t_prime, term.r);
}

double profit_d1(const ProfitTerm& term, double t_prime) {
  if (!(t_prime > 0.0)) throw std::domain_error("profit_d1: service time must be positive");
  const double r = term.r;
  return term.revenue * term.pop_origin * term.pop_dest *
         ((r - 1.0) * t_prime - r * term.t_direct) / pow_rt(t_prime, r + 1.0);
}

double profit_d2(const ProfitTerm& term, double t_prime) {
  if (!(t_prime > 0.0)) throw std::domain_error("profit_d2: service time must be positive");
  const double r = term.r;
  return term.revenue * term.pop_origin * term.pop_dest * r *
         ((r + 1.0) * term.t_direct - (r - 1.0) * t_prime) / pow_rt(t_prime, r + 2.0);
}

double path_time(int origin, const std::vector<int>& hub_sequence, int destination,
                 const std::vector<double>& times, int n, double access_time,
                 double exit_time, double alpha) {
  if (hub_sequence.size() < 2)
    throw ValidationError("path_time: a hub sequence needs at least two hubs, got " +
                          std::to_string(hub_sequence.size()));
  const auto t = [&](int i, int j) { return times[static_cast<std::size_t>(i) * n + j]; };
  double total = t(origin, hub_sequence.front()) + access_time;
  for (std::size_t i = 0; i + 1 < hub_sequence.size(); ++i)
    total += alpha * t(hub_sequence[i], hub_sequence[i + 1]);
  total += exit_time + t(hub_sequence.back(), destination);
  return total;
}

}  // namespace hubline
