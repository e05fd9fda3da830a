#pragma once

#include "roughfilter/value.hpp"

// Extraction layer on top of the propagated value function: most-reasonable
// parameter / posterior pairs, sublevel ("reasonable") parameter sets, and
// the divergence-robust conditional expectation
//
//   E(phi | Y) = sup_x { sum_j x_j phi_j - ((1/k1) inf_a kappa(t, x, a))^{k2} }.

namespace roughfilter {

// Two-state law with log-odds q on the second component.
SimplexState posterior_from_log_odds(double q);

struct RobustEstimate {
  double t = 0;
  double a_star = 0;          // chart coordinate
  double mapped_param = 0;    // natural parameter (rate or level)
  SimplexState x_star;        // most reasonable posterior
  double kappa_min = 0;       // unshifted minimum at t
};

// Quadratic mode: the minimizer is z_hat itself; level is the recorded
// pre-shift minimum at the same step.
RobustEstimate most_reasonable(const QuadraticValue& v, double preshift_min,
                               const ParamChart& chart, double t);

// Grid mode: argmin node (lowest multi-index on ties); throws if every node
// is implausible.
RobustEstimate most_reasonable(const GridValue& gv, const ParamChart& chart, double t);

// Indices into the gamma axis whose best-over-q value lies strictly under
// lambda. Call on shifted values (minimum zero) so levels are comparable.
std::vector<long> reasonable_set(const GridValue& gv, double lambda);

// k1 > 0, k2 >= 1; gv must be shifted to minimum zero. phi holds the payoff
// per chain state (m = 2): phi = (phi(e1), phi(e2)).
double dr_expectation(const GridValue& gv, const Eigen::Vector2d& phi, double k1, double k2);

}  // namespace roughfilter
