#pragma once

#include <limits>

#include "roughfilter/hmm.hpp"

// Pathwise plausibility cost of a candidate explanation (gamma path, initial
// law) for an observed drive:
//
//   beta = int f(pi, gamma, u) ds + int psi(pi, gamma) dY + g(pi_0, gamma_0),
//
// where pi is the rough filter driven by the candidate, u = gamma-dot,
//   f   = fprior + (1/2) sum_i (h^i)' H^i pi,
//   psi^i = -(h^i)' pi,
// and the additive normalization constant is fixed at zero (reported values
// are shifted so the running minimum sits at zero downstream).
//
// Infinite cost is the IEEE infinity sentinel: it propagates through min and
// comparisons and is never combined arithmetically with finite costs.

namespace roughfilter {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct PenaltySpec {
  double tau = 5e-2;    // posterior anchor weight
  double delta = 5e-2;  // parameter anchor weight
  double eps = 1e-3;    // control cost is |u|^2 / (2 eps)
  double q_anchor = 0.0;
  double gamma_anchor = 0.0;
  double init_weight_q = 1.0;
  double init_weight_gamma = 1.0;
  // A filter component pinned at the clamp for more than this many
  // consecutive steps is treated as a simplex exit.
  long clamp_streak_limit = 20;
  // Optional replacement for the default two-state prior fprior(pi, gamma, u)
  // (which needs m = 2; supply this for larger chains).
  std::function<double(const SimplexState&, const Eigen::VectorXd& gamma,
                       const Eigen::VectorXd& u, const Eigen::MatrixXd& h)> prior;

  void validate() const;
};

// log-odds of the second component of a two-state law.
double log_odds(const SimplexState& pi);

// f(pi, gamma, u): prior part plus the likelihood-completion term
// (1/2) sum_i (h^i)' H^i pi with H^i = diag(h^i). The completion term is what
// remains of the quadratic likelihood term once the observation integral is
// taken in the rough (Stratonovich-consistent) sense; adding a further
// (1/2)|(h^i)' pi|^2 on top of it would double-count the likelihood and bias
// the minimizer toward uncommitted posteriors. The default prior is
//   tau/2 (q - q_anchor)^2 + delta/2 |gamma - gamma_anchor|^2 + |u|^2/(2 eps).
double running_cost(const SimplexState& pi, const Eigen::VectorXd& gamma,
                    const Eigen::VectorXd& u, const ParamChart& chart,
                    const PenaltySpec& spec);

// psi(pi, gamma) as a 1 x d row: component i is -(h^i)' pi.
Eigen::MatrixXd observation_integrand(const SimplexState& pi, const Eigen::VectorXd& gamma,
                                      const ParamChart& chart);

// Installs psi and its state Jacobian on filter coefficients so the rough
// integral accumulates alongside the solve.
void attach_observation_integrand(const ParamChart& chart, RdeCoefficients& coeffs);

// g(pi0, gamma0) = 1/2 (w_q q0^2 + w_g |gamma0|^2); +inf on the boundary.
double initial_cost(const SimplexState& pi0, const Eigen::VectorXd& gamma0,
                    const PenaltySpec& spec);

// Full cost of one candidate. gamma_path shares the drive grid; u is
// recovered by forward differences and the ds-integrals use left-endpoint
// quadrature. Simplex exit or solver divergence yields the +inf sentinel.
double penalty_beta(const SampledPath& gamma_path, const SimplexState& pi0,
                    const SampledRoughPath& drive, const ParamChart& chart,
                    const PenaltySpec& spec);

}  // namespace roughfilter
