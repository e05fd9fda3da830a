#pragma once

#include <vector>

#include "roughfilter/rde.hpp"
#include "roughfilter/rng.hpp"

// Finite-state Markov chains observed in additive white noise, and the
// Wonham filter for the conditional law. Rate matrices use the convention
// that columns sum to zero with nonnegative off-diagonal entries, so the
// forward equation is  d pi = A pi dt.

namespace roughfilter {

inline constexpr double kSimplexClamp = 1e-12;

struct SimplexState {
  Eigen::VectorXd probs;

  long dim() const { return probs.size(); }
  void validate() const;  // throws unless interior point summing to 1
};

// Normalize then clamp components into [clamp, 1 - clamp] and renormalize.
// Increments *clamp_events once if any component needed clamping.
SimplexState project_to_simplex(Eigen::VectorXd raw, long* clamp_events = nullptr);

// Differentiable map from an unconstrained chart R^k into (rate matrix,
// observation matrix) pairs. Two concrete families cover the experiments:
// a two-state chain with unknown transition rate and known symmetric
// observation level, and one with known rates and unknown level.
struct ParamChart {
  enum class Family { rate_uncertain, observation_uncertain, custom };

  Family family = Family::custom;
  long m = 0, d = 0, k = 0;
  double nu = 0, alpha = 0;              // rate_uncertain constants
  double lambda = 0, mu = 0, nu1 = 0, nu2 = 0;  // observation_uncertain constants

  std::function<void(const Eigen::VectorXd& a, Eigen::MatrixXd& A, Eigen::MatrixXd& h)> map;
  // per-component derivatives dA/da_j, dh/da_j
  std::function<void(const Eigen::VectorXd& a, std::vector<Eigen::MatrixXd>& dA,
                     std::vector<Eigen::MatrixXd>& dh)> jacobian;

  void evaluate(const Eigen::VectorXd& a, Eigen::MatrixXd& A, Eigen::MatrixXd& h) const;

  // Natural parameter of the family at chart point a: the transition rate in
  // (0, nu), resp. the observation level in (nu1, nu2).
  double natural_parameter(double a) const;
  // Inverse of natural_parameter (logit of the normalized position).
  double chart_point(double natural) const;

  // Two-state chain, rate lambda = nu * sigmoid(a) unknown, h = (-alpha, alpha).
  static ParamChart rate_uncertain(double nu, double alpha);
  // Two-state chain with fixed rates, level alpha in (nu1, nu2) unknown.
  static ParamChart observation_uncertain(double lambda, double mu, double nu1, double nu2);
  // Constant singleton chart (no uncertainty), k = 1 with inert coordinate.
  static ParamChart fixed(Eigen::MatrixXd A, Eigen::MatrixXd h);
};

// Checks rate-matrix structure (zero column sums, nonnegative off-diagonals)
// at a chart point; throws on violation.
void check_rate_matrix(const Eigen::MatrixXd& A);

struct ChainPath {
  double t0 = 0, T = 0;
  int initial_state = 0;
  std::vector<double> jump_times;  // increasing
  std::vector<int> post_jump_states;

  int state_at(double t) const;
};

// Thinning on the dt grid; gamma supplies the (possibly time-varying) chart
// point per grid step and must be sampled on the same grid. Requires
// max exit rate * dt < 1 (hard error); accuracy degrades above ~0.1.
ChainPath simulate_chain(const ParamChart& chart, const SampledPath& gamma,
                         const SimplexState& pi0, CounterRng& rng);

// Euler-Maruyama observation with exact Gaussian increments:
//   dY^i = (h^i)' e_{X_t} dt + dB^i,  Y_0 = 0.
SampledPath simulate_observation(const ChainPath& chain, const ParamChart& chart,
                                 const SampledPath& gamma, CounterRng& rng);

// One explicit step of the Ito-form filter
//   d pi = A pi dt + sum_i (H^i - (h^i)' pi I) pi (dY^i - (h^i)' pi dt),
// followed by simplex projection. A raw component <= -0.1 signals gross
// instability and throws (step size too large for the data).
SimplexState wonham_ito_step(const SimplexState& pi, const Eigen::MatrixXd& A,
                             const Eigen::MatrixXd& h, const Eigen::VectorXd& dY,
                             double dt, long* clamp_events = nullptr);

// Stratonovich-form coefficients for the same filter, as an RDE against the
// lifted observation:
//   drift     b = A pi + (1/2) sum_i (((h^i)' H^i pi) I - (H^i)^2) pi
//   diffusion phi^i = (H^i - (h^i)' pi I) pi.
RdeCoefficients wonham_strat_coeffs(const ParamChart& chart);

struct FilterResult {
  ControlledSolution sol;
  long clamp_events = 0;
  long max_clamp_streak = 0;
};

// Davie solve of the Stratonovich-form filter with per-step projection.
FilterResult filter_rough(const ParamChart& chart, const SampledPath& gamma,
                          const SimplexState& pi0, const SampledRoughPath& drive);

}  // namespace roughfilter
