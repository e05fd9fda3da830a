#include "roughfilter/penalty.hpp"

#include <algorithm>
#include <cmath>

namespace roughfilter {

void PenaltySpec::validate() const {
  if (!(tau > 0.0 && delta > 0.0 && eps > 0.0))
    throw std::invalid_argument("PenaltySpec: weights must be positive");
  if (clamp_streak_limit < 1)
    throw std::invalid_argument("PenaltySpec: clamp_streak_limit < 1");
}

double log_odds(const SimplexState& pi) {
  if (pi.dim() != 2) throw std::invalid_argument("log_odds: two-state laws only");
  return std::log(pi.probs(1) / pi.probs(0));
}

double running_cost(const SimplexState& pi, const Eigen::VectorXd& gamma,
                    const Eigen::VectorXd& u, const ParamChart& chart,
                    const PenaltySpec& spec) {
  Eigen::MatrixXd A, h;
  chart.evaluate(gamma, A, h);

  double prior;
  if (spec.prior) {
    prior = spec.prior(pi, gamma, u, h);
  } else {
    if (pi.dim() != 2)
      throw std::invalid_argument("running_cost: default prior needs m = 2");
    const double q = log_odds(pi);
    prior = 0.5 * spec.tau * (q - spec.q_anchor) * (q - spec.q_anchor) +
            0.5 * spec.delta *
                (gamma.array() - spec.gamma_anchor).matrix().squaredNorm() +
            u.squaredNorm() / (2.0 * spec.eps);
  }

  double completion = 0.0;  // 1/2 sum (h^i)' H^i pi
  for (long i = 0; i < h.cols(); ++i)
    completion += 0.5 * h.col(i).cwiseProduct(h.col(i)).dot(pi.probs);
  return prior + completion;
}

Eigen::MatrixXd observation_integrand(const SimplexState& pi, const Eigen::VectorXd& gamma,
                                      const ParamChart& chart) {
  Eigen::MatrixXd A, h;
  chart.evaluate(gamma, A, h);
  Eigen::MatrixXd psi(1, h.cols());
  for (long i = 0; i < h.cols(); ++i) psi(0, i) = -h.col(i).dot(pi.probs);
  return psi;
}

void attach_observation_integrand(const ParamChart& chart, RdeCoefficients& coeffs) {
  coeffs.integrand_dim = 1;
  coeffs.integrand = [chart](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    Eigen::MatrixXd A, h;
    chart.evaluate(g, A, h);
    Eigen::MatrixXd psi(1, h.cols());
    for (long i = 0; i < h.cols(); ++i) psi(0, i) = -h.col(i).dot(x);
    return psi;
  };
  coeffs.integrand_dx = [chart](const Eigen::VectorXd&, const Eigen::VectorXd& g) {
    Eigen::MatrixXd A, h;
    chart.evaluate(g, A, h);
    std::vector<Eigen::MatrixXd> out(h.cols());
    for (long i = 0; i < h.cols(); ++i) out[i] = -h.col(i).transpose();  // 1 x m
    return out;
  };
}

double initial_cost(const SimplexState& pi0, const Eigen::VectorXd& gamma0,
                    const PenaltySpec& spec) {
  for (long i = 0; i < pi0.dim(); ++i)
    if (!(pi0.probs(i) > 0.0 && pi0.probs(i) < 1.0)) return kInfiniteCost;
  const double q0 = log_odds(pi0);
  return 0.5 * spec.init_weight_q * q0 * q0 +
         0.5 * spec.init_weight_gamma * gamma0.squaredNorm();
}

double penalty_beta(const SampledPath& gamma_path, const SimplexState& pi0,
                    const SampledRoughPath& drive, const ParamChart& chart,
                    const PenaltySpec& spec) {
  spec.validate();
  gamma_path.validate();
  if (gamma_path.size() != drive.size())
    throw std::invalid_argument("penalty_beta: gamma and drive grids differ");

  const double g0 = initial_cost(pi0, gamma_path.values.row(0).transpose(), spec);
  if (std::isinf(g0)) return kInfiniteCost;

  RdeCoefficients coeffs = wonham_strat_coeffs(chart);
  attach_observation_integrand(chart, coeffs);

  long clamp_events = 0, streak = 0, max_streak = 0;
  SolveOptions opts;
  opts.post_step = [&](Eigen::VectorXd& x, long) {
    long before = clamp_events;
    x = project_to_simplex(std::move(x), &clamp_events).probs;
    streak = clamp_events > before ? streak + 1 : 0;
    max_streak = std::max(max_streak, streak);
  };

  ControlledSolution sol;
  try {
    sol = solve_forward(coeffs, pi0.probs, gamma_path, drive, opts);
  } catch (const SolveDiverged&) {
    return kInfiniteCost;
  }
  if (max_streak > spec.clamp_streak_limit) return kInfiniteCost;

  const long n = gamma_path.size();
  const long k = gamma_path.dim();
  double f_int = 0.0;
  for (long i = 0; i + 1 < n; ++i) {
    const double dt = gamma_path.times(i + 1) - gamma_path.times(i);
    const Eigen::VectorXd u =
        (gamma_path.values.row(i + 1) - gamma_path.values.row(i)).transpose() / dt;
    SimplexState pi{sol.states.row(i).transpose()};
    f_int += running_cost(pi, gamma_path.values.row(i).transpose(), u, chart, spec) * dt;
    (void)k;
  }
  return f_int + sol.integrals(n - 1, 0) + g0;
}

}  // namespace roughfilter
