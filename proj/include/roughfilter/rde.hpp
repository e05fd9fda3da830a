#pragma once

#include <functional>
#include <stdexcept>

#include "roughfilter/rough_path.hpp"

// Controlled differential equations
//
//   dX = b(X, gamma) dt + phi(X, gamma) dY,    X in R^m, Y a level-2 drive,
//
// stepped by the second-order scheme
//
//   X_{i+1} = X_i + b dt + phi dY_i + sum_{j,l} Dphi_j phi_l A_i(l, j),
//
// with gamma an absolutely continuous parameter path entering as a controlled
// integrand of zero derivative (its corrections vanish, its increments ride
// along). An optional integrand psi accumulates the compensated rough sums
//
//   I_{i+1} = I_i + psi dY_i + sum_{j,l} Dpsi_j phi_l A_i(l, j).

namespace roughfilter {

struct RdeCoefficients {
  long state_dim = 0;   // m
  long drive_dim = 0;   // d
  long param_dim = 0;   // k
  long integrand_dim = 0;  // l; 0 disables integral accumulation

  using Vec = Eigen::VectorXd;
  using Mat = Eigen::MatrixXd;

  std::function<Vec(const Vec& x, const Vec& g)> drift;       // R^m
  std::function<Mat(const Vec& x, const Vec& g)> diffusion;   // m x d
  // entry j = Jacobian in x of diffusion column j, m x m
  std::function<std::vector<Mat>(const Vec& x, const Vec& g)> diffusion_dx;
  std::function<Mat(const Vec& x, const Vec& g)> integrand;   // l x d
  // entry j = Jacobian in x of integrand column j, l x m
  std::function<std::vector<Mat>(const Vec& x, const Vec& g)> integrand_dx;

  void validate() const;
};

struct SolveDiverged : std::runtime_error {
  long step;
  explicit SolveDiverged(long s)
      : std::runtime_error("rde solve diverged at step " + std::to_string(s)), step(s) {}
};

struct SolveOptions {
  double divergence_norm = 1e12;
  // Applied to the freshly computed state (e.g. simplex projection). Second
  // argument is the step index just completed.
  std::function<void(Eigen::VectorXd&, long)> post_step;
};

struct ControlledSolution {
  Eigen::MatrixXd states;                  // N x m, one row per grid point
  std::vector<Eigen::MatrixXd> gubinelli;  // N entries, m x d
  Eigen::MatrixXd integrals;               // N x l (empty when l = 0)
  Eigen::VectorXd times;
};

// gamma must share the drive's grid.
ControlledSolution solve_forward(const RdeCoefficients& coeffs, const Eigen::VectorXd& x0,
                                 const SampledPath& gamma, const SampledRoughPath& drive,
                                 const SolveOptions& opts = {});

// Terminal-value problem via time reversal of drive and gamma with negated
// drift; output is returned in forward time order, last state = x_terminal.
// Integral accumulation is disabled (meaningful only forward).
ControlledSolution solve_backward(const RdeCoefficients& coeffs,
                                  const Eigen::VectorXd& x_terminal,
                                  const SampledPath& gamma, const SampledRoughPath& drive,
                                  const SolveOptions& opts = {});

// Realized-vs-bound diagnostic for the integral growth estimate
//   |int psi dY|_p <= C (1 + T^{(p-1)/p} + |gamma|_{p/2}^{(p-1)/2}) (|Y|_p + |A|_{p/2}).
// q_exponent < 0 selects the canonical (p-1)/2; the knob exists so tests can
// demonstrate that smaller exponents break the bound. C has no canonical
// value; callers configure it (default 1).
struct StabilityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // 0 when rhs == 0 (zero drive)
};
StabilityReport stability_check(const ControlledSolution& sol, const SampledRoughPath& drive,
                                const SampledPath& gamma, double p, double C = 1.0,
                                double q_exponent = -1.0);

}  // namespace roughfilter
