#pragma once

#include "roughfilter/penalty.hpp"

// Propagation of the uncertainty value function kappa(t, x, a) for two-state
// chains in log-odds coordinates z = (q, gamma), q = log(pi_2 / pi_1). The
// rough Hamilton-Jacobi equation
//
//   dkappa + [ b~ dq_kappa + sup_u { u dg_kappa - f~ } ] dt
//          + (phi~ dq_kappa - psi~) dY = 0,    kappa(0) = g~,
//
// is advanced two ways:
//
//  * lq_step: a quadratic ansatz kappa = c + (z - zhat)' P (z - zhat) / 2
//    with Taylor-matched coefficient updates (the integrand psi~ enters
//    linearized around zhat; its curvature is deliberately dropped).
//  * grid_dp_step: one backward semi-Lagrangian sweep of the discrete
//    dynamic-programming principle on a rectangular (q, gamma) grid, the
//    desk-scale oracle the quadratic scheme is checked against.
//
// Reported minima are shifted to zero each step; the pre-shift value is the
// additive normalization and is recorded alongside.

namespace roughfilter {

// Closed-form transformed coefficients for the two experiment families.
class TransformedDynamics {
 public:
  TransformedDynamics(const ParamChart& chart, const PenaltySpec& spec);

  double drift(double q, double g) const;      // b~
  double drift_dq(double q, double g) const;
  double drift_dg(double q, double g) const;
  double diffusion(double g) const;            // phi~
  double diffusion_dg(double g) const;
  double integrand(double q, double g) const;  // psi~ = alpha (1 - 2 sigma(q))
  double integrand_dq(double q, double g) const;
  double integrand_dg(double q, double g) const;
  double cost0(double q, double g) const;      // f~ without the control term
  double cost0_dq(double q, double g) const;
  double cost0_dg(double q, double g) const;
  Eigen::Matrix2d cost0_hess(double q, double g) const;

  double eps() const { return spec_.eps; }
  const ParamChart& chart() const { return chart_; }
  const PenaltySpec& spec() const { return spec_; }

 private:
  double level(double g) const;     // alpha resp. alpha(gamma)
  double level_dg(double g) const;
  double level_dgg(double g) const;

  ParamChart chart_;
  PenaltySpec spec_;
};

TransformedDynamics transform_dynamics(const ParamChart& chart, const PenaltySpec& spec);

struct ConditioningError : std::runtime_error {
  long step;
  explicit ConditioningError(long s)
      : std::runtime_error("curvature matrix lost definiteness at step " + std::to_string(s)),
        step(s) {}
};

struct QuadraticValue {
  Eigen::Vector2d z_hat = Eigen::Vector2d::Zero();
  Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
  double c = 0.0;

  // Unshifted evaluation at z (add the recorded pre-shift level for totals).
  double at(double q, double g) const;
};

inline constexpr double kCurvatureFloor = 1e-8;

// One explicit step. dYY (the drive's step area) is accepted for interface
// symmetry; in these coordinates the diffusion field has no q-dependence, so
// its Gubinelli correction vanishes and the area is unused. step_index only
// labels the ConditioningError.
QuadraticValue lq_step(const QuadraticValue& v, const TransformedDynamics& dyn, double dY,
                       double dYY, double dt, long step_index = -1);

struct GridValue {
  Eigen::VectorXd q_axis;  // strictly increasing
  Eigen::VectorXd g_axis;
  Eigen::MatrixXd values;  // (q index, gamma index); +inf marks implausible

  // Bilinear with boundary semantics: outside the axes -> +inf. A corner
  // carrying +inf is treated as missing and the remaining corners are
  // reweighted; only a fully implausible neighborhood yields +inf. This keeps
  // the genuinely implausible region absorbing without letting the window
  // edge (where sources legitimately reference values beyond the grid) eat
  // the interior at one cell per step.
  double interpolate(double q, double g) const;

  double finite_min() const;           // +inf if no finite node
  std::pair<long, long> argmin() const;  // lowest multi-index on ties; throws if all +inf
  static GridValue regular(double q_lo, double q_hi, long nq, double g_lo, double g_hi,
                           long ng);
};

// One backward DPP sweep over [t, t + dt] with observation increment dY.
// Sources are one explicit Euler step upstream; candidate costs add
// f~(z', u) dt + psi~(z') dY; controls out of axis range contribute +inf.
GridValue grid_dp_step(const GridValue& gv, const TransformedDynamics& dyn, double dY,
                       double dt, const std::vector<double>& control_set);

// Joint sweep over two consecutive steps: both controls are optimized
// together and the intermediate point is carried exactly, so kappa_r is
// interpolated once, at the far end. Two sequential grid_dp_step calls solve
// the same discrete problem except for the extra interpolation at the
// midpoint; their gap isolates that interpolation error, which is the
// discrete form of the recursive decomposition of the value function.
GridValue grid_dp_step2(const GridValue& gv, const TransformedDynamics& dyn, double dY1,
                        double dY2, double dt, const std::vector<double>& control_set);

// max |a - b| over nodes finite in both grids (the residual metric).
double grid_gap(const GridValue& a, const GridValue& b);

// |kappa_t - (one DPP sweep over the whole window applied to kappa_r)|,
// maximized over nodes finite in both. A one-step window vanishes by
// construction; multi-step windows measure scheme self-consistency.
double dpp_residual(const GridValue& kappa_t, const GridValue& kappa_r,
                    const TransformedDynamics& dyn, double dY_window, double dt_window,
                    const std::vector<double>& control_set);

enum class PropagateMode { lq, grid };

struct PropagateOptions {
  PropagateMode mode = PropagateMode::lq;
  bool shift_to_zero = true;
  // grid mode
  double q_lo = -8, q_hi = 8, g_lo = -8, g_hi = 8;
  long nq = 101, ng = 101;
  long n_controls = 21;
  double control_max = 50.0;
  std::vector<double> snapshot_times;  // grid copies kept at these times
};

std::vector<double> make_control_set(long n, double u_max);

struct PropagateResult {
  std::vector<double> times;        // grid times, size steps + 1
  std::vector<double> preshift_min; // recorded before each shift, size steps + 1
  // LQ mode
  std::vector<QuadraticValue> lq;   // one per time, c = 0 when shifted
  // grid mode
  std::vector<double> argmin_q, argmin_g;
  GridValue final_grid;
  std::vector<std::pair<double, GridValue>> snapshots;
};

PropagateResult propagate(const SampledRoughPath& drive, const TransformedDynamics& dyn,
                          const PropagateOptions& opts = {});

}  // namespace roughfilter
