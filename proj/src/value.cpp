#include "roughfilter/value.hpp"

#include <algorithm>
#include <cmath>

namespace roughfilter {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TransformedDynamics::TransformedDynamics(const ParamChart& chart, const PenaltySpec& spec)
    : chart_(chart), spec_(spec) {
  spec_.validate();
  if (chart.family == ParamChart::Family::custom)
    throw std::invalid_argument("TransformedDynamics: custom charts unsupported");
  if (chart.m != 2 || chart.d != 1 || chart.k != 1)
    throw std::invalid_argument("TransformedDynamics: needs m=2, d=1, k=1");
}

TransformedDynamics transform_dynamics(const ParamChart& chart, const PenaltySpec& spec) {
  return TransformedDynamics(chart, spec);
}

double TransformedDynamics::level(double g) const {
  return chart_.family == ParamChart::Family::rate_uncertain
             ? chart_.alpha
             : chart_.nu1 + (chart_.nu2 - chart_.nu1) * sigmoid(g);
}

double TransformedDynamics::level_dg(double g) const {
  if (chart_.family == ParamChart::Family::rate_uncertain) return 0.0;
  const double s = sigmoid(g);
  return (chart_.nu2 - chart_.nu1) * s * (1.0 - s);
}

double TransformedDynamics::level_dgg(double g) const {
  if (chart_.family == ParamChart::Family::rate_uncertain) return 0.0;
  const double s = sigmoid(g);
  return (chart_.nu2 - chart_.nu1) * s * (1.0 - s) * (1.0 - 2.0 * s);
}

double TransformedDynamics::drift(double q, double g) const {
  const double s = sigmoid(q);
  if (chart_.family == ParamChart::Family::rate_uncertain) {
    const double lam = chart_.nu * sigmoid(g);
    return (lam - chart_.nu * s) / (s * (1.0 - s));
  }
  return chart_.lambda / s - chart_.mu / (1.0 - s);
}

double TransformedDynamics::drift_dq(double q, double g) const {
  const double s = sigmoid(q);
  if (chart_.family == ParamChart::Family::rate_uncertain)
    return -chart_.nu - drift(q, g) * (1.0 - 2.0 * s);
  return -chart_.lambda * (1.0 - s) / s - chart_.mu * s / (1.0 - s);
}

double TransformedDynamics::drift_dg(double q, double g) const {
  if (chart_.family != ParamChart::Family::rate_uncertain) return 0.0;
  const double s = sigmoid(q);
  const double sg = sigmoid(g);
  return chart_.nu * sg * (1.0 - sg) / (s * (1.0 - s));
}

double TransformedDynamics::diffusion(double g) const { return 2.0 * level(g); }

double TransformedDynamics::diffusion_dg(double g) const { return 2.0 * level_dg(g); }

double TransformedDynamics::integrand(double q, double g) const {
  return level(g) * (1.0 - 2.0 * sigmoid(q));
}

double TransformedDynamics::integrand_dq(double q, double g) const {
  const double s = sigmoid(q);
  return -2.0 * level(g) * s * (1.0 - s);
}

double TransformedDynamics::integrand_dg(double q, double g) const {
  return level_dg(g) * (1.0 - 2.0 * sigmoid(q));
}

// Running cost in chart coordinates: quadratic anchors plus the likelihood
// completion term (1/2) sum_i (h^i)' H^i pi, which for the two-state charts
// reduces to level(g)^2 / 2 and is the entire state dependence of the
// likelihood outside the observation-paired integral. The control cost
// |u|^2/(2 eps) is accounted separately by the schemes.
double TransformedDynamics::cost0(double q, double g) const {
  const double al = level(g);
  const double dq = q - spec_.q_anchor;
  const double dg = g - spec_.gamma_anchor;
  return 0.5 * spec_.tau * dq * dq + 0.5 * spec_.delta * dg * dg + 0.5 * al * al;
}

double TransformedDynamics::cost0_dq(double q, double /*g*/) const {
  return spec_.tau * (q - spec_.q_anchor);
}

double TransformedDynamics::cost0_dg(double /*q*/, double g) const {
  return spec_.delta * (g - spec_.gamma_anchor) + level(g) * level_dg(g);
}

Eigen::Matrix2d TransformedDynamics::cost0_hess(double /*q*/, double g) const {
  const double al = level(g);
  const double dal = level_dg(g);
  Eigen::Matrix2d F;
  F(0, 0) = spec_.tau;
  F(0, 1) = F(1, 0) = 0.0;
  F(1, 1) = spec_.delta + dal * dal + al * level_dgg(g);
  return F;
}

double QuadraticValue::at(double q, double g) const {
  const Eigen::Vector2d w(q - z_hat(0), g - z_hat(1));
  return c + 0.5 * w.dot(P * w);
}

QuadraticValue lq_step(const QuadraticValue& v, const TransformedDynamics& dyn, double dY,
                       double dYY, double dt, long step_index) {
  (void)dYY;  // no q-dependence in the diffusion field; correction vanishes
  const double q = v.z_hat(0), g = v.z_hat(1);

  const double bt = dyn.drift(q, g);
  const double pt = dyn.diffusion(g);
  const Eigen::Vector2d grad_f(dyn.cost0_dq(q, g), dyn.cost0_dg(q, g));
  const Eigen::Vector2d grad_psi(dyn.integrand_dq(q, g), dyn.integrand_dg(q, g));
  const Eigen::Matrix2d F = dyn.cost0_hess(q, g);

  // flow Jacobian increment; only the q-row is dynamic
  Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
  M(0, 0) = dyn.drift_dq(q, g) * dt;
  M(0, 1) = dyn.drift_dg(q, g) * dt + dyn.diffusion_dg(g) * dY;

  QuadraticValue out;
  out.c = v.c + dyn.cost0(q, g) * dt + dyn.integrand(q, g) * dY;

  out.z_hat = v.z_hat;
  out.z_hat(0) += bt * dt + pt * dY;
  out.z_hat -= v.P.inverse() * (grad_f * dt + grad_psi * dY);

  // Curvature transport in three substeps, each of which preserves positive
  // semidefiniteness, so definiteness can only be lost to roundoff:
  //  1. linear part -(M'P + PM) in congruence form (I-M)'P(I-M), the exact
  //     flow map shape; plain Euler injects an O(|M|^2 |P|) symmetric error
  //     that overwhelms the smallest eigenvalue once |P| has grown large
  //     (the q-direction carries no control, so |P| grows exponentially);
  //  2. running-cost Hessian F*dt (PSD by construction of f0 up to the
  //     bounded indefinite observation term, dominated by tau/delta);
  //  3. control damping -eps * P e_g e_g' P integrated exactly over dt via
  //     the rank-one resolvent, unconditionally stable (the explicit product
  //     form goes unstable once eps*P_gg*dt > 2, reachable here).
  const Eigen::Matrix2d T = Eigen::Matrix2d::Identity() - M;
  Eigen::Matrix2d P = T.transpose() * v.P * T + F * dt;
  const double damp = dyn.eps() * dt / (1.0 + dyn.eps() * dt * P(1, 1));
  P -= damp * (P.col(1) * P.row(1)).eval();
  P = 0.5 * (P + P.transpose()).eval();
  if (!P.allFinite() || P.norm() > 1e100) throw ConditioningError(step_index);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(P);
  Eigen::Vector2d ev = es.eigenvalues();
  if (ev(0) < -1e-6 * (1.0 + P.norm())) throw ConditioningError(step_index);
  bool floored = false;
  for (int i = 0; i < 2; ++i)
    if (ev(i) < kCurvatureFloor) {
      ev(i) = kCurvatureFloor;
      floored = true;
    }
  if (floored)
    out.P = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  else
    out.P = P;
  return out;
}

GridValue GridValue::regular(double q_lo, double q_hi, long nq, double g_lo, double g_hi,
                             long ng) {
  if (nq < 2 || ng < 2 || !(q_hi > q_lo) || !(g_hi > g_lo))
    throw std::invalid_argument("GridValue: bad axes");
  GridValue gv;
  gv.q_axis = Eigen::VectorXd::LinSpaced(nq, q_lo, q_hi);
  gv.g_axis = Eigen::VectorXd::LinSpaced(ng, g_lo, g_hi);
  gv.values = Eigen::MatrixXd::Zero(nq, ng);
  return gv;
}

double GridValue::interpolate(double q, double g) const {
  const double q_lo = q_axis(0), q_hi = q_axis(q_axis.size() - 1);
  const double g_lo = g_axis(0), g_hi = g_axis(g_axis.size() - 1);
  if (q < q_lo || q > q_hi || g < g_lo || g > g_hi) return kInfiniteCost;

  const double hq = (q_hi - q_lo) / double(q_axis.size() - 1);
  const double hg = (g_hi - g_lo) / double(g_axis.size() - 1);
  long iq = std::min<long>(long((q - q_lo) / hq), q_axis.size() - 2);
  long ig = std::min<long>(long((g - g_lo) / hg), g_axis.size() - 2);
  const double fq = (q - q_axis(iq)) / hq;
  const double fg = (g - g_axis(ig)) / hg;

  const double w[4] = {(1 - fq) * (1 - fg), (1 - fq) * fg, fq * (1 - fg), fq * fg};
  const double vals[4] = {values(iq, ig), values(iq, ig + 1), values(iq + 1, ig),
                          values(iq + 1, ig + 1)};
  double acc = 0.0, wsum = 0.0;
  for (int c = 0; c < 4; ++c) {
    if (w[c] <= 1e-12) continue;
    if (std::isinf(vals[c])) continue;
    acc += w[c] * vals[c];
    wsum += w[c];
  }
  if (wsum <= 0.0) return kInfiniteCost;
  return acc / wsum;
}

double GridValue::finite_min() const {
  double best = kInfiniteCost;
  for (long i = 0; i < values.rows(); ++i)
    for (long j = 0; j < values.cols(); ++j)
      if (values(i, j) < best) best = values(i, j);
  return best;
}

std::pair<long, long> GridValue::argmin() const {
  double best = kInfiniteCost;
  std::pair<long, long> at{-1, -1};
  for (long i = 0; i < values.rows(); ++i)
    for (long j = 0; j < values.cols(); ++j)
      if (values(i, j) < best) {  // strict: ties keep the lowest multi-index
        best = values(i, j);
        at = {i, j};
      }
  if (at.first < 0) throw std::runtime_error("GridValue: all nodes implausible");
  return at;
}

GridValue grid_dp_step(const GridValue& gv, const TransformedDynamics& dyn, double dY,
                       double dt, const std::vector<double>& control_set) {
  if (control_set.empty()) throw std::invalid_argument("grid_dp_step: empty control set");
  const double half_inv_eps = 1.0 / (2.0 * dyn.eps());
  GridValue out = gv;
  for (long i = 0; i < gv.q_axis.size(); ++i) {
    const double q = gv.q_axis(i);
    for (long j = 0; j < gv.g_axis.size(); ++j) {
      const double g = gv.g_axis(j);
      const double src_q = q - dyn.drift(q, g) * dt - dyn.diffusion(g) * dY;
      double best = kInfiniteCost;
      for (const double u : control_set) {
        const double src_g = g - u * dt;
        const double prev = gv.interpolate(src_q, src_g);
        if (std::isinf(prev)) continue;
        const double cand = prev + dyn.cost0(src_q, src_g) * dt + u * u * half_inv_eps * dt +
                            dyn.integrand(src_q, src_g) * dY;
        if (cand < best) best = cand;
      }
      out.values(i, j) = best;
    }
  }
  return out;
}

GridValue grid_dp_step2(const GridValue& gv, const TransformedDynamics& dyn, double dY1,
                        double dY2, double dt, const std::vector<double>& control_set) {
  if (control_set.empty()) throw std::invalid_argument("grid_dp_step2: empty control set");
  const double half_inv_eps = 1.0 / (2.0 * dyn.eps());
  GridValue out = gv;
  for (long i = 0; i < gv.q_axis.size(); ++i) {
    const double q = gv.q_axis(i);
    for (long j = 0; j < gv.g_axis.size(); ++j) {
      const double g = gv.g_axis(j);
      // later substep (the one adjacent to the output time) first
      const double mid_q_base = q - dyn.drift(q, g) * dt - dyn.diffusion(g) * dY2;
      double best = kInfiniteCost;
      for (const double u2 : control_set) {
        const double mid_q = mid_q_base;
        const double mid_g = g - u2 * dt;
        const double later = dyn.cost0(mid_q, mid_g) * dt + u2 * u2 * half_inv_eps * dt +
                             dyn.integrand(mid_q, mid_g) * dY2;
        const double src_q =
            mid_q - dyn.drift(mid_q, mid_g) * dt - dyn.diffusion(mid_g) * dY1;
        for (const double u1 : control_set) {
          const double src_g = mid_g - u1 * dt;
          const double prev = gv.interpolate(src_q, src_g);
          if (std::isinf(prev)) continue;
          const double cand = prev + later + dyn.cost0(src_q, src_g) * dt +
                              u1 * u1 * half_inv_eps * dt +
                              dyn.integrand(src_q, src_g) * dY1;
          if (cand < best) best = cand;
        }
      }
      out.values(i, j) = best;
    }
  }
  return out;
}

double grid_gap(const GridValue& a, const GridValue& b) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
    throw std::invalid_argument("grid_gap: shape mismatch");
  double worst = 0.0;
  for (long i = 0; i < a.values.rows(); ++i)
    for (long j = 0; j < a.values.cols(); ++j) {
      const double x = a.values(i, j), y = b.values(i, j);
      if (std::isinf(x) || std::isinf(y)) continue;
      worst = std::max(worst, std::abs(x - y));
    }
  return worst;
}

double dpp_residual(const GridValue& kappa_t, const GridValue& kappa_r,
                    const TransformedDynamics& dyn, double dY_window, double dt_window,
                    const std::vector<double>& control_set) {
  const GridValue swept = grid_dp_step(kappa_r, dyn, dY_window, dt_window, control_set);
  double worst = 0.0;
  for (long i = 0; i < kappa_t.values.rows(); ++i)
    for (long j = 0; j < kappa_t.values.cols(); ++j) {
      const double a = kappa_t.values(i, j), b = swept.values(i, j);
      if (std::isinf(a) || std::isinf(b)) continue;
      worst = std::max(worst, std::abs(a - b));
    }
  return worst;
}

std::vector<double> make_control_set(long n, double u_max) {
  if (n < 1 || !(u_max >= 0.0)) throw std::invalid_argument("make_control_set: bad args");
  std::vector<double> u(n);
  if (n == 1) {
    u[0] = 0.0;
    return u;
  }
  for (long i = 0; i < n; ++i)
    u[i] = -u_max + 2.0 * u_max * double(i) / double(n - 1);
  return u;
}

PropagateResult propagate(const SampledRoughPath& drive, const TransformedDynamics& dyn,
                          const PropagateOptions& opts) {
  drive.validate();
  if (drive.dim() != 1) throw std::invalid_argument("propagate: scalar drives only");
  const long n = drive.size();
  const auto& spec = dyn.spec();

  PropagateResult res;
  res.times.assign(drive.base.times.data(), drive.base.times.data() + n);
  res.preshift_min.reserve(n);

  if (opts.mode == PropagateMode::lq) {
    QuadraticValue v;  // matches g~: centered at zero with the initial weights
    v.P = Eigen::Vector2d(spec.init_weight_q, spec.init_weight_gamma).asDiagonal();
    double level_acc = 0.0;  // cumulative normalization absorbed by shifting
    res.preshift_min.push_back(v.c);
    if (opts.shift_to_zero) v.c = 0.0;
    res.lq.push_back(v);
    for (long i = 0; i + 1 < n; ++i) {
      const double dt = drive.base.times(i + 1) - drive.base.times(i);
      const double dY = drive.base.increment(i, i + 1)(0);
      v = lq_step(v, dyn, dY, drive.step_areas(i, 0), dt, i);
      res.preshift_min.push_back(level_acc + v.c);
      if (opts.shift_to_zero) {
        level_acc += v.c;
        v.c = 0.0;
      }
      res.lq.push_back(v);
    }
    return res;
  }

  const std::vector<double> controls = make_control_set(opts.n_controls, opts.control_max);
  GridValue gv = GridValue::regular(opts.q_lo, opts.q_hi, opts.nq, opts.g_lo, opts.g_hi,
                                    opts.ng);
  for (long i = 0; i < opts.nq; ++i)
    for (long j = 0; j < opts.ng; ++j)
      gv.values(i, j) = 0.5 * (spec.init_weight_q * gv.q_axis(i) * gv.q_axis(i) +
                               spec.init_weight_gamma * gv.g_axis(j) * gv.g_axis(j));

  double level_acc = 0.0;
  auto record = [&](double t) {
    const double mn = gv.finite_min();
    res.preshift_min.push_back(level_acc + mn);
    if (opts.shift_to_zero && std::isfinite(mn)) {
      level_acc += mn;
      for (long i = 0; i < gv.values.rows(); ++i)
        for (long j = 0; j < gv.values.cols(); ++j)
          if (!std::isinf(gv.values(i, j))) gv.values(i, j) -= mn;
    }
    const auto [ai, aj] = gv.argmin();
    res.argmin_q.push_back(gv.q_axis(ai));
    res.argmin_g.push_back(gv.g_axis(aj));
    for (double ts : opts.snapshot_times)
      if (std::abs(ts - t) < 1e-9) res.snapshots.emplace_back(t, gv);
  };

  record(res.times[0]);
  for (long i = 0; i + 1 < n; ++i) {
    const double dt = drive.base.times(i + 1) - drive.base.times(i);
    const double dY = drive.base.increment(i, i + 1)(0);
    gv = grid_dp_step(gv, dyn, dY, dt, controls);
    record(res.times[i + 1]);
  }
  res.final_grid = std::move(gv);
  return res;
}

}  // namespace roughfilter
