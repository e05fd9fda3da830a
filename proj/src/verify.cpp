#include "roughfilter/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "roughfilter/value.hpp"

namespace roughfilter {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SampledPath random_walk(long n_points, long d, double dt, CounterRng& rng) {
  Eigen::MatrixXd vals(n_points, d);
  vals.row(0).setZero();
  const double sq = std::sqrt(dt);
  for (long i = 1; i < n_points; ++i)
    for (long j = 0; j < d; ++j) vals(i, j) = vals(i - 1, j) + sq * rng.normal();
  return SampledPath::uniform(0.0, dt, std::move(vals));
}

}  // namespace

std::vector<CheckLine> verify_chen(unsigned long long seed) {
  const auto t0 = std::chrono::steady_clock::now();
  CounterRng rng(seed, 41);
  double worst_chen = 0.0, worst_sym = 0.0;

  for (int lift = 0; lift < 50; ++lift) {
    const long d = 1 + (lift & 1);
    SampledRoughPath rp;
    if (lift < 25) {
      rp = canonical_lift(random_walk(1001, d, 1e-3, rng));
    } else {
      rp = stratonovich_lift(random_walk(10001, d, 1e-4, rng), 10);
    }
    const long n = rp.size();
    const double ymax = rp.base.values.array().abs().maxCoeff();
    const double tol = 1e-9 * (1.0 + ymax * ymax);
    for (int trip = 0; trip < 100; ++trip) {
      long a = static_cast<long>(rng.next_u64() % static_cast<unsigned long long>(n));
      long b = static_cast<long>(rng.next_u64() % static_cast<unsigned long long>(n));
      long c = static_cast<long>(rng.next_u64() % static_cast<unsigned long long>(n));
      if (a > b) std::swap(a, b);
      if (b > c) std::swap(b, c);
      if (a > b) std::swap(a, b);
      worst_chen = std::max(
          worst_chen, chen_defect(rp, a, b, c).array().abs().maxCoeff() / tol);
      worst_sym = std::max(
          worst_sym, symmetric_defect(rp, a, c).array().abs().maxCoeff() / tol);
    }
  }

  const double secs = seconds_since(t0);
  return {
      {"chen relation (50 lifts x 100 triples)", worst_chen < 1.0,
       fmt("max defect / tol = %.3g", worst_chen)},
      {"geometric symmetry (same sample)", worst_sym < 1.0,
       fmt("max defect / tol = %.3g", worst_sym)},
      {"chen suite runtime < 10 s", secs < 10.0, fmt("%.2f s", secs)},
  };
}

std::vector<CheckLine> verify_sharpness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CheckLine> lines;
  const double eps = 0.1;

  for (const double p : {2.1, 2.5, 2.9}) {
    double worst_rel = 0.0;
    std::vector<double> logn, logI, ratio;
    for (long k = 0; k <= 10; ++k) {
      const long n = 1L << k;
      const SharpnessFixture fx = sharpness_fixture(n, p, eps);

      double quad = 0.0;  // left-endpoint compensated sum; the companion has
                          // zero derivative so no area correction appears
      for (long i = 0; i + 1 < fx.companion.size(); ++i)
        quad += fx.companion.values(i, 0) * fx.drive.base.increment(i, i + 1)(0);

      worst_rel = std::max(worst_rel,
                           std::abs(quad - fx.expected_integral) /
                               std::abs(fx.expected_integral));
      logn.push_back(std::log(double(n)));
      logI.push_back(std::log(std::abs(quad)));

      const double q_low = (p - 1.0) / 2.0 - 0.1;
      const double span = fx.drive.base.span();
      const double bound = (1.0 + std::pow(span, (p - 1.0) / p) +
                            std::pow(fx.companion_pvar, q_low)) *
                           (fx.drive_pvar + fx.area_pvar);
      ratio.push_back(std::abs(quad) / bound);
    }

    // least squares slope of log I against log n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(logn.size());
    for (size_t i = 0; i < logn.size(); ++i) {
      sx += logn[i];
      sy += logI[i];
      sxx += logn[i] * logn[i];
      sxy += logn[i] * logI[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double target = 1.0 - 1.0 / p - eps;

    bool increasing = true;
    for (size_t i = 1; i < ratio.size(); ++i)
      if (!(ratio[i] > ratio[i - 1])) increasing = false;

    lines.push_back({fmt("quadrature vs closed form (p = %.1f)", p), worst_rel < 1e-10,
                     fmt("max rel err = %.3g", worst_rel)});
    lines.push_back({fmt("growth exponent (p = %.1f)", p), std::abs(slope - target) < 1e-6,
                     fmt("slope %.9f vs %.9f", slope, target)});
    lines.push_back({fmt("bound ratio strictly grows at lowered exponent (p = %.1f)", p),
                     increasing, fmt("first %.3g last %.3g", ratio.front(), ratio.back())});
  }

  const double secs = seconds_since(t0);
  lines.push_back({"sharpness suite runtime < 5 s", secs < 5.0, fmt("%.2f s", secs)});
  return lines;
}

namespace {

// C1 bowl that flattens to a plateau beyond |x| >= 1. The flat collar makes
// the value surface constant near the domain edge, so the missing-corner
// renormalization at the inflow boundary introduces no bias that could leak
// into the evaluation box.
double plateau_bowl(double x) {
  const double a = std::min(std::abs(x), 1.0);
  const double t = 1.0 - a * a;
  return 1.0 - t * t;
}

// Residual of sequential sweeps against the joint two-substep sweep, maxed
// over the run; the mini instance pinned by the acceptance suite.
//
// Both arms consume the same start-of-window surface and apply identical
// per-substep costs, so every time-discretization term cancels and the gap
// isolates the one extra interpolation the sequential form performs at the
// intermediate time. That error is O(h^2 * curvature), hence the refinement
// gate. Two design points keep the measurement clean:
//  - the drive oscillates fast enough that backtracked source points sweep
//    whole cells at both resolutions (otherwise the error envelope is
//    sampled at resolution-dependent fractional offsets and the ratio
//    aliases), yet stays small enough that the numerical boundary layer
//    never reaches the evaluation box;
//  - the residual is evaluated on |q|,|g| <= 0.5 only, away from the inflow
//    boundary where the truncated domain renormalizes missing corners.
double dpp_run_residual(long nq) {
  const ParamChart chart = ParamChart::rate_uncertain(1.0, 1.0);
  PenaltySpec spec;
  spec.tau = 5e-2;
  spec.delta = 5e-2;
  spec.eps = 1.0;
  const TransformedDynamics dyn(chart, spec);
  const std::vector<double> controls = make_control_set(11, 1.0);

  GridValue gv = GridValue::regular(-2.0, 2.0, nq, -2.0, 2.0, nq);
  for (long i = 0; i < nq; ++i)
    for (long j = 0; j < nq; ++j)
      gv.values(i, j) = 0.25 * (plateau_bowl(gv.q_axis(i)) + plateau_bowl(gv.g_axis(j)));

  const double dt = 0.01, T = 0.2, eval_box = 0.5;
  const long steps = std::lround(T / dt);
  auto drive_at = [](double t) { return 0.2 * std::sin(30.0 * t); };

  double worst = 0.0;
  GridValue even = gv;  // state at the last even step
  double dy_prev = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double dy = drive_at(dt * double(k + 1)) - drive_at(dt * double(k));
    gv = grid_dp_step(gv, dyn, dy, dt, controls);
    if (k % 2 == 1) {
      const GridValue joint = grid_dp_step2(even, dyn, dy_prev, dy, dt, controls);
      for (long i = 0; i < nq; ++i)
        for (long j = 0; j < nq; ++j) {
          if (std::abs(gv.q_axis(i)) > eval_box || std::abs(gv.g_axis(j)) > eval_box)
            continue;
          const double a = gv.values(i, j), b = joint.values(i, j);
          if (std::isinf(a) || std::isinf(b)) continue;
          worst = std::max(worst, std::abs(a - b));
        }
      even = gv;
    }
    dy_prev = dy;
  }
  return worst;
}

}  // namespace

std::vector<CheckLine> verify_dpp() {
  const auto t0 = std::chrono::steady_clock::now();
  const double coarse = dpp_run_residual(41);
  const double fine = dpp_run_residual(81);
  const double secs = seconds_since(t0);
  return {
      {"recursive decomposition residual (41 x 41)", coarse < 5e-3,
       fmt("max residual = %.3g", coarse)},
      {"residual at least halves when spacing halves", fine <= 0.5 * coarse,
       fmt("coarse %.3g fine %.3g", coarse, fine)},
      {"dpp suite runtime < 60 s", secs < 60.0, fmt("%.2f s", secs)},
  };
}

std::vector<CheckLine> verify_consistency(unsigned long long seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const ParamChart chart = ParamChart::rate_uncertain(1.0, 1.0);
  const double a = chart.chart_point(0.1);
  const double T = 10.0, dt_fine = 1e-4;
  const long n_fine = std::lround(T / dt_fine);

  CounterRng root(seed, 3);
  CounterRng chain_rng = root.split(1);
  CounterRng obs_rng = root.split(2);

  SampledPath gamma_fine =
      SampledPath::uniform(0.0, dt_fine, Eigen::MatrixXd::Constant(n_fine + 1, 1, a));
  SimplexState pi0;
  pi0.probs = Eigen::Vector2d(0.5, 0.5);
  const ChainPath chain = simulate_chain(chart, gamma_fine, pi0, chain_rng);
  const SampledPath obs = simulate_observation(chain, chart, gamma_fine, obs_rng);

  Eigen::MatrixXd A, h;
  chart.evaluate(Eigen::VectorXd::Constant(1, a), A, h);

  std::vector<double> gaps;
  for (const long factor : {40L, 20L, 10L}) {
    const SampledRoughPath drive = stratonovich_lift(obs, factor);
    SampledPath gamma_c = SampledPath::uniform(0.0, dt_fine * double(factor),
                                               Eigen::MatrixXd::Constant(drive.size(), 1, a));
    const FilterResult davie = filter_rough(chart, gamma_c, pi0, drive);

    SimplexState pi = pi0;
    double gap = 0.0;
    for (long i = 0; i + 1 < drive.size(); ++i) {
      gap = std::max(gap,
                     (davie.sol.states.row(i).transpose() - pi.probs).cwiseAbs().maxCoeff());
      pi = wonham_ito_step(pi, A, h, drive.base.increment(i, i + 1).transpose(),
                           dt_fine * double(factor));
    }
    gap = std::max(gap, (davie.sol.states.bottomRows(1).transpose() - pi.probs)
                            .cwiseAbs()
                            .maxCoeff());
    gaps.push_back(gap);
  }

  const double secs = seconds_since(t0);
  return {
      {"scheme gap decreases with dt", gaps[0] > gaps[1] && gaps[1] > gaps[2],
       fmt("gaps %.4g / %.4g / %.4g", gaps[0], gaps[1], gaps[2])},
      {"scheme gap < 0.02 at dt = 1e-3", gaps[2] < 0.02, fmt("gap = %.4g", gaps[2])},
      {"consistency suite runtime < 30 s", secs < 30.0, fmt("%.2f s", secs)},
  };
}

std::vector<CheckLine> verify_all(unsigned long long seed) {
  std::vector<CheckLine> all;
  for (auto* fn : {+[](unsigned long long s) { return verify_chen(s); },
                   +[](unsigned long long) { return verify_sharpness(); },
                   +[](unsigned long long) { return verify_dpp(); },
                   +[](unsigned long long s) { return verify_consistency(s); }}) {
    auto part = fn(seed);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

bool all_pass(const std::vector<CheckLine>& lines) {
  return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
}

}  // namespace roughfilter
