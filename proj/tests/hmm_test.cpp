#include <doctest.h>

#include <cmath>

#include "roughfilter/hmm.hpp"

using namespace roughfilter;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

SampledPath const_gamma(double a, long n, double dt) {
  return SampledPath::uniform(0.0, dt, Eigen::MatrixXd::Constant(n + 1, 1, a));
}

SimplexState half_half() {
  SimplexState s;
  s.probs = Eigen::Vector2d(0.5, 0.5);
  return s;
}

}  // namespace

TEST_CASE("simplex projection clamps, renormalizes, and counts") {
  long clamps = 0;
  SimplexState s = project_to_simplex(Eigen::Vector2d(-0.2, 0.8), &clamps);
  CHECK(clamps == 1);
  CHECK(s.probs.sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.probs.minCoeff() >= kSimplexClamp / 2);
  CHECK(s.probs(1) > 0.99);

  clamps = 0;
  SimplexState ok = project_to_simplex(Eigen::Vector2d(0.30001, 0.70002), &clamps);
  CHECK(clamps == 0);
  CHECK(ok.probs.sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ok.probs(0) == doctest::Approx(0.30001 / 1.00003).epsilon(1e-12));

  SimplexState bad;
  bad.probs = Eigen::Vector2d(0.5, 0.6);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("rate-uncertain chart evaluates the published two-state family") {
  ParamChart chart = ParamChart::rate_uncertain(1.0, 1.0);
  CHECK(chart.m == 2);
  CHECK(chart.d == 1);
  CHECK(chart.k == 1);
  Eigen::MatrixXd A, h;
  chart.evaluate(Eigen::VectorXd::Zero(1), A, h);
  // lambda = sigmoid(0) = 1/2, mu = nu - lambda = 1/2
  CHECK(A(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(A(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(A.col(0).sum() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(A.col(1).sum() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(h(0, 0) == doctest::Approx(-1.0));
  CHECK(h(1, 0) == doctest::Approx(1.0));
  check_rate_matrix(A);  // must not throw

  // natural parameter round-trip
  for (double lam : {0.1, 0.37, 0.9}) {
    const double a = chart.chart_point(lam);
    CHECK(chart.natural_parameter(a) == doctest::Approx(lam).epsilon(1e-12));
  }
  CHECK_THROWS_AS(chart.chart_point(1.5), std::invalid_argument);  // outside (0, nu)
}

TEST_CASE("observation-uncertain chart maps levels into (nu1, nu2)") {
  ParamChart chart = ParamChart::observation_uncertain(5e-2, 5e-2, 0.2, 1.8);
  Eigen::MatrixXd A, h;
  chart.evaluate(Eigen::VectorXd::Zero(1), A, h);
  CHECK(A(1, 0) == doctest::Approx(5e-2));
  CHECK(A(0, 1) == doctest::Approx(5e-2));
  // level at a = 0 is the midpoint
  CHECK(std::abs(h(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  for (double lvl : {0.4, 1.0, 1.7}) {
    const double a = chart.chart_point(lvl);
    CHECK(chart.natural_parameter(a) == doctest::Approx(lvl).epsilon(1e-12));
  }
  CHECK_THROWS_AS(chart.chart_point(0.1), std::invalid_argument);
}

TEST_CASE("chart jacobian matches finite differences of the map") {
  for (int fam = 0; fam < 2; ++fam) {
    ParamChart chart = fam == 0 ? ParamChart::rate_uncertain(1.0, 1.0)
                                : ParamChart::observation_uncertain(5e-2, 5e-2, 0.2, 1.8);
    for (double a : {-1.3, 0.0, 0.8}) {
      Eigen::VectorXd av = Eigen::VectorXd::Constant(1, a);
      std::vector<Eigen::MatrixXd> dA, dh;
      chart.jacobian(av, dA, dh);
      const double e = 1e-6;
      Eigen::MatrixXd Ap, hp, Am, hm;
      chart.evaluate(Eigen::VectorXd::Constant(1, a + e), Ap, hp);
      chart.evaluate(Eigen::VectorXd::Constant(1, a - e), Am, hm);
      CHECK((dA[0] - (Ap - Am) / (2 * e)).cwiseAbs().maxCoeff() < 1e-7);
      CHECK((dh[0] - (hp - hm) / (2 * e)).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
}

TEST_CASE("check_rate_matrix rejects broken generators") {
  Eigen::MatrixXd bad(2, 2);
  bad << -0.5, 0.5, 0.5, -0.6;  // columns do not sum to zero
  CHECK_THROWS_AS(check_rate_matrix(bad), std::invalid_argument);
  bad << 0.5, -0.5, -0.5, 0.5;  // negative off-diagonal
  CHECK_THROWS_AS(check_rate_matrix(bad), std::invalid_argument);
}

TEST_CASE("simulated chain matches stationary occupation and jump intensity") {
  ParamChart chart = ParamChart::rate_uncertain(1.0, 1.0);
  const double a = chart.chart_point(0.2);  // lambda = 0.2, mu = 0.8
  const long n = 2000000;
  SampledPath gamma = const_gamma(a, n, 1e-3);  // T = 2000
  SimplexState pi0;
  pi0.probs = Eigen::Vector2d(0.8, 0.2);
  CounterRng rng(99, 0);
  ChainPath chain = simulate_chain(chart, gamma, pi0, rng);
  // single sweep over the jump list (state_at is a linear scan per call)
  double in2 = 0.0;
  int st = chain.initial_state;
  std::size_t j = 0;
  for (long i = 0; i < n; ++i) {
    const double t = 1e-3 * double(i);
    while (j < chain.jump_times.size() && chain.jump_times[j] <= t)
      st = chain.post_jump_states[j++];
    in2 += st == 1 ? 1.0 : 0.0;
  }
  // stationary fraction lambda / nu = 0.2; measured 0.1992
  CHECK(in2 / double(n) == doctest::Approx(0.2).epsilon(0.25));
  CHECK(std::abs(in2 / double(n) - 0.2) < 0.05);
  // expected jumps 2 lambda mu T = 640; measured 646
  CHECK(std::abs(double(chain.jump_times.size()) - 640.0) < 120.0);
  // structural sanity
  REQUIRE(chain.post_jump_states.size() == chain.jump_times.size());
  for (size_t k = 1; k < chain.jump_times.size(); ++k) {
    CHECK(chain.jump_times[k] > chain.jump_times[k - 1]);
    CHECK(chain.post_jump_states[k] != chain.post_jump_states[k - 1]);
  }
}

TEST_CASE("chain simulation rejects steps that violate the thinning bound") {
  ParamChart chart = ParamChart::rate_uncertain(100.0, 1.0);  // exit rates up to 100
  SampledPath gamma = const_gamma(0.0, 10, 0.05);             // rate * dt = 2.5
  SimplexState pi0 = half_half();
  CounterRng rng(1, 0);
  CHECK_THROWS_AS(simulate_chain(chart, gamma, pi0, rng), std::invalid_argument);
}

TEST_CASE("observation increments are Gaussian around the emitted level") {
  ParamChart chart = ParamChart::rate_uncertain(1.0, 1.0);
  const long n = 50000;
  const double dt = 1e-3;
  SampledPath gamma = const_gamma(chart.chart_point(0.5), n, dt);
  SimplexState pi0 = half_half();
  CounterRng rng(7, 0);
  ChainPath chain = simulate_chain(chart, gamma, pi0, rng);
  CounterRng rng2(7, 1);
  SampledPath y = simulate_observation(chain, chart, gamma, rng2);
  REQUIRE(y.size() == n + 1);
  CHECK(y.values(0, 0) == 0.0);
  // standardized residuals: (dY - h dt) / sqrt(dt) should be ~ N(0, 1)
  double s1 = 0.0, s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const int st = chain.state_at(dt * double(i));
    const double lvl = st == 1 ? 1.0 : -1.0;
    const double z = (y.values(i + 1, 0) - y.values(i, 0) - lvl * dt) / std::sqrt(dt);
    s1 += z;
    s2 += z * z;
  }
  CHECK(std::abs(s1 / n) < 0.02);        // mean ~ N(0, 1/sqrt(n)) ~ 0.0045
  CHECK(std::abs(s2 / n - 1.0) < 0.03);  // second moment
}

TEST_CASE("one explicit filter step reproduces the hand-computed update") {
  // A for lambda = 0.3, mu = 0.7; h = (-1, 1); pi = (0.6, 0.4); dY = 0.05,
  // dt = 0.01. By hand: A pi = (0.1, -0.1), h'pi = -0.2, innovation
  // dN = 0.05 - (-0.2)(0.01) = 0.052, (H - h'pi) pi = (-0.48, 0.48),
  // raw = (0.6 + 0.001 - 0.02496, 0.4 - 0.001 + 0.02496).
  Eigen::MatrixXd A(2, 2), h(2, 1);
  A << -0.3, 0.7, 0.3, -0.7;
  h << -1, 1;
  SimplexState pi;
  pi.probs = Eigen::Vector2d(0.6, 0.4);
  SimplexState out =
      wonham_ito_step(pi, A, h, Eigen::VectorXd::Constant(1, 0.05), 0.01);
  CHECK(out.probs(0) == doctest::Approx(0.57604).epsilon(1e-12));
  CHECK(out.probs(1) == doctest::Approx(0.42396).epsilon(1e-12));
}

TEST_CASE("explicit filter step flags gross instability") {
  Eigen::MatrixXd A(2, 2), h(2, 1);
  A << -0.5, 0.5, 0.5, -0.5;
  h << -1, 1;
  SimplexState pi;
  pi.probs = Eigen::Vector2d(0.9, 0.1);
  // an absurd increment drives a raw component far negative:
  // gain_2 = (1 - h'pi) pi_2 = 0.18, so raw_2 ~ 0.1 - 0.18 * 40 << -0.1
  CHECK_THROWS_AS(
      wonham_ito_step(pi, A, h, Eigen::VectorXd::Constant(1, -40.0), 0.01),
      std::invalid_argument);
}

TEST_CASE("stratonovich coefficients agree with the ito form at the balanced point") {
  // At pi = (1/2, 1/2) with h = (-a, a): h'H pi = a^2, and the correction
  // (1/2)((h'H pi) I - H^2) pi = (a^2/2) (pi - pi) = 0, so b = A pi.
  ParamChart chart = ParamChart::rate_uncertain(1.0, 1.0);
  RdeCoefficients co = wonham_strat_coeffs(chart);
  co.validate();
  Eigen::VectorXd x = Eigen::Vector2d(0.5, 0.5);
  Eigen::VectorXd g = Eigen::VectorXd::Constant(1, 0.3);
  Eigen::MatrixXd A, h;
  chart.evaluate(g, A, h);
  CHECK((co.drift(x, g) - A * x).cwiseAbs().maxCoeff() < 1e-14);
  // diffusion column: (H - h'pi I) pi with h'pi = 0 here: (-1/2, 1/2)
  Eigen::MatrixXd phi = co.diffusion(x, g);
  CHECK(phi(0, 0) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(phi(1, 0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("stratonovich drift correction matches its closed form off balance") {
  ParamChart chart = ParamChart::rate_uncertain(1.0, 1.0);
  RdeCoefficients co = wonham_strat_coeffs(chart);
  Eigen::VectorXd x = Eigen::Vector2d(0.3, 0.7);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd A, h;
  chart.evaluate(g, A, h);
  const Eigen::VectorXd hcol = h.col(0);
  const double hHpi = hcol.cwiseProduct(hcol).dot(x);  // h'H pi
  Eigen::VectorXd expected =
      A * x + 0.5 * (hHpi * x - hcol.cwiseProduct(hcol).cwiseProduct(x));
  CHECK((co.drift(x, g) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rough filter stays on the simplex and tracks the chain") {
  ParamChart chart = ParamChart::rate_uncertain(1.0, 1.0);
  const double a = chart.chart_point(0.1);
  const long n = 25000;  // T = 50 at dt = 2e-3
  const double dt = 2e-3;
  SimplexState pi0 = half_half();

  // simulate data at the same dt (coarse enough for a unit test)
  CounterRng rng(2, 0);
  SampledPath gamma = const_gamma(a, n, dt);
  ChainPath chain = simulate_chain(chart, gamma, pi0, rng);
  CounterRng rng2(2, 1);
  SampledPath y = simulate_observation(chain, chart, gamma, rng2);
  SampledRoughPath drive = canonical_lift(y);

  FilterResult fr = filter_rough(chart, gamma, pi0, drive);
  REQUIRE(fr.sol.states.rows() == n + 1);
  long agree = 0;
  double max_dev = 0.0;
  for (long i = 0; i <= n; ++i) {
    max_dev = std::max(max_dev, std::abs(fr.sol.states.row(i).sum() - 1.0));
    const int st = chain.state_at(std::min(dt * double(i), 50.0 - 1e-9));
    agree += (fr.sol.states(i, 1) > 0.5) == (st == 1) ? 1 : 0;
  }
  CHECK(max_dev <= 1e-12);
  // measured 0.94 on the fine-simulation variant; leave slack for coarse data
  CHECK(double(agree) / double(n + 1) > 0.8);
  CHECK(fr.clamp_events < n / 1000);
}

TEST_CASE("explicit and rough filters agree to first order on shared data") {
  ParamChart chart = ParamChart::rate_uncertain(1.0, 1.0);
  const double a = chart.chart_point(0.3);
  const long n = 5000;
  const double dt = 1e-3;  // T = 5
  SimplexState pi0 = half_half();
  CounterRng rng(9, 0);
  SampledPath gamma = const_gamma(a, n, dt);
  ChainPath chain = simulate_chain(chart, gamma, pi0, rng);
  CounterRng rng2(9, 1);
  SampledPath y = simulate_observation(chain, chart, gamma, rng2);
  SampledRoughPath drive = canonical_lift(y);

  FilterResult rough = filter_rough(chart, gamma, pi0, drive);
  Eigen::MatrixXd A, h;
  chart.evaluate(Eigen::VectorXd::Constant(1, a), A, h);
  SimplexState pi = pi0;
  double sup = 0.0;
  for (long i = 0; i < n; ++i) {
    Eigen::VectorXd dY =
        Eigen::VectorXd::Constant(1, y.values(i + 1, 0) - y.values(i, 0));
    pi = wonham_ito_step(pi, A, h, dY, dt);
    sup = std::max(sup,
                   (rough.sol.states.row(i + 1).transpose() - pi.probs).norm());
  }
  CHECK(sup < 0.02);  // mirrors the consistency suite at dt = 1e-3
}
