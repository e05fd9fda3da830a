#include <doctest.h>

#include <cmath>

#include "roughfilter/rde.hpp"
#include "roughfilter/rng.hpp"

using namespace roughfilter;

namespace {

// dX = X dY with optional integrand psi(x) = x.
RdeCoefficients scalar_linear() {
  RdeCoefficients co;
  co.state_dim = 1;
  co.drive_dim = 1;
  co.param_dim = 1;
  co.integrand_dim = 1;
  co.drift = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(1);
  };
  co.diffusion = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Constant(1, 1, x(0));
  };
  co.diffusion_dx = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Identity(1, 1)};
  };
  co.integrand = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Constant(1, 1, x(0));
  };
  co.integrand_dx = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Identity(1, 1)};
  };
  return co;
}

SampledRoughPath line_drive(long n, double T) {
  Eigen::MatrixXd vals(n + 1, 1);
  for (long i = 0; i <= n; ++i) vals(i, 0) = T * double(i) / double(n);
  return canonical_lift(SampledPath::uniform(0.0, T / double(n), vals));
}

SampledPath zero_gamma(const SampledRoughPath& drive) {
  return SampledPath::uniform(drive.base.times(0),
                              drive.base.times(1) - drive.base.times(0),
                              Eigen::MatrixXd::Zero(drive.size(), 1));
}

}  // namespace

TEST_CASE("scalar linear equation converges to the exponential at second order") {
  RdeCoefficients co = scalar_linear();
  double prev = 0.0;
  for (long n : {8L, 16L, 32L}) {
    SampledRoughPath drive = line_drive(n, 1.0);
    ControlledSolution sol =
        solve_forward(co, Eigen::VectorXd::Ones(1), zero_gamma(drive), drive);
    const double err = std::abs(sol.states(n, 0) - std::exp(1.0));
    if (prev > 0.0) CHECK(prev / err > 3.0);  // measured 3.8-3.9
    prev = err;
    // compensated integral of X against Y: exp(1) - 1
    CHECK(std::abs(sol.integrals(n, 0) - (std::exp(1.0) - 1.0)) < 7e-3);
  }
  CHECK(prev < 5e-4);  // measured 4.3e-4 at n = 32
}

TEST_CASE("planar rotation driven by a line lands on the rotated vector") {
  RdeCoefficients co;
  co.state_dim = 2;
  co.drive_dim = 1;
  co.param_dim = 1;
  Eigen::Matrix2d J;
  J << 0, -1, 1, 0;
  co.drift = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(2);
  };
  co.diffusion = [J](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::MatrixXd(J * x);
  };
  co.diffusion_dx = [J](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>{J};
  };
  const long n = 64;
  SampledRoughPath drive = line_drive(n, M_PI / 2.0);
  ControlledSolution sol =
      solve_forward(co, Eigen::Vector2d(1, 0), zero_gamma(drive), drive);
  CHECK(std::abs(sol.states(n, 0)) < 1e-3);
  CHECK(std::abs(sol.states(n, 1) - 1.0) < 1e-3);
  // rotations preserve the norm; the second-order scheme should too, closely
  for (long i = 0; i <= n; ++i)
    CHECK(std::abs(sol.states.row(i).norm() - 1.0) < 1e-3);
}

TEST_CASE("backward solve inverts the forward solve") {
  RdeCoefficients co = scalar_linear();
  co.integrand_dim = 0;
  co.integrand = nullptr;
  co.integrand_dx = nullptr;
  // noisy drive, not just a line; the inversion error is the scheme's
  // truncation order, so it must shrink fast as the increments shrink
  auto round_trip_error = [&](double scale) {
    CounterRng rng(17, 0);
    const long n = 200;
    Eigen::MatrixXd vals(n + 1, 1);
    vals(0, 0) = 0.0;
    for (long i = 0; i < n; ++i) vals(i + 1, 0) = vals(i, 0) + scale * rng.normal();
    SampledRoughPath drive = canonical_lift(SampledPath::uniform(0.0, 1.0 / n, vals));
    SampledPath gamma = zero_gamma(drive);
    ControlledSolution fwd = solve_forward(co, Eigen::VectorXd::Ones(1), gamma, drive);
    ControlledSolution back =
        solve_backward(co, fwd.states.row(n).transpose(), gamma, drive);
    REQUIRE(back.states.rows() == n + 1);
    CHECK(back.states(n, 0) == doctest::Approx(fwd.states(n, 0)).epsilon(1e-12));
    return (back.states - fwd.states).cwiseAbs().maxCoeff();
  };
  const double coarse = round_trip_error(0.05);
  const double fine = round_trip_error(0.025);
  CHECK(coarse < 5e-3);
  CHECK(fine < coarse / 3.0);
}

TEST_CASE("quadratic vector field past its blow-up time raises SolveDiverged") {
  RdeCoefficients co;
  co.state_dim = 1;
  co.drive_dim = 1;
  co.param_dim = 1;
  co.drift = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(1);
  };
  co.diffusion = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Constant(1, 1, x(0) * x(0));
  };
  co.diffusion_dx = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Constant(1, 1, 2.0 * x(0))};
  };
  // dX = X^2 dY, Y = t, X0 = 1 blows up at t = 1
  SampledRoughPath drive = line_drive(4000, 1.2);
  CHECK_THROWS_AS(
      solve_forward(co, Eigen::VectorXd::Ones(1), zero_gamma(drive), drive),
      SolveDiverged);
  // short of the blow-up it solves fine: X(0.5) = 2
  SampledRoughPath safe = line_drive(2000, 0.5);
  ControlledSolution sol =
      solve_forward(co, Eigen::VectorXd::Ones(1), zero_gamma(safe), safe);
  CHECK(std::abs(sol.states(2000, 0) - 2.0) < 1e-3);
}

TEST_CASE("post_step hook is applied to every fresh state") {
  RdeCoefficients co = scalar_linear();
  co.integrand_dim = 0;
  co.integrand = nullptr;
  co.integrand_dx = nullptr;
  SampledRoughPath drive = line_drive(10, 1.0);
  SolveOptions opts;
  long calls = 0;
  opts.post_step = [&calls](Eigen::VectorXd& x, long) {
    x(0) = std::min(x(0), 1.5);
    ++calls;
  };
  ControlledSolution sol =
      solve_forward(co, Eigen::VectorXd::Ones(1), zero_gamma(drive), drive, opts);
  CHECK(calls == 10);
  CHECK(sol.states.col(0).maxCoeff() <= 1.5 + 1e-12);
}

TEST_CASE("stability report wiring: ratio is lhs over rhs and zero drive short-circuits") {
  RdeCoefficients co = scalar_linear();
  SampledRoughPath drive = line_drive(50, 1.0);
  SampledPath gamma = zero_gamma(drive);
  ControlledSolution sol = solve_forward(co, Eigen::VectorXd::Ones(1), gamma, drive);
  StabilityReport rep = stability_check(sol, drive, gamma, 2.5);
  CHECK(rep.lhs > 0.0);
  CHECK(rep.rhs > 0.0);
  CHECK(rep.ratio == doctest::Approx(rep.lhs / rep.rhs).epsilon(1e-12));

  SampledRoughPath zero = canonical_lift(
      SampledPath::uniform(0.0, 0.1, Eigen::MatrixXd::Zero(11, 1)));
  ControlledSolution zsol = solve_forward(co, Eigen::VectorXd::Ones(1),
                                          zero_gamma(zero), zero);
  StabilityReport zrep = stability_check(zsol, zero, zero_gamma(zero), 2.5);
  CHECK(zrep.ratio == 0.0);
}

TEST_CASE("coefficient validation rejects inconsistent dimension declarations") {
  RdeCoefficients co = scalar_linear();
  co.state_dim = 0;
  CHECK_THROWS_AS(co.validate(), std::invalid_argument);
  co = scalar_linear();
  co.diffusion = nullptr;
  CHECK_THROWS_AS(co.validate(), std::invalid_argument);
  co = scalar_linear();
  co.integrand_dim = 1;
  co.integrand = nullptr;
  CHECK_THROWS_AS(co.validate(), std::invalid_argument);
}
