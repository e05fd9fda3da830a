#include "roughfilter/rde.hpp"

#include <cmath>

namespace roughfilter {

void RdeCoefficients::validate() const {
  if (state_dim < 1 || drive_dim < 1 || param_dim < 1)
    throw std::invalid_argument("RdeCoefficients: dimensions must be positive");
  if (!drift || !diffusion || !diffusion_dx)
    throw std::invalid_argument("RdeCoefficients: drift/diffusion callbacks required");
  if (integrand_dim > 0 && (!integrand || !integrand_dx))
    throw std::invalid_argument("RdeCoefficients: integrand callbacks required");
}

namespace {

void check_grids(const RdeCoefficients& c, const SampledPath& gamma,
                 const SampledRoughPath& drive) {
  drive.validate();
  gamma.validate();
  if (gamma.size() != drive.size())
    throw std::invalid_argument("rde: gamma and drive grids differ");
  if (gamma.dim() != c.param_dim)
    throw std::invalid_argument("rde: gamma dimension mismatch");
  if (drive.dim() != c.drive_dim)
    throw std::invalid_argument("rde: drive dimension mismatch");
}

// sum_{j,l} J_j * col_l(phi) * A(l, j) for a stack of per-column Jacobians.
Eigen::VectorXd contract(const std::vector<Eigen::MatrixXd>& jac, const Eigen::MatrixXd& phi,
                         const Eigen::MatrixXd& area) {
  const long d = phi.cols();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(jac[0].rows());
  for (long j = 0; j < d; ++j)
    for (long l = 0; l < d; ++l) {
      const double w = area(l, j);
      if (w != 0.0) out += jac[j] * phi.col(l) * w;
    }
  return out;
}

}  // namespace

ControlledSolution solve_forward(const RdeCoefficients& coeffs, const Eigen::VectorXd& x0,
                                 const SampledPath& gamma, const SampledRoughPath& drive,
                                 const SolveOptions& opts) {
  coeffs.validate();
  check_grids(coeffs, gamma, drive);
  if (x0.size() != coeffs.state_dim)
    throw std::invalid_argument("rde: initial state dimension mismatch");

  const long n = drive.size();
  const long m = coeffs.state_dim;
  const long l = coeffs.integrand_dim;
  const long d = coeffs.drive_dim;

  ControlledSolution sol;
  sol.times = drive.base.times;
  sol.states.resize(n, m);
  sol.gubinelli.assign(n, Eigen::MatrixXd::Zero(m, d));
  if (l > 0) sol.integrals = Eigen::MatrixXd::Zero(n, l);

  Eigen::VectorXd x = x0;
  sol.states.row(0) = x.transpose();
  sol.gubinelli[0] = coeffs.diffusion(x, gamma.values.row(0).transpose());

  for (long i = 0; i + 1 < n; ++i) {
    const Eigen::VectorXd g = gamma.values.row(i).transpose();
    const double dt = drive.base.times(i + 1) - drive.base.times(i);
    const Eigen::VectorXd dy = drive.base.increment(i, i + 1).transpose();
    const Eigen::MatrixXd a = drive.step_area(i);

    const Eigen::MatrixXd phi = coeffs.diffusion(x, g);
    const std::vector<Eigen::MatrixXd> dphi = coeffs.diffusion_dx(x, g);

    if (l > 0) {
      const Eigen::MatrixXd psi = coeffs.integrand(x, g);
      const std::vector<Eigen::MatrixXd> dpsi = coeffs.integrand_dx(x, g);
      sol.integrals.row(i + 1) =
          sol.integrals.row(i) + (psi * dy + contract(dpsi, phi, a)).transpose();
    }

    x += coeffs.drift(x, g) * dt + phi * dy + contract(dphi, phi, a);

    if (!x.allFinite() || x.norm() > opts.divergence_norm) throw SolveDiverged(i);
    if (opts.post_step) opts.post_step(x, i);

    sol.states.row(i + 1) = x.transpose();
    sol.gubinelli[i + 1] = coeffs.diffusion(x, gamma.values.row(i + 1).transpose());
  }
  return sol;
}

ControlledSolution solve_backward(const RdeCoefficients& coeffs,
                                  const Eigen::VectorXd& x_terminal,
                                  const SampledPath& gamma, const SampledRoughPath& drive,
                                  const SolveOptions& opts) {
  coeffs.validate();
  check_grids(coeffs, gamma, drive);

  RdeCoefficients rev = coeffs;
  rev.integrand_dim = 0;
  rev.integrand = nullptr;
  rev.integrand_dx = nullptr;
  rev.drift = [&coeffs](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    return (-coeffs.drift(x, g)).eval();
  };

  const SampledRoughPath rdrive = time_reverse(drive);
  SampledPath rgamma;
  rgamma.times = rdrive.base.times;
  rgamma.values = gamma.values.colwise().reverse();

  ControlledSolution back = solve_forward(rev, x_terminal, rgamma, rdrive, opts);

  ControlledSolution sol;
  sol.times = drive.base.times;
  sol.states = back.states.colwise().reverse();
  sol.gubinelli.assign(back.gubinelli.rbegin(), back.gubinelli.rend());
  return sol;
}

StabilityReport stability_check(const ControlledSolution& sol, const SampledRoughPath& drive,
                                const SampledPath& gamma, double p, double C,
                                double q_exponent) {
  if (sol.integrals.size() == 0)
    throw std::invalid_argument("stability_check: solution has no integral track");
  const double q = q_exponent < 0.0 ? (p - 1.0) / 2.0 : q_exponent;

  SampledPath integral_path;
  integral_path.times = sol.times;
  integral_path.values = sol.integrals;

  StabilityReport rep;
  rep.lhs = p_variation(integral_path, p).value;
  const double drive_norm =
      p_variation(drive.base, p).value + area_p_variation(drive, p / 2.0).value;
  const double gamma_norm = p_variation(gamma, p / 2.0).value;
  const double T = drive.base.span();
  rep.rhs = C * (1.0 + std::pow(T, (p - 1.0) / p) + std::pow(gamma_norm, q)) * drive_norm;
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

}  // namespace roughfilter
