#include "roughfilter/hmm.hpp"

#include <algorithm>
#include <cmath>

namespace roughfilter {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void SimplexState::validate() const {
  if (probs.size() < 2) throw std::invalid_argument("SimplexState: need >= 2 states");
  if (std::abs(probs.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("SimplexState: does not sum to 1");
  for (long i = 0; i < probs.size(); ++i)
    if (!(probs(i) > 0.0 && probs(i) < 1.0))
      throw std::invalid_argument("SimplexState: component outside (0,1)");
}

SimplexState project_to_simplex(Eigen::VectorXd raw, long* clamp_events) {
  const double s = raw.sum();
  if (!(s > 0.0) || !raw.allFinite())
    throw std::invalid_argument("project_to_simplex: mass not positive");
  raw /= s;
  bool clamped = false;
  for (long i = 0; i < raw.size(); ++i) {
    if (raw(i) < kSimplexClamp) {
      raw(i) = kSimplexClamp;
      clamped = true;
    } else if (raw(i) > 1.0 - kSimplexClamp) {
      raw(i) = 1.0 - kSimplexClamp;
      clamped = true;
    }
  }
  if (clamped) {
    raw /= raw.sum();
    if (clamp_events) ++*clamp_events;
  }
  return SimplexState{std::move(raw)};
}

void ParamChart::evaluate(const Eigen::VectorXd& a, Eigen::MatrixXd& A,
                          Eigen::MatrixXd& h) const {
  if (a.size() != k) throw std::invalid_argument("ParamChart: chart point dimension");
  map(a, A, h);
}

double ParamChart::natural_parameter(double a) const {
  switch (family) {
    case Family::rate_uncertain: return nu * sigmoid(a);
    case Family::observation_uncertain: return nu1 + (nu2 - nu1) * sigmoid(a);
    default: throw std::invalid_argument("ParamChart: no natural parameter for custom chart");
  }
}

double ParamChart::chart_point(double natural) const {
  double u = 0;
  switch (family) {
    case Family::rate_uncertain: u = natural / nu; break;
    case Family::observation_uncertain: u = (natural - nu1) / (nu2 - nu1); break;
    default: throw std::invalid_argument("ParamChart: no natural parameter for custom chart");
  }
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("ParamChart: natural parameter outside admissible interval");
  return std::log(u / (1.0 - u));
}

ParamChart ParamChart::rate_uncertain(double nu, double alpha) {
  if (!(nu > 0.0)) throw std::invalid_argument("rate_uncertain: nu must be positive");
  ParamChart c;
  c.family = Family::rate_uncertain;
  c.m = 2;
  c.d = 1;
  c.k = 1;
  c.nu = nu;
  c.alpha = alpha;
  c.map = [nu, alpha](const Eigen::VectorXd& a, Eigen::MatrixXd& A, Eigen::MatrixXd& h) {
    const double lam = nu * sigmoid(a(0));
    A.resize(2, 2);
    A << -lam, nu - lam, lam, -(nu - lam);
    h.resize(2, 1);
    h << -alpha, alpha;
  };
  c.jacobian = [nu](const Eigen::VectorXd& a, std::vector<Eigen::MatrixXd>& dA,
                    std::vector<Eigen::MatrixXd>& dh) {
    const double s = sigmoid(a(0));
    const double dlam = nu * s * (1.0 - s);
    dA.assign(1, Eigen::MatrixXd(2, 2));
    dA[0] << -dlam, -dlam, dlam, dlam;
    dh.assign(1, Eigen::MatrixXd::Zero(2, 1));
  };
  return c;
}

ParamChart ParamChart::observation_uncertain(double lambda, double mu, double nu1,
                                             double nu2) {
  if (!(lambda > 0.0 && mu > 0.0)) throw std::invalid_argument("observation_uncertain: rates");
  if (!(nu2 > nu1)) throw std::invalid_argument("observation_uncertain: interval empty");
  ParamChart c;
  c.family = Family::observation_uncertain;
  c.m = 2;
  c.d = 1;
  c.k = 1;
  c.lambda = lambda;
  c.mu = mu;
  c.nu1 = nu1;
  c.nu2 = nu2;
  c.map = [lambda, mu, nu1, nu2](const Eigen::VectorXd& a, Eigen::MatrixXd& A,
                                 Eigen::MatrixXd& h) {
    const double al = nu1 + (nu2 - nu1) * sigmoid(a(0));
    A.resize(2, 2);
    A << -lambda, mu, lambda, -mu;
    h.resize(2, 1);
    h << -al, al;
  };
  c.jacobian = [nu1, nu2](const Eigen::VectorXd& a, std::vector<Eigen::MatrixXd>& dA,
                          std::vector<Eigen::MatrixXd>& dh) {
    const double s = sigmoid(a(0));
    const double dal = (nu2 - nu1) * s * (1.0 - s);
    dA.assign(1, Eigen::MatrixXd::Zero(2, 2));
    dh.assign(1, Eigen::MatrixXd(2, 1));
    dh[0] << -dal, dal;
  };
  return c;
}

ParamChart ParamChart::fixed(Eigen::MatrixXd A, Eigen::MatrixXd h) {
  check_rate_matrix(A);
  if (h.rows() != A.rows()) throw std::invalid_argument("fixed chart: h rows");
  ParamChart c;
  c.family = Family::custom;
  c.m = A.rows();
  c.d = h.cols();
  c.k = 1;
  c.map = [A, h](const Eigen::VectorXd&, Eigen::MatrixXd& Ao, Eigen::MatrixXd& ho) {
    Ao = A;
    ho = h;
  };
  c.jacobian = [m = c.m, d = c.d](const Eigen::VectorXd&, std::vector<Eigen::MatrixXd>& dA,
                                  std::vector<Eigen::MatrixXd>& dh) {
    dA.assign(1, Eigen::MatrixXd::Zero(m, m));
    dh.assign(1, Eigen::MatrixXd::Zero(m, d));
  };
  return c;
}

void check_rate_matrix(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("rate matrix: not square");
  for (long j = 0; j < A.cols(); ++j) {
    if (std::abs(A.col(j).sum()) > 1e-10)
      throw std::invalid_argument("rate matrix: column sum not zero");
    for (long i = 0; i < A.rows(); ++i)
      if (i != j && A(i, j) < -1e-14)
        throw std::invalid_argument("rate matrix: negative off-diagonal");
  }
}

int ChainPath::state_at(double t) const {
  int s = initial_state;
  for (std::size_t i = 0; i < jump_times.size() && jump_times[i] <= t; ++i)
    s = post_jump_states[i];
  return s;
}

ChainPath simulate_chain(const ParamChart& chart, const SampledPath& gamma,
                         const SimplexState& pi0, CounterRng& rng) {
  gamma.validate();
  pi0.validate();
  if (pi0.dim() != chart.m) throw std::invalid_argument("simulate_chain: pi0 dimension");

  ChainPath path;
  path.t0 = gamma.times(0);
  path.T = gamma.times(gamma.size() - 1);

  // initial state from pi0
  {
    const double u = rng.uniform();
    double acc = 0.0;
    path.initial_state = chart.m - 1;
    for (int s = 0; s < chart.m; ++s) {
      acc += pi0.probs(s);
      if (u < acc) {
        path.initial_state = s;
        break;
      }
    }
  }

  Eigen::MatrixXd A, h;
  int state = path.initial_state;
  for (long i = 0; i + 1 < gamma.size(); ++i) {
    const double dt = gamma.times(i + 1) - gamma.times(i);
    chart.evaluate(gamma.values.row(i).transpose(), A, h);
    const double exit_rate = -A(state, state);
    if (exit_rate * dt >= 1.0)
      throw std::invalid_argument("simulate_chain: exit rate * dt >= 1");
    if (rng.uniform() < exit_rate * dt) {
      // jump; pick destination proportional to column rates
      double u = rng.uniform() * exit_rate;
      int dest = state;
      for (int s = 0; s < chart.m; ++s) {
        if (s == state) continue;
        u -= A(s, state);
        if (u < 0.0) {
          dest = s;
          break;
        }
        dest = s;  // numerical slack: last candidate absorbs roundoff
      }
      state = dest;
      path.jump_times.push_back(gamma.times(i + 1));
      path.post_jump_states.push_back(state);
    }
  }
  return path;
}

SampledPath simulate_observation(const ChainPath& chain, const ParamChart& chart,
                                 const SampledPath& gamma, CounterRng& rng) {
  gamma.validate();
  const long n = gamma.size();
  Eigen::MatrixXd A, h;
  Eigen::MatrixXd vals(n, chart.d);
  vals.row(0).setZero();
  for (long i = 0; i + 1 < n; ++i) {
    const double dt = gamma.times(i + 1) - gamma.times(i);
    chart.evaluate(gamma.values.row(i).transpose(), A, h);
    const int s = chain.state_at(gamma.times(i));
    const double sq = std::sqrt(dt);
    for (long c = 0; c < chart.d; ++c)
      vals(i + 1, c) = vals(i, c) + h(s, c) * dt + sq * rng.normal();
  }
  SampledPath out;
  out.times = gamma.times;
  out.values = std::move(vals);
  return out;
}

SimplexState wonham_ito_step(const SimplexState& pi, const Eigen::MatrixXd& A,
                             const Eigen::MatrixXd& h, const Eigen::VectorXd& dY,
                             double dt, long* clamp_events) {
  const long m = pi.dim(), d = h.cols();
  Eigen::VectorXd raw = pi.probs + A * pi.probs * dt;
  for (long i = 0; i < d; ++i) {
    const double hbar = h.col(i).dot(pi.probs);
    const Eigen::VectorXd gain =
        h.col(i).cwiseProduct(pi.probs) - hbar * pi.probs;  // (H^i - hbar I) pi
    raw += gain * (dY(i) - hbar * dt);
  }
  for (long i = 0; i < m; ++i)
    if (raw(i) <= -0.1)
      throw std::invalid_argument("wonham_ito_step: gross instability, reduce dt");
  return project_to_simplex(std::move(raw), clamp_events);
}

RdeCoefficients wonham_strat_coeffs(const ParamChart& chart) {
  RdeCoefficients co;
  co.state_dim = chart.m;
  co.drive_dim = chart.d;
  co.param_dim = chart.k;

  co.drift = [chart](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    Eigen::MatrixXd A, h;
    chart.evaluate(g, A, h);
    Eigen::VectorXd out = A * x;
    for (long i = 0; i < h.cols(); ++i) {
      const Eigen::VectorXd hi = h.col(i);
      const double hHpi = hi.cwiseProduct(hi).dot(x);  // (h^i)' H^i pi
      out += 0.5 * (hHpi * x - hi.cwiseProduct(hi).cwiseProduct(x));
    }
    return out;
  };
  co.diffusion = [chart](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    Eigen::MatrixXd A, h;
    chart.evaluate(g, A, h);
    Eigen::MatrixXd out(chart.m, chart.d);
    for (long i = 0; i < h.cols(); ++i) {
      const double hbar = h.col(i).dot(x);
      out.col(i) = h.col(i).cwiseProduct(x) - hbar * x;
    }
    return out;
  };
  co.diffusion_dx = [chart](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    Eigen::MatrixXd A, h;
    chart.evaluate(g, A, h);
    std::vector<Eigen::MatrixXd> out(chart.d);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(chart.m, chart.m);
    for (long i = 0; i < h.cols(); ++i) {
      const double hbar = h.col(i).dot(x);
      // D_pi [(H - hbar I) pi] = H - hbar I - pi h'
      out[i] = Eigen::MatrixXd(h.col(i).asDiagonal()) - hbar * I -
               x * h.col(i).transpose();
    }
    return out;
  };
  return co;
}

FilterResult filter_rough(const ParamChart& chart, const SampledPath& gamma,
                          const SimplexState& pi0, const SampledRoughPath& drive) {
  pi0.validate();
  FilterResult res;
  long streak = 0;
  SolveOptions opts;
  opts.post_step = [&res, &streak](Eigen::VectorXd& x, long) {
    long before = res.clamp_events;
    x = project_to_simplex(std::move(x), &res.clamp_events).probs;
    streak = res.clamp_events > before ? streak + 1 : 0;
    res.max_clamp_streak = std::max(res.max_clamp_streak, streak);
  };
  res.sol = solve_forward(wonham_strat_coeffs(chart), pi0.probs, gamma, drive, opts);
  return res;
}

}  // namespace roughfilter
