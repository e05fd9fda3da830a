#include "roughfilter/rough_path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roughfilter {

namespace {

Eigen::MatrixXd as_matrix(const Eigen::MatrixXd& flat, long row, long d) {
  // flat is column-major, so a row is not contiguous; copy elementwise.
  Eigen::MatrixXd m(d, d);
  for (long a = 0; a < d; ++a)
    for (long b = 0; b < d; ++b) m(a, b) = flat(row, a * d + b);
  return m;
}

void flatten_into(Eigen::MatrixXd& flat, long row, const Eigen::MatrixXd& m) {
  const long d = m.rows();
  for (long a = 0; a < d; ++a)
    for (long b = 0; b < d; ++b) flat(row, a * d + b) = m(a, b);
}

}  // namespace

SampledPath SampledPath::uniform(double t0, double dt, Eigen::MatrixXd vals) {
  SampledPath p;
  p.times = Eigen::VectorXd::LinSpaced(vals.rows(), t0, t0 + dt * double(vals.rows() - 1));
  p.values = std::move(vals);
  p.validate();
  return p;
}

void SampledPath::validate() const {
  if (times.size() < 1) throw std::invalid_argument("SampledPath: empty grid");
  if (values.rows() != times.size())
    throw std::invalid_argument("SampledPath: times/values row mismatch");
  if (values.cols() < 1) throw std::invalid_argument("SampledPath: dimension < 1");
  for (long i = 0; i + 1 < times.size(); ++i)
    if (!(times(i) < times(i + 1)))
      throw std::invalid_argument("SampledPath: times not strictly increasing");
  if (!times.allFinite() || !values.allFinite())
    throw std::invalid_argument("SampledPath: non-finite entry");
}

Eigen::MatrixXd SampledRoughPath::step_area(long i) const {
  return as_matrix(step_areas, i, dim());
}

Eigen::MatrixXd SampledRoughPath::area(long i, long j) const {
  const long d = dim();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  Eigen::RowVectorXd run = Eigen::RowVectorXd::Zero(d);  // Y(i, l)
  for (long l = i; l < j; ++l) {
    const Eigen::RowVectorXd dv = base.increment(l, l + 1);
    acc += as_matrix(step_areas, l, d);
    acc += run.transpose() * dv;
    run += dv;
  }
  return acc;
}

void SampledRoughPath::validate() const {
  base.validate();
  const long d = dim();
  if (step_areas.rows() != base.steps() || step_areas.cols() != d * d)
    throw std::invalid_argument("SampledRoughPath: area block shape mismatch");
  if (!step_areas.allFinite())
    throw std::invalid_argument("SampledRoughPath: non-finite area");
}

SampledRoughPath canonical_lift(const SampledPath& path) {
  path.validate();
  const long d = path.dim();
  SampledRoughPath rp;
  rp.base = path;
  rp.step_areas.resize(path.steps(), d * d);
  for (long i = 0; i < path.steps(); ++i) {
    const Eigen::RowVectorXd v = path.increment(i, i + 1);
    flatten_into(rp.step_areas, i, 0.5 * v.transpose() * v);
  }
  return rp;
}

SampledRoughPath stratonovich_lift(const SampledPath& fine, long coarse_factor) {
  fine.validate();
  if (coarse_factor < 1) throw std::invalid_argument("stratonovich_lift: factor < 1");
  if (fine.steps() % coarse_factor != 0)
    throw std::invalid_argument("stratonovich_lift: grid not divisible by factor");
  const long d = fine.dim();
  const long n_coarse = fine.steps() / coarse_factor;

  SampledRoughPath rp;
  rp.base.times.resize(n_coarse + 1);
  rp.base.values.resize(n_coarse + 1, d);
  rp.step_areas.resize(n_coarse, d * d);
  for (long i = 0; i <= n_coarse; ++i) {
    rp.base.times(i) = fine.times(i * coarse_factor);
    rp.base.values.row(i) = fine.values.row(i * coarse_factor);
  }
  for (long i = 0; i < n_coarse; ++i) {
    const long lo = i * coarse_factor;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (long j = lo; j < lo + coarse_factor; ++j) {
      // midpoint sum: (Y(mid of step j) - Y(lo)) (x) dY_j
      const Eigen::RowVectorXd mid =
          0.5 * (fine.values.row(j) + fine.values.row(j + 1)) - fine.values.row(lo);
      const Eigen::RowVectorXd dv = fine.increment(j, j + 1);
      acc += mid.transpose() * dv;
    }
    flatten_into(rp.step_areas, i, acc);
  }
  return rp;
}

SampledRoughPath time_reverse(const SampledRoughPath& rp) {
  rp.validate();
  const long n = rp.size();
  const long d = rp.dim();
  const double t_lo = rp.base.times(0), t_hi = rp.base.times(n - 1);

  SampledRoughPath out;
  out.base.times.resize(n);
  out.base.values.resize(n, d);
  out.step_areas.resize(n - 1, d * d);
  for (long i = 0; i < n; ++i) {
    out.base.times(i) = t_lo + t_hi - rp.base.times(n - 1 - i);
    out.base.values.row(i) = rp.base.values.row(n - 1 - i);
  }
  for (long i = 0; i + 1 < n; ++i) {
    const long j = n - 2 - i;  // original step index
    const Eigen::RowVectorXd v = rp.base.increment(j, j + 1);
    const Eigen::MatrixXd a = as_matrix(rp.step_areas, j, d);
    flatten_into(out.step_areas, i, (-a + v.transpose() * v).eval());
  }
  return out;
}

Eigen::MatrixXd chen_defect_of(const Eigen::MatrixXd& a_st, const Eigen::MatrixXd& a_sr,
                               const Eigen::MatrixXd& a_rt, const Eigen::RowVectorXd& y_sr,
                               const Eigen::RowVectorXd& y_rt) {
  return a_st - a_sr - a_rt - y_sr.transpose() * y_rt;
}

Eigen::MatrixXd chen_defect(const SampledRoughPath& rp, long i, long j, long k) {
  if (!(0 <= i && i <= j && j <= k && k < rp.size()))
    throw std::invalid_argument("chen_defect: bad triple");
  return chen_defect_of(rp.area(i, k), rp.area(i, j), rp.area(j, k),
                        rp.base.increment(i, j), rp.base.increment(j, k));
}

Eigen::MatrixXd symmetric_defect(const SampledRoughPath& rp, long i, long j) {
  const Eigen::MatrixXd a = rp.area(i, j);
  const Eigen::RowVectorXd v = rp.base.increment(i, j);
  return 0.5 * (a + a.transpose()) - 0.5 * v.transpose() * v;
}

namespace {

// Shared dynamic program: given |X(i,j)|^p for all lo <= i < j <= hi served
// by a rolling provider, maximize the partition sum. best[j] over grid point
// j is the optimal sum for [lo, j]; a partition never gains by skipping the
// right endpoint, so best[hi] is the supremum.
struct PVarDp {
  long lo, hi;
  std::vector<double> best;
  std::vector<long> prev;

  explicit PVarDp(long lo_, long hi_) : lo(lo_), hi(hi_) {
    best.assign(hi - lo + 1, 0.0);
    prev.assign(hi - lo + 1, -1);
  }

  // feed |X(i,j)|^p for fixed j, all i in [lo, j)
  void offer(long i, long j, double powed) {
    const double cand = best[i - lo] + powed;
    if (cand > best[j - lo]) {
      best[j - lo] = cand;
      prev[j - lo] = i;
    }
  }

  PVarResult finish(double p) const {
    PVarResult r;
    r.sum = best[hi - lo];
    r.value = r.sum > 0 ? std::pow(r.sum, 1.0 / p) : 0.0;
    long at = hi;
    r.witness.push_back(at);
    while (prev[at - lo] >= 0) {
      at = prev[at - lo];
      r.witness.push_back(at);
    }
    if (r.witness.back() != lo) r.witness.push_back(lo);
    std::reverse(r.witness.begin(), r.witness.end());
    return r;
  }
};

void check_interval(long n, double p, long lo, long& hi) {
  if (hi < 0) hi = n - 1;
  if (!(p >= 1.0)) throw std::invalid_argument("p_variation: p < 1");
  if (!(0 <= lo && lo <= hi && hi < n))
    throw std::invalid_argument("p_variation: bad interval");
}

}  // namespace

PVarResult p_variation(const SampledPath& path, double p, long lo, long hi) {
  check_interval(path.size(), p, lo, hi);
  if (lo == hi) return PVarResult{0.0, 0.0, {lo}};
  PVarDp dp(lo, hi);
  for (long j = lo + 1; j <= hi; ++j)
    for (long i = lo; i < j; ++i)
      dp.offer(i, j, std::pow(path.increment(i, j).norm(), p));
  return dp.finish(p);
}

PVarResult area_p_variation(const SampledRoughPath& rp, double exponent, long lo, long hi) {
  check_interval(rp.size(), exponent, lo, hi);
  if (lo == hi) return PVarResult{0.0, 0.0, {lo}};
  const long d = rp.dim();
  PVarDp dp(lo, hi);
  // rows[i] = A(i, j) rolled forward in j via Chen
  std::vector<Eigen::MatrixXd> rows(hi - lo, Eigen::MatrixXd::Zero(d, d));
  Eigen::MatrixXd incs(hi - lo, d);  // row i-lo = Y(i, j-1)
  incs.setZero();
  for (long j = lo + 1; j <= hi; ++j) {
    const Eigen::RowVectorXd dv = rp.base.increment(j - 1, j);
    const Eigen::MatrixXd step = rp.step_area(j - 1);
    for (long i = lo; i < j; ++i) {
      rows[i - lo] += step + incs.row(i - lo).transpose() * dv;
      incs.row(i - lo) += dv;
      dp.offer(i, j, std::pow(rows[i - lo].norm(), exponent));
    }
  }
  return dp.finish(exponent);
}

double rough_distance(const SampledRoughPath& a, const SampledRoughPath& b, double p) {
  if (a.size() != b.size() || a.dim() != b.dim())
    throw std::invalid_argument("rough_distance: incompatible grids");
  const long n = a.size(), d = a.dim();
  const long lo = 0, hi = n - 1;
  if (n == 1) return 0.0;

  PVarDp dp1(lo, hi);
  for (long j = 1; j <= hi; ++j)
    for (long i = 0; i < j; ++i)
      dp1.offer(i, j, std::pow((a.base.increment(i, j) - b.base.increment(i, j)).norm(), p));
  const PVarResult lvl1 = dp1.finish(p);

  const double half = p / 2.0;
  PVarDp dp2(lo, hi);
  std::vector<Eigen::MatrixXd> ra(n - 1, Eigen::MatrixXd::Zero(d, d));
  std::vector<Eigen::MatrixXd> rb(n - 1, Eigen::MatrixXd::Zero(d, d));
  Eigen::MatrixXd ia = Eigen::MatrixXd::Zero(n - 1, d);
  Eigen::MatrixXd ib = Eigen::MatrixXd::Zero(n - 1, d);
  for (long j = 1; j <= hi; ++j) {
    const Eigen::RowVectorXd dva = a.base.increment(j - 1, j);
    const Eigen::RowVectorXd dvb = b.base.increment(j - 1, j);
    const Eigen::MatrixXd sa = a.step_area(j - 1);
    const Eigen::MatrixXd sb = b.step_area(j - 1);
    for (long i = 0; i < j; ++i) {
      ra[i] += sa + ia.row(i).transpose() * dva;
      rb[i] += sb + ib.row(i).transpose() * dvb;
      ia.row(i) += dva;
      ib.row(i) += dvb;
      dp2.offer(i, j, std::pow((ra[i] - rb[i]).norm(), half));
    }
  }
  const PVarResult lvl2 = dp2.finish(half);
  return lvl1.value + lvl2.value;
}

Eigen::VectorXd linear_path_integral(const SampledPath& integrand,
                                     const SampledPath& integrator) {
  if (integrand.size() != integrator.size())
    throw std::invalid_argument("linear_path_integral: grid mismatch");
  if (integrand.dim() != 1 || integrator.dim() != 1)
    throw std::invalid_argument("linear_path_integral: scalar paths only");
  Eigen::VectorXd out(integrand.size());
  out(0) = 0.0;
  for (long i = 0; i + 1 < integrand.size(); ++i) {
    const double g = 0.5 * (integrand.values(i, 0) + integrand.values(i + 1, 0));
    out(i + 1) = out(i) + g * (integrator.values(i + 1, 0) - integrator.values(i, 0));
  }
  return out;
}

SharpnessFixture sharpness_fixture(long n, double p, double eps) {
  if (n < 1) throw std::invalid_argument("sharpness_fixture: n < 1");
  if (!(p >= 2.0 && p < 3.0)) throw std::invalid_argument("sharpness_fixture: p outside [2,3)");
  if (!(eps > 0.0 && eps < 2.0 / p))
    throw std::invalid_argument("sharpness_fixture: eps outside (0, 2/p)");

  // 4-periodic trapezoid profile at integer arguments: 0, 1, 1, 0, ...
  auto phi_int = [](long i) {
    switch (i % 4) {
      case 1:
      case 2: return 1.0;
      default: return 0.0;
    }
  };

  const long rows = 4 * n + 1;
  const double y_amp = std::pow(2.0 * double(n), -1.0 / p);
  const double g_amp = std::pow(2.0, -2.0 / p) * std::pow(double(n), -eps);

  Eigen::MatrixXd yv(rows, 1), gv(rows, 1);
  for (long i = 0; i < rows; ++i) {
    yv(i, 0) = y_amp * phi_int(i);
    gv(i, 0) = g_amp * phi_int(i + 1);
  }
  SharpnessFixture fx;
  fx.drive = canonical_lift(SampledPath::uniform(0.0, 1.0 / double(n), std::move(yv)));
  fx.companion = SampledPath::uniform(0.0, 1.0 / double(n), std::move(gv));
  fx.expected_integral =
      std::pow(2.0, -3.0 / p) * std::pow(double(n), 1.0 - 1.0 / p - eps);
  fx.drive_pvar = 1.0;
  fx.area_pvar = 0.5;
  fx.companion_pvar = std::pow(double(n), 2.0 / p - eps);
  return fx;
}

}  // namespace roughfilter
