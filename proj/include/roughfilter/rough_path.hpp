#pragma once

#include <Eigen/Dense>
#include <vector>

// Level-2 rough paths over a sample grid. A path carries its values at grid
// times; enhancement stores one area matrix per grid step and recovers the
// area over any grid interval through Chen's identity
//
//   A(s,t) = A(s,r) + A(r,t) + Y(s,r) (x) Y(r,t),
//
// so memory stays linear in the number of steps. Geometric lifts in addition
// satisfy sym A(s,t) = Y(s,t) (x) Y(s,t) / 2.

namespace roughfilter {

struct SampledPath {
  Eigen::VectorXd times;   // strictly increasing, size N
  Eigen::MatrixXd values;  // N x d

  long size() const { return times.size(); }
  long steps() const { return times.size() - 1; }
  long dim() const { return values.cols(); }
  double span() const { return times(times.size() - 1) - times(0); }

  Eigen::RowVectorXd increment(long i, long j) const {
    return values.row(j) - values.row(i);
  }

  // Evenly spaced grid starting at t0.
  static SampledPath uniform(double t0, double dt, Eigen::MatrixXd vals);

  void validate() const;  // throws std::invalid_argument on malformed data
};

struct SampledRoughPath {
  SampledPath base;
  // Row i holds the step area over [t_i, t_{i+1}], flattened row-major so
  // entry (a,b) = integral of dY^a dY^b with the first index inside.
  Eigen::MatrixXd step_areas;  // (N-1) x d*d

  long size() const { return base.size(); }
  long steps() const { return base.steps(); }
  long dim() const { return base.dim(); }

  Eigen::MatrixXd step_area(long i) const;
  // Interval area by Chen recomposition, O(j - i).
  Eigen::MatrixXd area(long i, long j) const;

  void validate() const;
};

// Piecewise-linear (canonical) enhancement: step area = v (x) v / 2 where v
// is the step increment.
SampledRoughPath canonical_lift(const SampledPath& path);

// Enhancement of the subsampled path (every coarse_factor-th point) with
// areas from midpoint sums over the fine grid. The midpoint rule makes the
// symmetric part exact, so the lift is geometric; for d = 1 it coincides
// with the canonical one.
SampledRoughPath stratonovich_lift(const SampledPath& fine, long coarse_factor);

// Reversed path with per-step areas -A + v (x) v; an involution.
SampledRoughPath time_reverse(const SampledRoughPath& rp);

// A(s,t) - A(s,r) - A(r,t) - Y(s,r) (x) Y(r,t) for explicit interval data.
Eigen::MatrixXd chen_defect_of(const Eigen::MatrixXd& a_st,
                               const Eigen::MatrixXd& a_sr,
                               const Eigen::MatrixXd& a_rt,
                               const Eigen::RowVectorXd& y_sr,
                               const Eigen::RowVectorXd& y_rt);

// Defect at grid triple i <= j <= k, recomposed from step areas (zero up to
// roundoff by construction; the op exists as a verification hook).
Eigen::MatrixXd chen_defect(const SampledRoughPath& rp, long i, long j, long k);

// sym A(s,t) - Y(s,t) (x) Y(s,t) / 2 at a grid pair.
Eigen::MatrixXd symmetric_defect(const SampledRoughPath& rp, long i, long j);

struct PVarResult {
  double value = 0.0;           // the p-variation norm itself
  double sum = 0.0;             // sup over partitions of sum |X|^p
  std::vector<long> witness;    // grid indices of an attaining partition
};

// Exact p-variation of the sampled path over grid indices [lo, hi] (dynamic
// program over grid points; hi = -1 means last index).
PVarResult p_variation(const SampledPath& path, double p, long lo = 0, long hi = -1);

// p-variation of the interval-area map with the given exponent (callers pass
// p/2). Chen recomposition is rolled along the grid, O(n^2 d^2).
PVarResult area_p_variation(const SampledRoughPath& rp, double exponent,
                            long lo = 0, long hi = -1);

// Inhomogeneous rough distance |Y - Yt|_p + |A - At|_{p/2} over a common grid.
double rough_distance(const SampledRoughPath& a, const SampledRoughPath& b, double p);

// Riemann-Stieltjes integral of one piecewise-linear path against another on
// a common grid (trapezoid in the integrand; exact for linear interpolants).
Eigen::VectorXd linear_path_integral(const SampledPath& integrand,
                                     const SampledPath& integrator);

// Oscillating pair used by the sharpness suite: a scalar path of unit
// p-variation whose enhancement has norm 1/2, and a small companion path it
// integrates against with closed-form value 2^{-3/p} n^{1-1/p-eps}. The
// growth exponent (p-1)/2 in the integral bound is attained along n.
struct SharpnessFixture {
  SampledRoughPath drive;    // Y^n, canonical lift, grid i/n over [0, 4]
  SampledPath companion;     // gamma^n on the same grid
  double expected_integral;  // closed form for int gamma^n dY^n
  double drive_pvar;         // = 1
  double area_pvar;          // = 1/2
  double companion_pvar;     // n^{2/p - eps}, exponent p/2
};
SharpnessFixture sharpness_fixture(long n, double p, double eps);

}  // namespace roughfilter
