#include <doctest.h>

#include <cmath>
#include <vector>

#include "roughfilter/rng.hpp"
#include "roughfilter/rough_path.hpp"

using namespace roughfilter;

namespace {

SampledPath random_path(long n, long d, unsigned long long seed) {
  CounterRng rng(seed, 0);
  Eigen::MatrixXd vals(n + 1, d);
  vals.row(0).setZero();
  for (long i = 0; i < n; ++i)
    for (long c = 0; c < d; ++c) vals(i + 1, c) = vals(i, c) + 0.3 * rng.normal();
  return SampledPath::uniform(0.0, 1.0 / double(n), std::move(vals));
}

// All partitions of [0, n] containing both endpoints, by bitmask over the
// interior points. Feasible for n <= ~16.
double brute_pvar_sum(const SampledPath& path, double p) {
  const long n = path.steps();
  double best = 0.0;
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<long> pts{0};
    for (long i = 1; i < n; ++i)
      if (mask & (1u << (i - 1))) pts.push_back(i);
    pts.push_back(n);
    double s = 0.0;
    for (size_t k = 0; k + 1 < pts.size(); ++k)
      s += std::pow(path.increment(pts[k], pts[k + 1]).norm(), p);
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

TEST_CASE("p-variation matches brute force over all partitions") {
  for (unsigned long long seed : {11ull, 12ull, 13ull}) {
    SampledPath path = random_path(9, 2, seed);
    for (double p : {2.1, 2.5, 2.9}) {
      PVarResult r = p_variation(path, p);
      const double brute = brute_pvar_sum(path, p);
      CHECK(r.sum == doctest::Approx(brute).epsilon(1e-12));
      CHECK(r.value == doctest::Approx(std::pow(brute, 1.0 / p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("p-variation witness is a real attaining partition") {
  SampledPath path = random_path(40, 1, 7);
  PVarResult r = p_variation(path, 2.3);
  REQUIRE(r.witness.size() >= 2);
  CHECK(r.witness.front() == 0);
  CHECK(r.witness.back() == 40);
  double s = 0.0;
  for (size_t k = 0; k + 1 < r.witness.size(); ++k) {
    CHECK(r.witness[k] < r.witness[k + 1]);
    s += std::pow(path.increment(r.witness[k], r.witness[k + 1]).norm(), 2.3);
  }
  CHECK(s == doctest::Approx(r.sum).epsilon(1e-12));
}

TEST_CASE("monotone scalar path has p-variation equal to its total increment") {
  Eigen::MatrixXd vals(6, 1);
  vals << 0, 0.5, 0.9, 1.7, 1.8, 2.5;
  SampledPath path = SampledPath::uniform(0, 0.2, vals);
  PVarResult r = p_variation(path, 2.5);
  CHECK(r.value == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(r.witness == std::vector<long>{0, 5});
}

TEST_CASE("sub-interval p-variation respects the index window") {
  SampledPath path = random_path(30, 1, 3);
  PVarResult whole = p_variation(path, 2.2);
  PVarResult part = p_variation(path, 2.2, 5, 20);
  CHECK(part.sum <= whole.sum + 1e-12);
  CHECK(part.witness.front() == 5);
  CHECK(part.witness.back() == 20);
}

TEST_CASE("canonical lift satisfies Chen and geometric identities on every triple") {
  SampledRoughPath rp = canonical_lift(random_path(60, 2, 21));
  CounterRng rng(5, 0);
  const double scale = 1.0 + rp.base.values.cwiseAbs().maxCoeff() * rp.base.values.cwiseAbs().maxCoeff();
  for (int trial = 0; trial < 50; ++trial) {
    long i = long(rng.uniform() * 58);
    long j = i + 1 + long(rng.uniform() * (59 - i));
    long k = j + long(rng.uniform() * (60 - j));
    CHECK(chen_defect(rp, i, j, k).norm() <= 1e-9 * scale);
    Eigen::MatrixXd sym = symmetric_defect(rp, i, k);
    CHECK(sym.norm() <= 1e-9 * scale);
  }
}

TEST_CASE("chen_defect_of flags corrupted interval data") {
  SampledRoughPath rp = canonical_lift(random_path(10, 2, 8));
  Eigen::MatrixXd a_sr = rp.area(0, 4), a_rt = rp.area(4, 9), a_st = rp.area(0, 9);
  Eigen::RowVectorXd y_sr = rp.base.increment(0, 4), y_rt = rp.base.increment(4, 9);
  CHECK(chen_defect_of(a_st, a_sr, a_rt, y_sr, y_rt).norm() <= 1e-12);
  Eigen::MatrixXd corrupted = a_st;
  corrupted(0, 1) += 0.25;
  CHECK(chen_defect_of(corrupted, a_sr, a_rt, y_sr, y_rt).norm() ==
        doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("stratonovich lift is geometric and reduces to canonical for d = 1") {
  SampledPath fine = random_path(400, 1, 31);
  SampledRoughPath strat = stratonovich_lift(fine, 8);
  // subsampled base path
  CHECK(strat.size() == 51);
  Eigen::MatrixXd sub(51, 1);
  for (long i = 0; i <= 50; ++i) sub(i, 0) = fine.values(8 * i, 0);
  SampledRoughPath canon = canonical_lift(
      SampledPath::uniform(fine.times(0), fine.times(8) - fine.times(0), sub));
  CHECK((strat.step_areas - canon.step_areas).cwiseAbs().maxCoeff() <= 1e-12);

  SampledPath fine2 = random_path(400, 2, 32);
  SampledRoughPath strat2 = stratonovich_lift(fine2, 8);
  const double scale =
      1.0 + fine2.values.cwiseAbs().maxCoeff() * fine2.values.cwiseAbs().maxCoeff();
  for (long i = 0; i < 50; ++i)
    CHECK(symmetric_defect(strat2, i, i + 1).norm() <= 1e-9 * scale);
  CHECK(chen_defect(strat2, 3, 17, 44).norm() <= 1e-9 * scale);
}

TEST_CASE("time reversal is an involution and preserves rough distance zero") {
  SampledRoughPath rp = canonical_lift(random_path(50, 2, 41));
  SampledRoughPath rr = time_reverse(time_reverse(rp));
  CHECK((rr.base.values - rp.base.values).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((rr.base.times - rp.base.times).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((rr.step_areas - rp.step_areas).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(rough_distance(rp, rr, 2.5) <= 1e-10);
}

TEST_CASE("time reversal keeps the lift geometric") {
  SampledRoughPath rp = canonical_lift(random_path(30, 2, 42));
  SampledRoughPath rev = time_reverse(rp);
  const double scale =
      1.0 + rp.base.values.cwiseAbs().maxCoeff() * rp.base.values.cwiseAbs().maxCoeff();
  for (long i = 0; i < 30; ++i) CHECK(symmetric_defect(rev, i, i + 1).norm() <= 1e-9 * scale);
}

TEST_CASE("rough distance separates distinct drives and vanishes on equals") {
  SampledRoughPath a = canonical_lift(random_path(40, 1, 51));
  SampledRoughPath b = canonical_lift(random_path(40, 1, 52));
  CHECK(rough_distance(a, a, 2.5) == doctest::Approx(0.0));
  const double dab = rough_distance(a, b, 2.5);
  CHECK(dab > 0.1);
  CHECK(rough_distance(b, a, 2.5) == doctest::Approx(dab).epsilon(1e-12));
}

TEST_CASE("area p-variation of the canonical lift of a line vanishes against its increments") {
  // Straight line: area over [i, j] = v (x) v / 2 with v the increment, so the
  // defect-style checks hold and the area norm scales like |t - s|^2; the
  // p/2-variation over a refining grid is dominated by the single coarse
  // interval.
  const long n = 16;
  Eigen::MatrixXd vals(n + 1, 1);
  for (long i = 0; i <= n; ++i) vals(i, 0) = 2.0 * double(i) / n;
  SampledRoughPath rp = canonical_lift(SampledPath::uniform(0, 1.0 / n, vals));
  PVarResult r = area_p_variation(rp, 1.25);
  CHECK(r.sum == doctest::Approx(std::pow(2.0, 1.25)).epsilon(1e-9));  // |A(0,n)| = 2
}

TEST_CASE("linear path integral is exact trapezoid quadrature") {
  const long n = 10;
  Eigen::MatrixXd t(n + 1, 1), y(n + 1, 1);
  for (long i = 0; i <= n; ++i) {
    t(i, 0) = double(i) / n;
    y(i, 0) = double(i) / n;
  }
  SampledPath integrand = SampledPath::uniform(0, 0.1, t);
  SampledPath integrator = SampledPath::uniform(0, 0.1, y);
  Eigen::VectorXd val = linear_path_integral(integrand, integrator);
  REQUIRE(val.size() == n + 1);
  CHECK(val(0) == 0.0);  // running integral starts at zero
  CHECK(val(n) == doctest::Approx(0.5).epsilon(1e-12));  // int_0^1 t dt
}

TEST_CASE("sharpness fixture exposes its closed forms") {
  for (double p : {2.1, 2.5}) {
    SharpnessFixture fx = sharpness_fixture(64, p, 0.05);
    CHECK(p_variation(fx.drive.base, p).value == doctest::Approx(fx.drive_pvar).epsilon(1e-9));
    CHECK(area_p_variation(fx.drive, p / 2).value ==
          doctest::Approx(fx.area_pvar).epsilon(1e-9));
    CHECK(p_variation(fx.companion, p / 2).value ==
          doctest::Approx(fx.companion_pvar).epsilon(1e-9));
    Eigen::VectorXd quad = linear_path_integral(fx.companion, fx.drive.base);
    CHECK(quad(quad.size() - 1) == doctest::Approx(fx.expected_integral).epsilon(1e-9));
  }
}

TEST_CASE("validate rejects malformed paths and lifts") {
  SampledPath bad;
  bad.times.resize(3);
  bad.times << 0, 0.2, 0.1;  // not increasing
  bad.values = Eigen::MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  SampledPath nan_path = random_path(5, 1, 1);
  nan_path.values(2, 0) = std::nan("");
  CHECK_THROWS_AS(nan_path.validate(), std::invalid_argument);

  SampledRoughPath rp = canonical_lift(random_path(5, 2, 2));
  rp.step_areas.conservativeResize(3, Eigen::NoChange);  // wrong row count
  CHECK_THROWS_AS(rp.validate(), std::invalid_argument);
}

TEST_CASE("chen telescoping makes interval areas insensitive to how they are recomposed") {
  SampledRoughPath rp = canonical_lift(random_path(25, 2, 61));
  // A(0, n) recomputed through an arbitrary middle split equals direct rollup.
  Eigen::MatrixXd direct = rp.area(0, 25);
  for (long mid : {1L, 7L, 13L, 24L}) {
    Eigen::MatrixXd glued = rp.area(0, mid) + rp.area(mid, 25) +
                            rp.base.increment(0, mid).transpose() * rp.base.increment(mid, 25);
    CHECK((glued - direct).norm() <= 1e-12);
  }
}
