// Shared helpers for the test suites.
#pragma once

#include <cmath>
#include <limits>

#include "roughfilter/penalty.hpp"
#include "roughfilter/rough_path.hpp"
#include "roughfilter/value.hpp"

namespace testsupport {

// Exact per-slice transport value for scalar drives.  With the quadratic
// control cost u^2/(2 eps) at small eps, the optimal reparameterization is
// u ~ 0, so for each frozen gamma the value surface reduces to a 1-d
// transport problem along the backward characteristic
//   q_k = q_{k+1} - drift(q_{k+1}, g) dt_k - diffusion(g) dY_k,
// accumulating cost0 dt + integrand dY at the pre-step foot, plus the
// initial-time quadratic at the characteristic's origin.  This is gridless
// (no interpolation), so it serves as an independent oracle for the value
// propagation schemes on slices where u = 0 is optimal.
inline double slice_transport_value(const roughfilter::TransformedDynamics& dyn,
                                    const roughfilter::SampledRoughPath& drive,
                                    double g, double q_end,
                                    double explode_bound = 60.0) {
  const long n = drive.steps();
  double q = q_end;
  double acc = 0.0;
  for (long k = n - 1; k >= 0; --k) {
    const double dt = drive.base.times(k + 1) - drive.base.times(k);
    const double dY = drive.base.values(k + 1, 0) - drive.base.values(k, 0);
    const double qp = q - dyn.drift(q, g) * dt - dyn.diffusion(g) * dY;
    acc += dyn.cost0(qp, g) * dt + dyn.integrand(qp, g) * dY;
    q = qp;
    if (std::abs(q) > explode_bound) return roughfilter::kInfiniteCost;
  }
  const auto& spec = dyn.spec();
  return acc + 0.5 * (spec.init_weight_q * q * q + spec.init_weight_gamma * g * g);
}

struct SliceMin {
  double value = roughfilter::kInfiniteCost;
  double q = 0.0;
  double g = 0.0;
};

// Brute scan of the slice oracle over a rectangle.
inline SliceMin slice_oracle_min(const roughfilter::TransformedDynamics& dyn,
                                 const roughfilter::SampledRoughPath& drive,
                                 double q_lo, double q_hi, double q_step,
                                 double g_lo, double g_hi, double g_step) {
  SliceMin best;
  for (double g = g_lo; g <= g_hi + 1e-12; g += g_step)
    for (double q = q_lo; q <= q_hi + 1e-12; q += q_step) {
      const double v = slice_transport_value(dyn, drive, g, q);
      if (v < best.value) {
        best.value = v;
        best.q = q;
        best.g = g;
      }
    }
  return best;
}

}  // namespace testsupport
