#include "roughfilter/robust.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace roughfilter {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

SimplexState posterior_from_log_odds(double q) {
  SimplexState x;
  x.probs.resize(2);
  double s = sigmoid(q);
  x.probs << 1.0 - s, s;
  return x;
}

RobustEstimate most_reasonable(const QuadraticValue& v, double preshift_min,
                               const ParamChart& chart, double t) {
  RobustEstimate est;
  est.t = t;
  est.a_star = v.z_hat(1);
  est.mapped_param = chart.natural_parameter(est.a_star);
  est.x_star = posterior_from_log_odds(v.z_hat(0));
  est.kappa_min = preshift_min;
  return est;
}

RobustEstimate most_reasonable(const GridValue& gv, const ParamChart& chart, double t) {
  auto [iq, ig] = gv.argmin();
  RobustEstimate est;
  est.t = t;
  est.a_star = gv.g_axis(ig);
  est.mapped_param = chart.natural_parameter(est.a_star);
  est.x_star = posterior_from_log_odds(gv.q_axis(iq));
  est.kappa_min = gv.values(iq, ig);
  return est;
}

std::vector<long> reasonable_set(const GridValue& gv, double lambda) {
  if (!(lambda > 0)) throw std::domain_error("reasonable_set: lambda must be positive");
  std::vector<long> out;
  for (long ig = 0; ig < gv.g_axis.size(); ++ig) {
    double best = std::numeric_limits<double>::infinity();
    for (long iq = 0; iq < gv.q_axis.size(); ++iq)
      best = std::min(best, gv.values(iq, ig));
    if (best < lambda) out.push_back(ig);
  }
  return out;
}

double dr_expectation(const GridValue& gv, const Eigen::Vector2d& phi, double k1, double k2) {
  if (!(k1 > 0)) throw std::domain_error("dr_expectation: k1 must be positive");
  if (!(k2 >= 1)) throw std::domain_error("dr_expectation: k2 must be at least 1");
  double sup = -std::numeric_limits<double>::infinity();
  for (long iq = 0; iq < gv.q_axis.size(); ++iq) {
    double inner = std::numeric_limits<double>::infinity();
    for (long ig = 0; ig < gv.g_axis.size(); ++ig)
      inner = std::min(inner, gv.values(iq, ig));
    if (!std::isfinite(inner)) continue;  // posterior not plausible at any parameter
    double s = sigmoid(gv.q_axis(iq));
    double mean = (1.0 - s) * phi(0) + s * phi(1);
    sup = std::max(sup, mean - std::pow(inner / k1, k2));
  }
  if (!std::isfinite(sup))
    throw std::runtime_error("dr_expectation: value function infinite everywhere");
  return sup;
}

}  // namespace roughfilter
