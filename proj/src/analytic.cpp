#include "cptsq/analytic.hpp"

#include <cmath>

#include "cptsq/golden.hpp"

namespace cptsq {

double squeeze_term(double q) {
  const double s = std::sqrt(q * q + 1.0) - q;
  return s * s;
}

double noise_term(double z) { return z * (2.0 + z) / (3.0 + 2.0 * z); }

AnalyticFactors analytic_factors(double alpha, double omega, double delta) {
  if (omega == 0.0)
    throw InvalidParams("analytic approximation needs a nonzero Rabi frequency");
  const double w2 = omega * omega;
  AnalyticFactors f;
  f.epsilon = delta / w2;
  f.q_mag = alpha * std::abs(f.epsilon) / 4.0;
  f.z_noise = alpha * f.epsilon * f.epsilon / 2.0 * (1.0 + w2 / 4.0);
  f.v_approx = squeeze_term(f.q_mag) + noise_term(f.z_noise);
  f.t_delay = alpha / (4.0 * w2);
  return f;
}

AnalyticOptimum analytic_optimum(double alpha, double omega) {
  if (!(alpha > 0.0) || !(omega > 0.0))
    throw InvalidParams("analytic optimum needs alpha > 0 and omega > 0");
  const double w2 = omega * omega;
  auto v = [&](double eps) {
    return analytic_factors(alpha, omega, eps * w2).v_approx;
  };
  const GoldenResult g = golden_section(v, 1e-6, 1.0, 1e-10);
  return {g.x * w2, g.fx, g.x};
}

}  // namespace cptsq
