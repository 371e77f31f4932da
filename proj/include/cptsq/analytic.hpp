#pragma once

// Closed-form small-epsilon approximation of the output variance, with
// epsilon = Gamma delta / Omega^2:
//   |Q| = alpha eps / 4,   Z = (alpha eps^2 / 2)(1 + Omega^2 / 4 Gamma^2),
//   V ~ (sqrt(|Q|^2 + 1) - |Q|)^2 + Z (2 + Z) / (3 + 2 Z).
// Valid for eps << 1 and |Q|^2 >> 1; the validity conditions are not enforced.

#include "cptsq/model.hpp"

namespace cptsq {

struct AnalyticFactors {
  double epsilon = 0.0;
  double q_mag = 0.0;
  double z_noise = 0.0;
  double v_approx = 1.0;
  double t_delay = 0.0;  // slow-light delay alpha Gamma / (4 Omega^2), 1/Gamma
};

/// Gamma = 1 throughout. Throws InvalidParams for omega == 0.
AnalyticFactors analytic_factors(double alpha, double omega, double delta);

/// Squeezing term of the approximation alone, for monotonicity checks.
double squeeze_term(double q_mag);
/// Noise term of the approximation alone.
double noise_term(double z_noise);

struct AnalyticOptimum {
  double delta_opt = 0.0;
  double v_opt = 1.0;
  double epsilon_opt = 0.0;
};

/// Minimizes v_approx over eps in [1e-6, 1] by golden section (tolerance
/// 1e-10 in eps) and maps the minimizer back to delta = eps Omega^2.
AnalyticOptimum analytic_optimum(double alpha, double omega);

}  // namespace cptsq
