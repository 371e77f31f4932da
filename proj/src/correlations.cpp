#include "cptsq/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cptsq {

namespace {

constexpr double kNegativeOccupationTol = 1e-9;

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

Mat4 drift_matrix(const SystemParams& p, const ResponseCoefficients& k) {
  Mat4 c;
  c << k.a1, k.b1, k.c1, k.d1,
      -std::conj(k.b1), -std::conj(k.a1), -std::conj(k.d1), -std::conj(k.c1),
      k.a2, k.b2, k.c2, k.d2,
      -std::conj(k.b2), -std::conj(k.a2), -std::conj(k.d2), -std::conj(k.c2);
  return (I * (p.gamma * p.alpha / 2.0)) * c;
}

LocalNoiseMatrices local_matrices(const SystemParams& p,
                                  const ResponseBundle& bundle) {
  LocalNoiseMatrices out;
  out.c4 = drift_matrix(p, bundle.coeffs);
  out.z4 = (p.gamma * p.alpha / 4.0) *
           (bundle.v4x9 * bundle.d * bundle.v4x9.adjoint());
  return out;
}

LocalNoiseMatrices local_matrices(const SystemParams& p, cplx omega_p,
                                  cplx omega_c) {
  return local_matrices(p, response_coefficients(p, omega_p, omega_c));
}

LocalNoiseMatrices local_matrices(const SystemParams& p,
                                  const StagePoint& stage) {
  return local_matrices(
      p, response_from_state(p, stage.omega_p, stage.omega_c, stage.state));
}

std::array<cplx, 6> noise_terms_from_z(const Mat4& z) {
  return {z(0, 1), z(1, 1), z(2, 3), z(3, 3), z(0, 3), z(1, 3)};
}

std::array<cplx, 6> noise_terms_from_langevin(const SystemParams& p,
                                              const ResponseBundle& bundle) {
  if (p.alpha == 0.0) return {};
  const double g = p.g_norm.value_or(1.0);
  const double eta = std::pow(p.gamma * p.alpha / (2.0 * g), 2);
  const double c_over_nl = g * g / (p.alpha * p.gamma);
  const Mat9& t = bundle.t;
  const Mat9& d = bundle.d;

  using Row = Eigen::Matrix<cplx, 1, 9>;
  // <(a.F)(b.F)> with <F_k F_l> = D(k, adj(l)) c / (N L).
  auto pair = [&](const Row& a, const Row& b) {
    cplx s = 0.0;
    for (int k = 0; k < 9; ++k)
      for (int l = 0; l < 9; ++l) s += a(k) * b(l) * d(k, idx::adjoint[l]);
    return s * c_over_nl;
  };
  // Coefficient row of the adjoint operator: (a.F)^dag = sum_k conj(a_k)
  // F_adj(k).
  auto dagger = [](const Row& a) {
    Row r;
    for (int k = 0; k < 9; ++k) r(idx::adjoint[k]) = std::conj(a(k));
    return r;
  };

  const Row f13 = t.row(idx::s13), f23 = t.row(idx::s23);
  const Row f31 = t.row(idx::s31), f32 = t.row(idx::s32);
  // Noise vector N = (f13, -f31, f23, -f32) up to the common prefactor, and
  // n_j = <N_a N_b^dag> for the six index pairs (a, b) listed in the header.
  return {
      -eta * pair(f13, dagger(f31)),
      eta * pair(f31, dagger(f31)),
      -eta * pair(f23, dagger(f32)),
      eta * pair(f32, dagger(f32)),
      -eta * pair(f13, dagger(f32)),
      eta * pair(f31, dagger(f32)),
  };
}

namespace {

struct Coef {
  cplx p1, q1, r1, s1, p2, q2, r2, s2;
  std::array<cplx, 6> n;
};

Coef coef_from(const LocalNoiseMatrices& m) {
  const Mat4& c = m.c4;
  return {c(0, 0), c(0, 1), c(0, 2), c(0, 3), c(2, 0), c(2, 1), c(2, 2),
          c(2, 3), noise_terms_from_z(m.z4)};
}

MomentVector moment_rhs(const Coef& k, const MomentVector& m) {
  const cplx cpp = m[0], np = m[1], ccc = m[2], nc = m[3], cpc = m[4],
             xpc = m[5];
  MomentVector d;
  d[0] = 2.0 * k.p1 * cpp + k.q1 * (2.0 * np + 1.0) + 2.0 * k.r1 * cpc +
         2.0 * k.s1 * std::conj(xpc) + k.n[0];
  d[1] = 2.0 * k.p1.real() * np + std::conj(k.q1) * cpp +
         k.q1 * std::conj(cpp) + std::conj(k.s1) * cpc +
         k.s1 * std::conj(cpc) + std::conj(k.r1) * std::conj(xpc) +
         k.r1 * xpc + k.n[1];
  d[2] = 2.0 * k.r2 * ccc + 2.0 * k.p2 * cpc + 2.0 * k.q2 * xpc +
         k.s2 * (2.0 * nc + 1.0) + k.n[2];
  d[3] = 2.0 * k.r2.real() * nc + std::conj(k.q2) * cpc +
         k.q2 * std::conj(cpc) + std::conj(k.p2) * xpc +
         k.p2 * std::conj(xpc) + std::conj(k.s2) * ccc +
         k.s2 * std::conj(ccc) + k.n[3];
  d[4] = (k.p1 + k.r2) * cpc + k.r1 * ccc + k.p2 * cpp + k.s1 * nc +
         k.s2 * std::conj(xpc) + k.q1 * xpc + k.q2 * (np + 1.0) + k.n[4];
  d[5] = (std::conj(k.p1) + k.r2) * xpc + std::conj(k.q1) * cpc +
         k.q2 * std::conj(cpp) + std::conj(k.s1) * ccc +
         std::conj(k.r1) * nc + k.p2 * np + k.s2 * std::conj(cpc) + k.n[5];
  return d;
}

MomentVector axpy(const MomentVector& y, double h, const MomentVector& k) {
  MomentVector r;
  for (int i = 0; i < 6; ++i) r[i] = y[i] + h * k[i];
  return r;
}

}  // namespace

MomentVector propagate_moments(const SystemParams& p,
                               const MeanFieldSolution& mean,
                               const MomentObserver& observer) {
  MomentVector y{};
  for (int n = 0; n < mean.steps; ++n) {
    const double h = mean.profile.xi[n + 1] - mean.profile.xi[n];
    const auto& st = mean.stages[n];
    std::array<Coef, 4> k;
    for (int s = 0; s < 4; ++s) k[s] = coef_from(local_matrices(p, st[s]));
    const MomentVector k1 = moment_rhs(k[0], y);
    const MomentVector k2 = moment_rhs(k[1], axpy(y, h / 2, k1));
    const MomentVector k3 = moment_rhs(k[2], axpy(y, h / 2, k2));
    const MomentVector k4 = moment_rhs(k[3], axpy(y, h, k3));
    for (int i = 0; i < 6; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!finite(y[i]))
        throw NonConvergence("correlation propagation diverged at xi = " +
                             std::to_string(mean.profile.xi[n + 1]));
    }
    if (observer) observer(mean.profile.xi[n + 1], y);
  }
  return y;
}

CorrelationState to_state(const MomentVector& m) {
  return {m[0], m[1].real(), m[2], m[3].real(), m[4], m[5]};
}

CorrelationState propagate_correlations(const SystemParams& p,
                                        const MeanFieldSolution& mean,
                                        const MomentObserver& observer) {
  return to_state(propagate_moments(p, mean, observer));
}

Mat4 propagate_correlation_matrix(const SystemParams& p,
                                  const MeanFieldSolution& mean) {
  Mat4 g = Mat4::Zero();
  g(0, 0) = 1.0;
  g(2, 2) = 1.0;
  auto rhs = [](const LocalNoiseMatrices& m, const Mat4& y) -> Mat4 {
    return m.c4 * y + y * m.c4.adjoint() + m.z4;
  };
  for (int n = 0; n < mean.steps; ++n) {
    const double h = mean.profile.xi[n + 1] - mean.profile.xi[n];
    const auto& st = mean.stages[n];
    const Mat4 k1 = rhs(local_matrices(p, st[0]), g);
    const Mat4 k2 = rhs(local_matrices(p, st[1]), g + (h / 2) * k1);
    const Mat4 k3 = rhs(local_matrices(p, st[2]), g + (h / 2) * k2);
    const Mat4 k4 = rhs(local_matrices(p, st[3]), g + h * k3);
    g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!g.allFinite())
      throw NonConvergence("correlation matrix diverged at xi = " +
                           std::to_string(mean.profile.xi[n + 1]));
  }
  return g;
}

CorrelationState moments_from_matrix(const Mat4& g) {
  return {g(0, 1), g(1, 1).real(), g(2, 3), g(3, 3).real(), g(0, 3), g(1, 3)};
}

double quadrature_variance(const CorrelationState& corr, double theta,
                           Field f) {
  const cplx c = f == Field::probe ? corr.c_pp : corr.c_cc;
  const double n = f == Field::probe ? corr.n_p : corr.n_c;
  return 1.0 + 2.0 * n + 2.0 * (std::exp(-2.0 * I * theta) * c).real();
}

double optimal_angle(cplx c) {
  if (c == 0.0) return 0.0;
  double th = (std::arg(c) + kPi) / 2.0;
  th = std::fmod(th, kPi);
  if (th < 0) th += kPi;
  return th;
}

SqueezingResult optimal_variance(const CorrelationState& corr,
                                 const FieldProfile& profile,
                                 const SystemParams& p) {
  SqueezingResult r;
  r.variance = 1.0 + 2.0 * corr.n_p - 2.0 * std::abs(corr.c_pp);
  r.theta_opt = optimal_angle(corr.c_pp);
  if (!(r.variance > 0.0) || !std::isfinite(r.variance))
    throw NonConvergence("non-physical quadrature variance " +
                         std::to_string(r.variance) +
                         " (medium too opaque for the fluctuation model?)");
  r.variance_db = to_db(r.variance);
  const Transmission t = transmission(profile);
  r.transmission_p = t.probe;
  r.transmission_c = t.coupling;
  r.params_echo = p;
  return r;
}

namespace {

double moment_change(const MomentVector& a, const MomentVector& b) {
  double diff = 0.0, scale = 0.0;
  for (int i = 0; i < 6; ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / (1.0 + scale);
}

void check_occupations(const MomentVector& m) {
  if (m[1].real() < -kNegativeOccupationTol ||
      m[3].real() < -kNegativeOccupationTol)
    throw NonConvergence("negative photon number in propagated moments");
}

}  // namespace

SqueezingRun run_squeezing(const SystemParams& p,
                           const PropagationOptions& opts) {
  int steps = p.xi_steps;
  MeanFieldSolution mean = propagate_mean_fixed(p, steps);
  MomentVector mom = propagate_moments(p, mean);
  if (opts.refine) {
    bool converged = false;
    double mean_change = 0.0, corr_change = 0.0;
    for (int d = 0; d < opts.max_doublings && !converged; ++d) {
      steps *= 2;
      MeanFieldSolution fine = propagate_mean_fixed(p, steps);
      MomentVector fine_mom = propagate_moments(p, fine);
      mean_change = end_field_change(mean, fine);
      corr_change = moment_change(mom, fine_mom);
      fine.refinement_change = mean_change;
      converged = mean_change < opts.mean_tol && corr_change < opts.corr_tol;
      mean = std::move(fine);
      mom = fine_mom;
    }
    if (!converged)
      throw NonConvergence(
          "propagation not converged after " +
          std::to_string(opts.max_doublings) +
          " grid doublings (field change " + std::to_string(mean_change) +
          ", moment change " + std::to_string(corr_change) + ")");
  }
  check_occupations(mom);
  SqueezingRun run;
  run.corr = to_state(mom);
  run.result = optimal_variance(run.corr, mean.profile, p);
  run.mean = std::move(mean);
  return run;
}

SqueezingResult compute_squeezing(const SystemParams& p,
                                  const PropagationOptions& opts) {
  return run_squeezing(p, opts).result;
}

}  // namespace cptsq
