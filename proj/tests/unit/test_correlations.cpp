#include "doctest.h"

#include <Eigen/Eigenvalues>

#include "cptsq/correlations.hpp"
#include "oracles/draws.hpp"

using namespace cptsq;

namespace {

SystemParams equal_fields(double alpha, double omega, double delta) {
  SystemParams p;
  p.alpha = alpha;
  p.delta = delta;
  std::tie(p.delta_p, p.delta_c) =
      split_detuning(DetuningSetting::symmetric, delta);
  p.omega_p0 = omega;
  p.omega_c0 = omega;
  return p;
}

double moment_distance(const CorrelationState& a, const CorrelationState& b) {
  return std::max({std::abs(a.c_pp - b.c_pp), std::abs(a.n_p - b.n_p),
                   std::abs(a.c_cc - b.c_cc), std::abs(a.n_c - b.n_c),
                   std::abs(a.c_pc - b.c_pc), std::abs(a.x_pc - b.x_pc)});
}

double moment_scale(const CorrelationState& a) {
  return std::max({1.0, std::abs(a.c_pp), a.n_p, std::abs(a.c_cc), a.n_c,
                   std::abs(a.c_pc), std::abs(a.x_pc)});
}

}  // namespace

TEST_CASE("variance conventions") {
  CorrelationState zero;
  CHECK(quadrature_variance(zero, 0.3) == 1.0);
  CHECK(optimal_angle(zero.c_pp) == 0.0);

  CorrelationState c;
  c.c_pp = -0.4;
  c.n_p = 0.2;
  CHECK(optimal_angle(c.c_pp) == doctest::Approx(0.0));
  CHECK(quadrature_variance(c, 0.0) == doctest::Approx(0.6));

  FieldProfile f;
  f.xi = {0.0, 1.0};
  f.omega_p = {1.0, 1.0};
  f.omega_c = {1.0, 1.0};
  const SqueezingResult r = optimal_variance(c, f, SystemParams{});
  CHECK(r.variance == doctest::Approx(0.6));
  CHECK(r.theta_opt == doctest::Approx(0.0));
  CHECK(r.variance_db == doctest::Approx(to_db(0.6)));
}

TEST_CASE("optimal angle lies in [0, pi)") {
  oracle::DrawSource src(41);
  for (int n = 0; n < 500; ++n) {
    const cplx c = std::polar(src.uniform(1e-3, 5.0), src.uniform(-kPi, kPi));
    const double th = optimal_angle(c);
    CHECK(th >= 0.0);
    CHECK(th < kPi);
    CorrelationState s;
    s.c_pp = c;
    s.n_p = std::abs(c);
    CHECK(quadrature_variance(s, th) ==
          doctest::Approx(1.0 + 2.0 * s.n_p - 2.0 * std::abs(c)).epsilon(1e-12));
  }
}

TEST_CASE("unphysical moments are reported") {
  CorrelationState c;
  c.c_pp = 2.0;
  c.n_p = 0.0;
  FieldProfile f;
  f.xi = {0.0, 1.0};
  f.omega_p = {1.0, 1.0};
  f.omega_c = {1.0, 1.0};
  CHECK_THROWS_AS(optimal_variance(c, f, SystemParams{}), NonConvergence);
}

TEST_CASE("local drift and noise structure") {
  oracle::DrawSource src(42);
  for (int n = 0; n < 300; ++n) {
    const oracle::Draw d = src.next();
    const SystemParams p = d.params();
    const LocalNoiseMatrices m = local_matrices(p, d.omega_p, d.omega_c);
    // With the i Gamma alpha / 2 prefactor the dagger rows become plain
    // conjugates of the swapped field rows.
    static constexpr int swap[4] = {1, 0, 3, 2};
    for (int r : {0, 2})
      for (int j = 0; j < 4; ++j)
        CHECK(m.c4(r + 1, j) == std::conj(m.c4(r, swap[j])));
    const double zs = std::max(1.0, m.z4.cwiseAbs().maxCoeff());
    CHECK((m.z4 - m.z4.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * zs);
    Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (m.z4 + m.z4.adjoint()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * zs);
  }
}

TEST_CASE("drift rows 2 and 4 are negated conjugate patterns") {
  ResponseCoefficients k{{1, 2}, {3, -1}, {0.5, 0.25}, {-2, 1},
                         {4, 4}, {-1, -3}, {2, 0}, {0, 7}};
  SystemParams p;
  p.alpha = 2.0;
  const Mat4 c = drift_matrix(p, k) / (I * (p.alpha / 2.0));
  CHECK(c(1, 0) == -std::conj(k.b1));
  CHECK(c(1, 1) == -std::conj(k.a1));
  CHECK(c(1, 2) == -std::conj(k.d1));
  CHECK(c(1, 3) == -std::conj(k.c1));
  CHECK(c(3, 0) == -std::conj(k.b2));
  CHECK(c(3, 3) == -std::conj(k.c2));
  CHECK(c(2, 1) == k.b2);
}

TEST_CASE("Langevin assembly equals the Z matrix") {
  oracle::DrawSource src(43);
  for (int n = 0; n < 200; ++n) {
    const oracle::Draw d = src.next();
    SystemParams p = d.params();
    const ResponseBundle b = response_coefficients(p, d.omega_p, d.omega_c);
    const auto z = noise_terms_from_z(local_matrices(p, b).z4);
    const auto f = noise_terms_from_langevin(p, b);
    p.g_norm = src.uniform(1e-3, 10.0);
    const auto fg = noise_terms_from_langevin(p, b);
    for (int i = 0; i < 6; ++i) {
      const double s = std::max(1.0, std::abs(z[i]));
      CHECK(std::abs(z[i] - f[i]) <= 1e-12 * s);
      CHECK(std::abs(fg[i] - f[i]) <= 1e-10 * s);
    }
  }
}

TEST_CASE("scalar and matrix moment propagation agree") {
  oracle::DrawSource src(44);
  for (int n = 0; n < 40; ++n) {
    const oracle::Draw d = src.next(1000, 3.0, 0.1, 0.3);
    const SystemParams p = d.params();
    const MeanFieldSolution m = propagate_mean_fixed(p, 300);
    const CorrelationState a = propagate_correlations(p, m);
    const CorrelationState b = moments_from_matrix(propagate_correlation_matrix(p, m));
    CHECK(moment_distance(a, b) <= 1e-10 * moment_scale(a));
  }
}

TEST_CASE("occupations stay real and non-negative along the medium") {
  oracle::DrawSource src(45);
  for (int n = 0; n < 20; ++n) {
    const oracle::Draw d = src.next(3000, 3.0, 0.1, 0.3);
    const SystemParams p = d.params();
    const MeanFieldSolution m = propagate_mean_fixed(p, p.xi_steps);
    int nodes = 0;
    propagate_moments(p, m, [&](double, const MomentVector& y) {
      ++nodes;
      CHECK(std::abs(y[1].imag()) <= 1e-9 * std::max(1.0, std::abs(y[1])));
      CHECK(std::abs(y[3].imag()) <= 1e-9 * std::max(1.0, std::abs(y[3])));
      CHECK(y[1].real() >= -1e-9);
      CHECK(y[3].real() >= -1e-9);
    });
    CHECK(nodes == m.steps);
  }
}

TEST_CASE("output variance is the minimum over quadrature angles") {
  oracle::DrawSource src(46);
  for (int n = 0; n < 10; ++n) {
    const oracle::Draw d = src.next(1500, 2.5, 0.06, 0.5);
    const SqueezingRun run = run_squeezing(d.params());
    for (int k = 0; k < 360; ++k) {
      const double th = kPi * k / 360.0;
      CHECK(run.result.variance <= quadrature_variance(run.corr, th) + 1e-12);
    }
    const double v1 = quadrature_variance(run.corr, run.result.theta_opt);
    const double v2 = quadrature_variance(run.corr, run.result.theta_opt + kPi / 2);
    CHECK(v1 == doctest::Approx(run.result.variance).epsilon(1e-10));
    CHECK(v1 * v2 >= 1.0 - 1e-6);
    CHECK(quadrature_variance(run.corr, 0.0, Field::coupling) *
              quadrature_variance(run.corr, kPi / 2, Field::coupling) >=
          1.0 - 1e-6);
  }
}

TEST_CASE("probe and coupling squeeze equally for symmetric inputs") {
  for (double delta : {0.01, 0.03}) {
    const SqueezingRun run = run_squeezing(equal_fields(1000, 1.0, delta));
    const double vp = run.result.variance;
    const double vc = 1.0 + 2.0 * run.corr.n_c - 2.0 * std::abs(run.corr.c_cc);
    CHECK(std::abs(vp - vc) <= 1e-8);
  }
}

TEST_CASE("transparency gives no squeezing") {
  const SqueezingResult r = compute_squeezing(equal_fields(1000, 1.0, 0.0));
  CHECK(std::abs(r.variance - 1.0) <= 1e-6);
  CHECK(std::abs(r.transmission_p - 1.0) <= 1e-9);
  CHECK(std::abs(r.transmission_c - 1.0) <= 1e-9);
}

TEST_CASE("empty medium leaves vacuum noise") {
  const SqueezingRun run = run_squeezing(equal_fields(0.0, 1.0, 0.02));
  CHECK(run.result.variance == 1.0);
  CHECK(run.corr.n_p == 0.0);
  CHECK(run.corr.c_pp == 0.0);
}

TEST_CASE("variance is continuous and monotone at small optical density") {
  double prev = 1.0;
  for (double a : {0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    const double v = compute_squeezing(equal_fields(a, 1.0, 0.2)).variance;
    CHECK(v <= prev + 1e-6);
    CHECK(v > 0.9);
    prev = v;
  }
  const double tiny = compute_squeezing(equal_fields(1e-6, 1.0, 0.2)).variance;
  CHECK(std::abs(tiny - 1.0) < 1e-6);
}

TEST_CASE("OD 1000 reference point") {
  const SqueezingResult r = compute_squeezing(equal_fields(1000, 1.0, 0.01));
  CHECK(r.variance == doctest::Approx(0.076624).epsilon(1e-4));
  CHECK(r.variance <= 0.1);
  CHECK(r.params_echo == equal_fields(1000, 1.0, 0.01));
}

TEST_CASE("joint refinement converges the moments") {
  const SystemParams p = equal_fields(1000, 1.0, 0.01);
  const SqueezingRun run = run_squeezing(p);
  const MeanFieldSolution finer = propagate_mean_fixed(p, run.mean.steps * 2);
  const CorrelationState c = propagate_correlations(p, finer);
  CHECK(moment_distance(c, run.corr) <= 1e-6 * moment_scale(c));
}
