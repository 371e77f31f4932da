#include "doctest.h"

#include "cptsq/atomic.hpp"
#include "cptsq/meanfield.hpp"
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

}  // namespace

TEST_CASE("dark-state transparency keeps the fields constant") {
  const SystemParams p = equal_fields(1000, 1.0, 0.0);
  const MeanFieldSolution m = propagate_mean_fixed(p, 400);
  for (std::size_t k = 0; k < m.profile.xi.size(); ++k) {
    CHECK(std::abs(m.profile.omega_p[k] - 1.0) <= 1e-10);
    CHECK(std::abs(m.profile.omega_c[k] - 1.0) <= 1e-10);
  }
  const Transmission t = transmission(m.profile);
  CHECK(std::abs(t.probe - 1.0) <= 1e-9);
  CHECK(std::abs(t.coupling - 1.0) <= 1e-9);
}

TEST_CASE("empty medium returns the inputs exactly") {
  SystemParams p = equal_fields(0.0, 1.0, 0.05);
  p.omega_p0 = cplx{0.3, 0.7};
  const MeanFieldSolution m = propagate_mean(p);
  for (std::size_t k = 0; k < m.profile.xi.size(); ++k) {
    CHECK(m.profile.omega_p[k] == p.omega_p0);
    CHECK(m.profile.omega_c[k] == p.omega_c0);
  }
}

TEST_CASE("small-epsilon phase and attenuation") {
  const SystemParams p = equal_fields(1000, 1.0, 0.01);
  const MeanFieldSolution m = propagate_mean(p);
  const double phase = std::arg(m.profile.omega_p.back() / p.omega_p0);
  CHECK(std::abs(phase) == doctest::Approx(2.5).epsilon(0.05));
  const Transmission t = transmission(m.profile);
  CHECK(t.probe == doctest::Approx(std::exp(-0.05)).epsilon(0.10));
}

TEST_CASE("profile grid layout") {
  const MeanFieldSolution m = propagate_mean_fixed(equal_fields(100, 1.0, 0.02), 37);
  REQUIRE(m.profile.xi.size() == 38);
  REQUIRE(m.profile.omega_p.size() == 38);
  REQUIRE(m.profile.omega_c.size() == 38);
  REQUIRE(m.stages.size() == 37);
  CHECK(m.profile.xi.front() == 0.0);
  CHECK(m.profile.xi.back() == 1.0);
  for (std::size_t k = 1; k < m.profile.xi.size(); ++k)
    CHECK(m.profile.xi[k] > m.profile.xi[k - 1]);
}

TEST_CASE("stage cache holds the local steady states") {
  const SystemParams p = equal_fields(300, 1.2, 0.03);
  const MeanFieldSolution m = propagate_mean_fixed(p, 50);
  for (int n : {0, 17, 49})
    for (const StagePoint& st : m.stages[n]) {
      const AtomicState s = steady_state(p, st.omega_p, st.omega_c);
      CHECK(s.x == st.state.x);
    }
  CHECK(m.stages[0][0].omega_p == p.omega_p0);
  CHECK(m.stages[49][3].xi == doctest::Approx(1.0));
}

TEST_CASE("energy passivity over random draws") {
  oracle::DrawSource src(31);
  for (int n = 0; n < 40; ++n) {
    const oracle::Draw d = src.next(3000, 3.0, 0.1, 0.3);
    const SystemParams p = d.params();
    const MeanFieldSolution m = propagate_mean(p);
    const Transmission t = transmission(m.profile);
    const double in = std::norm(p.omega_p0) + std::norm(p.omega_c0);
    const double out =
        t.probe * std::norm(p.omega_p0) + t.coupling * std::norm(p.omega_c0);
    CHECK(out <= in + 1e-9);
    CHECK(t.probe <= 1.0 + 1e-9);
  }
}

TEST_CASE("probe/coupling exchange symmetry") {
  for (double delta : {0.005, 0.02, -0.04}) {
    const MeanFieldSolution m = propagate_mean(equal_fields(1000, 1.3, delta));
    for (std::size_t k = 0; k < m.profile.xi.size(); ++k)
      CHECK(std::abs(std::abs(m.profile.omega_p[k]) -
                     std::abs(m.profile.omega_c[k])) <= 1e-8);
  }
}

TEST_CASE("grid refinement converges") {
  const SystemParams p = equal_fields(3000, 1.0, 0.005);
  const MeanFieldSolution m = propagate_mean(p);
  CHECK(m.steps >= p.xi_steps * 2);
  CHECK(m.refinement_change < 1e-6);
  const MeanFieldSolution finer = propagate_mean_fixed(p, m.steps * 2);
  CHECK(end_field_change(m, finer) < 1e-6);
}

TEST_CASE("refinement failure is reported") {
  SystemParams p = equal_fields(1000, 1.0, 0.05);
  p.xi_steps = 2;
  PropagationOptions o;
  o.max_doublings = 1;
  CHECK_THROWS_AS(propagate_mean(p, o), NonConvergence);
}

TEST_CASE("refinement can be switched off") {
  SystemParams p = equal_fields(100, 1.0, 0.02);
  p.xi_steps = 64;
  PropagationOptions o;
  o.refine = false;
  CHECK(propagate_mean(p, o).steps == 64);
}

TEST_CASE("transmission edge cases") {
  FieldProfile f;
  f.xi = {0.0, 1.0};
  f.omega_p = {1.0, 1.0};
  f.omega_c = {2.0, 2.0};
  Transmission t = transmission(f);
  CHECK(t.probe == 1.0);
  CHECK(t.coupling == 1.0);

  f.omega_c = {0.0, 0.0};
  CHECK(transmission(f).coupling == 1.0);

  f.omega_p = {0.0, 0.0};
  f.omega_c = {1.0, 1.0};
  CHECK_THROWS_AS(transmission(f), InvalidParams);
}

TEST_CASE("input validation") {
  SystemParams p;
  p.alpha = 10;
  CHECK_THROWS_AS(propagate_mean(p), InvalidParams);
  p.omega_p0 = 1.0;
  p.alpha = -1;
  CHECK_THROWS_AS(propagate_mean(p), InvalidParams);
}
