#include "doctest.h"

#include "cptsq/model.hpp"

using namespace cptsq;

namespace {

RawParams basic(double alpha, double delta, double omega) {
  RawParams r;
  r.alpha = alpha;
  r.delta = delta;
  r.omega = cplx{omega, 0.0};
  return r;
}

}  // namespace

TEST_CASE("symmetric setting splits delta evenly") {
  RawParams r = basic(1000, 0.02, 1.0);
  r.setting = "symmetric";
  const SystemParams p = validate_params(r);
  CHECK(p.delta_p == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(p.delta_c == doctest::Approx(-0.01).epsilon(1e-15));
  CHECK(p.omega_p0 == cplx{1.0, 0.0});
  CHECK(p.omega_c0 == cplx{1.0, 0.0});
  CHECK(p.delta == p.delta_p - p.delta_c);
}

TEST_CASE("symmetric is the default setting") {
  const SystemParams p = validate_params(basic(1000, 0.02, 1.0));
  CHECK(p.delta_p == 0.01);
  CHECK(p.delta_c == -0.01);
}

TEST_CASE("named settings") {
  CHECK(split_detuning(DetuningSetting::probe_only, 0.02) ==
        std::pair{0.02, 0.0});
  CHECK(split_detuning(DetuningSetting::coupling_only, 0.02) ==
        std::pair{0.0, -0.02});
  for (auto s : kAllSettings) {
    CHECK(parse_detuning_setting(to_string(s)) == s);
    for (double d : {0.02, -0.013, 1e-7, 0.3}) {
      const auto [dp, dc] = split_detuning(s, d);
      CHECK(dp - dc == d);
    }
  }
  CHECK_THROWS_AS(parse_detuning_setting("both"), InvalidParams);
}

TEST_CASE("vacuum medium is valid") {
  RawParams r;
  r.alpha = 0.0;
  r.delta = 0.0;
  r.delta_p = 0.0;
  r.delta_c = 0.0;
  r.omega = cplx{1.0, 0.0};
  const SystemParams p = validate_params(r);
  CHECK(p.alpha == 0.0);
  CHECK(p.delta == 0.0);
}

TEST_CASE("inconsistent explicit detunings are rejected") {
  RawParams r;
  r.alpha = 100.0;
  r.delta = 0.1;
  r.delta_p = 0.2;
  r.delta_c = 0.0;
  r.omega = cplx{1.0, 0.0};
  CHECK_THROWS_AS(validate_params(r), InvalidParams);

  r.delta = 0.2;
  const SystemParams p = validate_params(r);
  CHECK(p.delta == 0.2);
}

TEST_CASE("invalid records") {
  CHECK_THROWS_AS(validate_params(basic(-1, 0.01, 1)), InvalidParams);
  CHECK_THROWS_AS(validate_params(basic(NAN, 0.01, 1)), InvalidParams);
  CHECK_THROWS_AS(validate_params(basic(10, INFINITY, 1)), InvalidParams);
  CHECK_THROWS_AS(validate_params(basic(10, 0.01, NAN)), InvalidParams);

  RawParams r = basic(10, 0.01, 1);
  r.xi_steps = 1;
  CHECK_THROWS_AS(validate_params(r), InvalidParams);

  r = basic(10, 0.01, 1);
  r.gamma12 = -0.1;
  CHECK_THROWS_AS(validate_params(r), InvalidParams);

  r = basic(10, 0.01, 1);
  r.setting = "symmetric";
  r.delta_p = 0.01;
  r.delta_c = 0.0;
  CHECK_THROWS_AS(validate_params(r), InvalidParams);

  r = basic(10, 0.01, 1);
  r.delta_p = 0.01;
  CHECK_THROWS_AS(validate_params(r), InvalidParams);

  RawParams missing;
  missing.delta = 0.01;
  missing.omega = cplx{1.0, 0.0};
  CHECK_THROWS_AS(validate_params(missing), InvalidParams);
}

TEST_CASE("field requirement") {
  SystemParams p;
  CHECK_THROWS_AS(require_input_field(p), InvalidParams);
  p.omega_c0 = 0.5;
  CHECK_NOTHROW(require_input_field(p));
}

TEST_CASE("individual fields override the common omega") {
  RawParams r = basic(10, 0.01, 1.0);
  r.omega_p0 = cplx{0.1, 0.2};
  const SystemParams p = validate_params(r);
  CHECK(p.omega_p0 == cplx{0.1, 0.2});
  CHECK(p.omega_c0 == cplx{1.0, 0.0});
}

TEST_CASE("merge keeps unset fields") {
  RawParams a = basic(10, 0.01, 1.0);
  RawParams b;
  b.alpha = 20;
  a.merge(b);
  CHECK(*a.alpha == 20);
  CHECK(*a.delta == 0.01);
}

TEST_CASE("construction is deterministic") {
  RawParams r = basic(731.5, -0.0173, 1.3);
  r.setting = "coupling-only";
  r.lc = 0.5;
  CHECK(validate_params(r) == validate_params(r));
}

TEST_CASE("dB round trip") {
  for (double v : {1e-4, 0.0766, 0.5, 1.0, 3.7, 1e3}) {
    CHECK(from_db(to_db(v)) == doctest::Approx(v).epsilon(1e-12));
  }
  CHECK(to_db(0.1) == doctest::Approx(-10.0));
}

TEST_CASE("sigma indexing matches the state ordering") {
  AtomicState s;
  for (int k = 0; k < 9; ++k) s.x(k) = cplx(k, 0);
  CHECK(s.sigma(3, 1) == cplx(idx::s31, 0));
  CHECK(s.sigma(1, 3) == cplx(idx::s13, 0));
  CHECK(s.sigma(2, 3) == cplx(idx::s23, 0));
  CHECK(s.density_matrix()(0, 1) == cplx(idx::s12, 0));
  for (int k = 0; k < 9; ++k) CHECK(idx::adjoint[idx::adjoint[k]] == k);
}
