#include "cptsq/atomic.hpp"

#include <Eigen/LU>
#include <cstdio>
#include <string>

namespace cptsq {

namespace {

constexpr double kMinRcond = 1e-14;
constexpr double kRefineResidual = 1e-10;

// Eigen's condition estimate is not reliable for exactly singular factors
// (a zero pivot can still report a moderate rcond), so zero pivots are
// screened first.
double checked_rcond(const Eigen::PartialPivLU<Mat9>& lu) {
  const auto piv = lu.matrixLU().diagonal().cwiseAbs();
  if (!(piv.minCoeff() > 0.0) || !piv.allFinite()) return 0.0;
  return lu.rcond();
}

std::string format_rcond(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", r);
  return buf;
}

}  // namespace

Mat9 build_m1_general(const SystemParams& p, cplx wp, cplx wpc, cplx wc,
                      cplx wcc) {
  using namespace idx;
  const double g = p.gamma;
  const cplx g13 = g / 2.0 - I * p.delta_p;  // gamma~13
  const cplx g23 = g / 2.0 - I * p.delta_c;  // gamma~23
  const cplx h = I / 2.0;

  Mat9 m = Mat9::Zero();
  m(s31, s31) = -std::conj(g13);
  m(s31, s21) = -h * wcc;
  m(s31, s11) = -h * wpc;
  m(s31, s33) = h * wpc;

  m(s32, s32) = -std::conj(g23);
  m(s32, s22) = -h * wcc;
  m(s32, s33) = h * wcc;
  m(s32, s12) = -h * wpc;

  m(s21, s31) = -h * wc;
  m(s21, s21) = -(p.gamma12 + I * p.delta);
  m(s21, s23) = h * wpc;

  m(s11, s31) = -h * wp;
  m(s11, s33) = g / 2.0;
  m(s11, s13) = h * wpc;

  m(s22, s32) = -h * wc;
  m(s22, s33) = g / 2.0;
  m(s22, s23) = h * wcc;

  // Population conservation replaces the s33 equation.
  m(s33, s11) = 1.0;
  m(s33, s22) = 1.0;
  m(s33, s33) = 1.0;

  m(s12, s32) = -h * wp;
  m(s12, s12) = -(p.gamma12 - I * p.delta);
  m(s12, s13) = h * wcc;

  m(s23, s21) = h * wp;
  m(s23, s22) = h * wc;
  m(s23, s33) = -h * wc;
  m(s23, s23) = -g23;

  m(s13, s11) = h * wp;
  m(s13, s33) = -h * wp;
  m(s13, s12) = h * wc;
  m(s13, s13) = -g13;
  return m;
}

Mat9 build_m1(const SystemParams& p, cplx omega_p, cplx omega_c) {
  return build_m1_general(p, omega_p, std::conj(omega_p), omega_c,
                          std::conj(omega_c));
}

Vec9 steady_rhs() {
  Vec9 b = Vec9::Zero();
  b(idx::s33) = 1.0;
  return b;
}

AtomicState solve_steady_state(const Mat9& m1) {
  Eigen::PartialPivLU<Mat9> lu(m1);
  const double rcond = checked_rcond(lu);
  if (!(rcond >= kMinRcond))
    throw SingularSystem("Bloch matrix is singular (rcond = " +
                         format_rcond(rcond) +
                         "); fields too weak for a unique dark state");
  const Vec9 b = steady_rhs();
  AtomicState s;
  s.x = lu.solve(b);
  for (int it = 0; it < 3; ++it) {
    const Vec9 r = b - m1 * s.x;
    if (r.cwiseAbs().maxCoeff() <= kRefineResidual) break;
    s.x += lu.solve(r);
  }
  if (!s.x.allFinite())
    throw SingularSystem("Bloch steady state is not finite");
  return s;
}

AtomicState steady_state(const SystemParams& p, cplx omega_p, cplx omega_c) {
  return solve_steady_state(build_m1(p, omega_p, omega_c));
}

Mat9 negative_inverse(const Mat9& m, const char* what) {
  Eigen::PartialPivLU<Mat9> lu(m);
  const double rcond = checked_rcond(lu);
  if (!(rcond >= kMinRcond))
    throw SingularSystem(std::string(what) + " is singular (rcond = " +
                         format_rcond(rcond) + ")");
  return -lu.inverse();
}

Mat94 build_m2(const AtomicState& s) {
  using namespace idx;
  const cplx x31 = s[s31], x32 = s[s32], x21 = s[s21], x11 = s[s11],
             x22 = s[s22], x33 = s[s33], x12 = s[s12], x23 = s[s23],
             x13 = s[s13];
  Mat94 m = Mat94::Zero();
  // Columns: u_p, u_p^dag, u_c, u_c^dag.
  m(s31, 1) = -I * (x11 - x33);
  m(s31, 3) = -I * x21;
  m(s32, 1) = -I * x12;
  m(s32, 3) = -I * (x22 - x33);
  m(s21, 1) = I * x23;
  m(s21, 2) = -I * x31;
  m(s11, 0) = -I * x31;
  m(s11, 1) = I * x13;
  m(s22, 2) = -I * x32;
  m(s22, 3) = I * x23;
  m(s12, 0) = -I * x32;
  m(s12, 3) = I * x13;
  m(s23, 0) = I * x21;
  m(s23, 2) = I * (x22 - x33);
  m(s13, 0) = I * (x11 - x33);
  m(s13, 2) = I * x12;
  return 0.5 * m;
}

Mat9 build_diffusion(const AtomicState& s, const SystemParams& p) {
  using namespace idx;
  const double g = p.gamma, g1 = p.gamma1, g2 = p.gamma2;
  const cplx x31 = s[s31], x32 = s[s32], x21 = s[s21], x11 = s[s11],
             x22 = s[s22], x33 = s[s33], x12 = s[s12], x23 = s[s23],
             x13 = s[s13];
  Mat9 d = Mat9::Zero();
  d(s21, s21) = g2 * x33;
  d(s11, s11) = g1 * x33;
  d(s11, s23) = -g1 * x32;
  d(s11, s13) = -g1 * x31;
  d(s22, s22) = g2 * x33;
  d(s22, s23) = -g2 * x32;
  d(s22, s13) = -g2 * x31;
  d(s12, s12) = g1 * x33;
  d(s23, s11) = -g1 * x23;
  d(s23, s22) = -g2 * x23;
  d(s23, s23) = g2 * x33 + g * x22;
  d(s23, s13) = g * x21;
  d(s13, s11) = -g1 * x13;
  d(s13, s22) = -g2 * x13;
  d(s13, s23) = g * x12;
  d(s13, s13) = g1 * x33 + g * x11;
  return d;
}

ResponseCoefficients extract_coefficients(const Mat9& t, const Mat94& m2) {
  const Eigen::Matrix<cplx, 1, 4> r13 = t.row(idx::s13) * m2;
  const Eigen::Matrix<cplx, 1, 4> r23 = t.row(idx::s23) * m2;
  return {r13(0), r13(1), r13(2), r13(3), r23(0), r23(1), r23(2), r23(3)};
}

Mat49 noise_projection(const Mat9& t) {
  Mat49 v;
  v.row(0) = t.row(idx::s13);
  v.row(1) = -t.row(idx::s31);
  v.row(2) = t.row(idx::s23);
  v.row(3) = -t.row(idx::s32);
  return v;
}

ResponseBundle response_from_state(const SystemParams& p, cplx omega_p,
                                   cplx omega_c, const AtomicState& state) {
  ResponseBundle b;
  b.state = state;
  b.m1 = build_m1(p, omega_p, omega_c);
  b.t = negative_inverse(b.m1, "Bloch matrix");
  b.m2 = build_m2(state);
  b.d = build_diffusion(state, p);
  b.coeffs = extract_coefficients(b.t, b.m2);
  b.v4x9 = noise_projection(b.t);
  return b;
}

ResponseBundle response_coefficients(const SystemParams& p, cplx omega_p,
                                     cplx omega_c) {
  return response_from_state(p, omega_p, omega_c,
                             steady_state(p, omega_p, omega_c));
}

}  // namespace cptsq
