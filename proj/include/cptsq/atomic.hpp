#pragma once

// Steady-state optical Bloch response of the Lambda system and the linear
// response of its fluctuations to the field fluctuations.

#include "cptsq/model.hpp"

namespace cptsq {

/// The 8 linear-response coefficients of s13 (index 1) and s23 (index 2)
/// with respect to (u_p, u_p^dag, u_c, u_c^dag).
struct ResponseCoefficients {
  cplx a1, b1, c1, d1;
  cplx a2, b2, c2, d2;
};

struct ResponseBundle {
  AtomicState state;
  Mat9 m1;
  Mat9 t;  // -M1^{-1}
  Mat94 m2;
  Mat9 d;  // Langevin diffusion matrix <r r^dag>
  ResponseCoefficients coeffs;
  Mat49 v4x9;  // rows (T_9, -T_1, T_8, -T_2)
};

/// Bloch matrix with the fields and their conjugates as independent
/// arguments. build_m1(p, wp, wc) == build_m1_general(p, wp, conj(wp), wc,
/// conj(wc)); the general form exists so the field derivatives can be taken
/// one argument at a time.
Mat9 build_m1_general(const SystemParams& p, cplx omega_p, cplx omega_p_conj,
                      cplx omega_c, cplx omega_c_conj);

Mat9 build_m1(const SystemParams& p, cplx omega_p, cplx omega_c);

/// Right-hand side b of M1 x = b (population conservation in row 6).
Vec9 steady_rhs();

/// Solves M1 x = b with partial pivoting. Throws SingularSystem when the
/// reciprocal condition estimate drops below 1e-14.
AtomicState steady_state(const SystemParams& p, cplx omega_p, cplx omega_c);

/// Same as steady_state, for an already assembled Bloch matrix.
AtomicState solve_steady_state(const Mat9& m1);

/// -M^{-1}, with the same singularity check as steady_state.
Mat9 negative_inverse(const Mat9& m, const char* what);

Mat94 build_m2(const AtomicState& s);

Mat9 build_diffusion(const AtomicState& s, const SystemParams& p);

/// Rows 9 (s13) and 8 (s23) of T * M2.
ResponseCoefficients extract_coefficients(const Mat9& t, const Mat94& m2);

/// Rows (T_9, -T_1, T_8, -T_2) mapping the Langevin forces onto the field
/// noise vector.
Mat49 noise_projection(const Mat9& t);

ResponseBundle response_coefficients(const SystemParams& p, cplx omega_p,
                                     cplx omega_c);

/// Builds the bundle around a state already solved at these fields.
ResponseBundle response_from_state(const SystemParams& p, cplx omega_p,
                                   cplx omega_c, const AtomicState& state);

}  // namespace cptsq
