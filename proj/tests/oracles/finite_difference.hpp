#pragma once

// Central finite differences of the steady-state optical coherences with
// respect to the four independent field arguments (Wp, Wp*, Wc, Wc*).

#include <array>

#include "cptsq/atomic.hpp"

namespace oracle {

/// out[r][k]: derivative of s13 (r = 0) or s23 (r = 1) with respect to
/// argument k of build_m1_general.
inline std::array<std::array<cptsq::cplx, 4>, 2> coherence_jacobian(
    const cptsq::SystemParams& p, cptsq::cplx wp, cptsq::cplx wc,
    double step = 1e-6) {
  using cptsq::cplx;
  std::array<std::array<cplx, 4>, 2> out{};
  for (int k = 0; k < 4; ++k) {
    std::array<cplx, 4> plus{wp, std::conj(wp), wc, std::conj(wc)};
    std::array<cplx, 4> minus = plus;
    plus[k] += step;
    minus[k] -= step;
    const auto sp = cptsq::solve_steady_state(
        cptsq::build_m1_general(p, plus[0], plus[1], plus[2], plus[3]));
    const auto sm = cptsq::solve_steady_state(
        cptsq::build_m1_general(p, minus[0], minus[1], minus[2], minus[3]));
    out[0][k] = (sp[cptsq::idx::s13] - sm[cptsq::idx::s13]) / (2.0 * step);
    out[1][k] = (sp[cptsq::idx::s23] - sm[cptsq::idx::s23]) / (2.0 * step);
  }
  return out;
}

}  // namespace oracle
