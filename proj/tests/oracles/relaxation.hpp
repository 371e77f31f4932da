#pragma once

// Time-domain reference for the Bloch steady state. The Lindblad generator is
// assembled from the Hamiltonian and jump operators with Kronecker products,
// independently of the library's hand-written Bloch matrix, and the density
// matrix is relaxed by repeated squaring of a short-time propagator.

#include <Eigen/Dense>

#include "cptsq/model.hpp"

namespace oracle {

using cptsq::cplx;
using Mat3 = Eigen::Matrix<cplx, 3, 3>;
using Mat9 = Eigen::Matrix<cplx, 9, 9>;
using Vec9 = Eigen::Matrix<cplx, 9, 1>;

inline Mat9 kron(const Mat3& a, const Mat3& b) {
  Mat9 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
  return r;
}

/// Generator acting on column-major vec(rho), levels 0 = |1>, 1 = |2>,
/// 2 = |3>. Rotating frame: H = Dp |3><3| + delta |2><2|
/// + (Wp/2 |1><3| + Wc/2 |2><3| + h.c.); spontaneous emission with rates
/// gamma1, gamma2 into |1>, |2>; gamma12 damps the ground coherence.
inline Mat9 liouvillian(const cptsq::SystemParams& p, cplx wp, cplx wc) {
  Mat3 h = Mat3::Zero();
  h(2, 2) = p.delta_p;
  h(1, 1) = p.delta_p - p.delta_c;
  h(0, 2) = 0.5 * wp;
  h(2, 0) = 0.5 * std::conj(wp);
  h(1, 2) = 0.5 * wc;
  h(2, 1) = 0.5 * std::conj(wc);
  const Mat3 id = Mat3::Identity();
  const cplx i{0.0, 1.0};
  Mat9 l = -i * (kron(id, h) - kron(h.transpose(), id));
  const double rates[2] = {p.gamma1 * p.gamma, p.gamma2 * p.gamma};
  for (int k = 0; k < 2; ++k) {
    Mat3 j = Mat3::Zero();
    j(k, 2) = std::sqrt(rates[k]);
    const Mat3 jj = j.adjoint() * j;
    l += kron(j.conjugate(), j) - 0.5 * kron(id, jj) -
         0.5 * kron(jj.transpose(), id);
  }
  l(0 + 3 * 1, 0 + 3 * 1) -= p.gamma12;
  l(1 + 3 * 0, 1 + 3 * 0) -= p.gamma12;
  return l;
}

struct Relaxed {
  Mat3 rho;
  int squarings = 0;
  bool converged = false;
};

/// Starts in |1><1| and evolves for 2^k / 1024 time units until doubling the
/// time changes rho by less than 1e-14; the trace is renormalized to absorb
/// rounding drift of the unit eigenvalue.
inline Relaxed relax(const cptsq::SystemParams& p, cplx wp, cplx wc) {
  const Mat9 l = liouvillian(p, wp, wc) / 1024.0;
  Mat9 prop = Mat9::Identity(), term = Mat9::Identity();
  for (int k = 1; k < 20; ++k) {
    term = term * l / static_cast<double>(k);
    prop += term;
  }
  Vec9 r0 = Vec9::Zero();
  r0(0) = 1.0;
  Vec9 r = r0;
  Relaxed out;
  for (int k = 1; k <= 90; ++k) {
    prop = prop * prop;
    const Vec9 prev = r;
    r = prop * r0;
    r /= r(0) + r(4) + r(8);
    out.squarings = k;
    if (k > 12 && (r - prev).cwiseAbs().maxCoeff() < 1e-14) {
      out.converged = true;
      break;
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.rho(i, j) = r(i + 3 * j);
  return out;
}

}  // namespace oracle
