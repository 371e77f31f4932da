#pragma once

// Propagation of the second moments of the field fluctuations
// a = (a_p, a_p^dag, a_c, a_c^dag):
//   d/dxi a = C a + N,   d/dxi <a a^dag> = C <a a^dag> + <a a^dag> C^dag + Z.
// Two equivalent routes are provided: the six scalar moment equations and the
// full 4x4 matrix equation.

#include <array>
#include <functional>

#include "cptsq/atomic.hpp"
#include "cptsq/meanfield.hpp"

namespace cptsq {

struct LocalNoiseMatrices {
  Mat4 c4;  // drift C
  Mat4 z4;  // noise Z = <N N^dag>
};

/// Builds C and Z at the local fields (solves the local steady state).
LocalNoiseMatrices local_matrices(const SystemParams& p, cplx omega_p,
                                  cplx omega_c);
LocalNoiseMatrices local_matrices(const SystemParams& p,
                                  const ResponseBundle& bundle);
/// Reuses the steady state cached at a propagation stage point.
LocalNoiseMatrices local_matrices(const SystemParams& p,
                                  const StagePoint& stage);

/// Drift matrix from the linear-response coefficients; the second and fourth
/// rows are the negated conjugate pattern of the first and third.
Mat4 drift_matrix(const SystemParams& p, const ResponseCoefficients& k);

/// n1..n6 assembled directly from the effective Langevin operators
/// f13 = sum_k T_9k F_k and f23 = sum_k T_8k F_k with
///   <F_mu F_nu> = D(mu, adj(nu)) c / (N L),  eta = (Gamma alpha / 2g)^2,
/// and alpha = g^2 N L / (c Gamma) eliminating N L / c. The result does not
/// depend on g, which defaults to 1 when unset.
std::array<cplx, 6> noise_terms_from_langevin(const SystemParams& p,
                                              const ResponseBundle& bundle);

/// The same six entries read off Z: (1,2), (2,2), (3,4), (4,4), (1,4), (2,4).
std::array<cplx, 6> noise_terms_from_z(const Mat4& z4);

/// Raw moments in integration order (c_pp, n_p, c_cc, n_c, c_pc, x_pc). The
/// populations are carried as complex numbers so their reality can be
/// checked.
using MomentVector = std::array<cplx, 6>;

/// Called after every completed step with the node position and moments.
using MomentObserver = std::function<void(double xi, const MomentVector&)>;

/// Six scalar moment equations, RK4 on the mean-field grid using the cached
/// stage states. Zero initial moments (coherent input).
CorrelationState propagate_correlations(const SystemParams& p,
                                        const MeanFieldSolution& mean,
                                        const MomentObserver& observer = {});

MomentVector propagate_moments(const SystemParams& p,
                               const MeanFieldSolution& mean,
                               const MomentObserver& observer = {});

/// Matrix route: evolves G = <a a^dag> from diag(1, 0, 1, 0).
Mat4 propagate_correlation_matrix(const SystemParams& p,
                                  const MeanFieldSolution& mean);

CorrelationState moments_from_matrix(const Mat4& g);
CorrelationState to_state(const MomentVector& m);

enum class Field { probe, coupling };

/// 1 + 2 n + 2 Re[exp(-2 i theta) <a a>] for the chosen field.
double quadrature_variance(const CorrelationState& corr, double theta,
                           Field f = Field::probe);

/// (Arg <a a> + pi) / 2 reduced to [0, pi); 0 when <a a> vanishes.
double optimal_angle(cplx c);

SqueezingResult optimal_variance(const CorrelationState& corr,
                                 const FieldProfile& profile,
                                 const SystemParams& p);

/// Full pipeline result, including the moments behind the variance.
struct SqueezingRun {
  MeanFieldSolution mean;
  CorrelationState corr;
  SqueezingResult result;
};

/// Mean field + correlations with joint grid refinement: the grid is doubled
/// until both the output fields and the output moments are converged.
SqueezingRun run_squeezing(const SystemParams& p,
                           const PropagationOptions& opts = {});

SqueezingResult compute_squeezing(const SystemParams& p,
                                  const PropagationOptions& opts = {});

}  // namespace cptsq
