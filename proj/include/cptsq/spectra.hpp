#pragma once

// Frequency-domain fluctuations. For noise frequency w the extended vector
// (a_p(w), a_p^dag(-w), a_c(w), a_c^dag(-w)) obeys the same kind of linear
// propagation as the zero-frequency moments, with T replaced by
// T'(w) = -(M1 + i w Io)^{-1}, Io = identity with Io(6,6) = 0.

#include <vector>

#include "cptsq/correlations.hpp"
#include "cptsq/parallel.hpp"

namespace cptsq {

struct SpectralMatrices {
  Mat9 t_plus;        // T'(w)
  Mat9 t_minus_conj;  // conj(T'(-w))
  Mat4 c4w;
  Mat4 z4w;
};

/// T'(w). Throws SingularSystem (naming w) if M1 + i w Io is singular.
Mat9 frequency_response(const SystemParams& p, cplx omega_p, cplx omega_c,
                        double w);

/// Drift and noise at one position. Rows 1 and 3 of the drift come from
/// rows s13 and s23 of T'(w) M2; rows 2 and 4 are the conjugated pattern of
/// the same rows at -w. Every diagonal entry also carries the vacuum term
/// i w lc, which is a common phase and drops out of the spectrum.
SpectralMatrices spectral_matrices(const SystemParams& p, cplx omega_p,
                                   cplx omega_c, const AtomicState& state,
                                   double w);
SpectralMatrices spectral_matrices(const SystemParams& p, const StagePoint& st,
                                   double w);

/// Drift and noise only, as used by the propagation loop: four rows of T'(w)
/// are solved for and T'(-w) is obtained through the conjugation symmetry
/// T'(-w)[i, j] = conj(T'(w)[adj(i), adj(j)]) instead of a second inverse.
void spectral_matrices_fast(const SystemParams& p, const StagePoint& st,
                            double w, Mat4& c4w, Mat4& z4w);

/// Spectral correlation matrix at the output for one frequency, on the grid
/// and stage states of an already propagated mean field.
Mat4 propagate_spectral_matrix(const SystemParams& p,
                               const MeanFieldSolution& mean, double w);

/// S(w; theta) = G11 + G22 + 2 Re[exp(-2 i theta) G12].
double spectrum_value(const Mat4& g, double theta);
/// Minimum over theta: G11 + G22 - 2 |G12|.
double spectrum_optimal(const Mat4& g);

struct SpectrumOptions {
  PropagationOptions propagation;
  Execution execution = Execution::parallel;
  /// By default the spectrum is propagated on the starting grid
  /// (p.xi_steps) once zero-frequency refinement has accepted it; true uses
  /// the finest grid of the refinement instead.
  bool on_refined_grid = false;
};

/// Propagates the mean field once (with grid refinement), fixes the angle at
/// the zero-frequency optimum and evaluates S and S_opt on w_grid. Per-point
/// failures are recorded and leave NaN in the spectrum. bandwidth and period
/// are filled from spectrum_features, or NaN when undefined.
SpectrumResult squeezing_spectrum(const SystemParams& p,
                                  const std::vector<double>& w_grid,
                                  const SpectrumOptions& opts = {});

struct SpectrumFeatures {
  double bandwidth = 0.0;
  double period = 0.0;
  /// True when the spectrum is still squeezed at the last grid frequency, so
  /// the bandwidth is only a lower bound.
  bool bandwidth_truncated = false;
};

/// Bandwidth: upper edge of the squeezed band of the optimal-angle spectrum,
/// i.e. where S_opt last rises through 1 before its first local minimum that
/// is no longer below 1 (falls back to the fixed-angle S when S_opt is
/// empty). Period: mean spacing of the local maxima of the fixed-angle S
/// inside [0, bandwidth]; with fewer than two maxima, twice the mean spacing
/// of all extrema there, counting w = 0.
/// Uses the w >= 0 part of the grid, which must start at w = 0. Throws
/// FeatureUndefined when S(0) >= 1 or no oscillation is resolved.
SpectrumFeatures spectrum_features(const SpectrumResult& spec);

/// Largest |S(w) - S(-w)| over frequency pairs present in the grid; 0 when
/// the grid has no such pairs.
double spectrum_asymmetry(const SpectrumResult& spec);

}  // namespace cptsq
