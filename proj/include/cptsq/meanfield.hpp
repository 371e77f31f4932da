#pragma once

// Steady-state Maxwell-Bloch propagation of the mean Rabi envelopes:
//   d Omega_p / d xi = i (Gamma alpha / 2) sigma13,
//   d Omega_c / d xi = i (Gamma alpha / 2) sigma23,
// with the Bloch steady state re-solved at every Runge-Kutta stage.

#include <array>
#include <utility>
#include <vector>

#include "cptsq/model.hpp"

namespace cptsq {

/// Local fields and the atomic steady state at one RK4 stage point.
struct StagePoint {
  double xi = 0.0;
  cplx omega_p{};
  cplx omega_c{};
  AtomicState state;
};

struct MeanFieldSolution {
  FieldProfile profile;  // steps + 1 nodes
  /// stages[n] are the four RK4 stage points of step n -> n+1.
  std::vector<std::array<StagePoint, 4>> stages;
  int steps = 0;
  /// Relative end-field change against the previous (coarser) grid; 0 when
  /// no refinement was run.
  double refinement_change = 0.0;
};

struct PropagationOptions {
  bool refine = true;
  int max_doublings = 4;
  double mean_tol = 1e-6;  // relative change of the output fields
  double corr_tol = 1e-6;  // change of the output moments / (1 + max |moment|)
};

/// Fixed-grid RK4 with `steps` intervals on xi in [0, 1].
MeanFieldSolution propagate_mean_fixed(const SystemParams& p, int steps);

/// Starts at p.xi_steps and doubles the grid until the output fields change
/// by less than opts.mean_tol; returns the finest solution. Throws
/// NonConvergence after opts.max_doublings doublings.
MeanFieldSolution propagate_mean(const SystemParams& p,
                                 const PropagationOptions& opts = {});

/// Relative change between the end fields of two solutions.
double end_field_change(const MeanFieldSolution& coarse,
                        const MeanFieldSolution& fine);

struct Transmission {
  double probe = 1.0;
  double coupling = 1.0;
};

/// Output / input intensity ratios. The coupling transmission is 1 for a
/// zero coupling input; a zero probe input is an error.
Transmission transmission(const FieldProfile& profile);

}  // namespace cptsq
