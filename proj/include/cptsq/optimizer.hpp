#pragma once

// Parameter studies over the full numerical model. One-dimensional searches
// evaluate a coarse logarithmic grid (concurrently when requested), then
// refine around the best cell by golden section.

#include <optional>
#include <string>
#include <vector>

#include "cptsq/correlations.hpp"
#include "cptsq/parallel.hpp"

namespace cptsq {

/// One evaluated parameter value. `error` is empty on success; failed cells
/// carry variance = +inf and the error text.
struct ScanPoint {
  double x = 0.0;
  double variance = 1.0;
  double transmission_p = 1.0;
  double transmission_c = 1.0;
  std::string error;

  bool ok() const { return error.empty(); }
};

struct ScanResult {
  std::string axis;               // "omega" or "delta", in Gamma
  std::vector<ScanPoint> points;  // coarse grid, ascending
  double arg_min = 0.0;
  double min_value = 1.0;
  /// Full result at the reported optimum.
  SqueezingResult at_min;
  /// Golden-section bracket; equals the coarse neighbours of the best cell.
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  /// False when the best coarse cell sits on the grid edge, when the grid is
  /// flat, or when refinement did not improve on the best cell.
  bool interior = false;
};

struct ScanOptions {
  /// Fields other than alpha, the scanned axis, the fields and the detunings
  /// (gamma12, lc, xi_steps, gamma1, gamma2) are taken from here.
  SystemParams base;
  std::optional<double> lo, hi, tol;  // per-operation defaults when unset
  std::optional<int> coarse_points;
  PropagationOptions propagation;
  Execution execution = Execution::parallel;
};

/// Parameters for one evaluation: Omega_p0 = ratio * omega, Omega_c0 = omega,
/// detunings split by `setting`.
SystemParams make_params(const SystemParams& base, double alpha, double omega,
                         double delta, DetuningSetting setting,
                         double ratio = 1.0);

/// Single evaluation that records failures instead of throwing.
ScanPoint evaluate_point(const SystemParams& p, const PropagationOptions& opts,
                         double x);

/// Omega in [0.1, 4] on 25 log-spaced points, golden section to 1e-3.
/// Throws InvalidParams for delta == 0, where CPT transparency makes V == 1.
ScanResult optimize_over_rabi(double alpha, double delta,
                              DetuningSetting setting,
                              const ScanOptions& opts = {});

/// delta in [1e-4, 0.3] on 31 log-spaced points, golden section to 1e-5.
ScanResult optimize_over_detuning(double alpha, double omega,
                                  DetuningSetting setting,
                                  const ScanOptions& opts = {},
                                  double ratio = 1.0);

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  int points = 2;
  bool log = false;

  std::vector<double> values() const;
};

struct SweepCell {
  double omega = 0.0;
  double delta = 0.0;
  std::optional<SqueezingResult> result;
  std::string error;
};

struct SweepMap {
  std::vector<double> omega;  // rows
  std::vector<double> delta;  // columns
  std::vector<SweepCell> cells;  // row-major, omega.size() x delta.size()

  const SweepCell& at(std::size_t i, std::size_t j) const {
    return cells[i * delta.size() + j];
  }
};

/// Dense (omega, delta) evaluation; per-cell failures never abort the sweep.
SweepMap sweep_map(double alpha, const Axis& omega, const Axis& delta,
                   DetuningSetting setting, const ScanOptions& opts = {});

struct RatioEntry {
  double ratio = 1.0;
  ScanResult scan;  // over delta with Omega_p0 = ratio * Omega_c0
};

std::vector<RatioEntry> ratio_scan(double alpha, double omega_c,
                                   const std::vector<double>& ratios,
                                   const ScanOptions& opts = {});

struct SettingEntry {
  DetuningSetting setting = DetuningSetting::symmetric;
  ScanResult scan;  // over Omega
  /// Variance at the caller's reference Rabi frequency, if one was given.
  std::optional<ScanPoint> reference;
};

/// optimize_over_rabi for each named setting.
std::vector<SettingEntry> detuning_setting_compare(
    double alpha, double delta, std::optional<double> reference_omega = {},
    const ScanOptions& opts = {});

/// Largest pairwise |V_dB| difference between the setting optima.
double max_setting_spread_db(const std::vector<SettingEntry>& table);

/// V(delta) - V(-delta) under the given setting, reported as a diagnostic.
double sign_asymmetry(double alpha, double omega, double delta,
                      DetuningSetting setting, const ScanOptions& opts = {});

}  // namespace cptsq
