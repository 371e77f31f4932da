#include "cptsq/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cptsq/golden.hpp"

namespace cptsq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> v(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i)
    v[i] = std::exp(a + (b - a) * i / (n - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

// Coarse grid, then golden section between the neighbours of the best cell.
template <class MakeParams>
ScanResult scan_1d(const char* axis, const std::vector<double>& grid,
                   double tol, const ScanOptions& opts,
                   const MakeParams& make) {
  ScanResult r;
  r.axis = axis;
  r.points.resize(grid.size());
  for_each_index(grid.size(), opts.execution, [&](std::size_t i) {
    r.points[i] = evaluate_point(make(grid[i]), opts.propagation, grid[i]);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < r.points.size(); ++i)
    if (r.points[i].variance < r.points[best].variance) best = i;
  const ScanPoint& b = r.points[best];
  r.arg_min = b.x;
  r.min_value = b.variance;
  r.bracket_lo = r.points[best == 0 ? 0 : best - 1].x;
  r.bracket_hi = r.points[std::min(best + 1, r.points.size() - 1)].x;

  const bool any_ok = std::any_of(r.points.begin(), r.points.end(),
                                  [](const ScanPoint& p) { return p.ok(); });
  if (!any_ok)
    throw NonConvergence(std::string("every coarse ") + axis +
                         " cell failed: " + r.points.front().error);

  const bool flat = std::all_of(
      r.points.begin(), r.points.end(),
      [&](const ScanPoint& p) { return !p.ok() || p.variance == b.variance; });
  const bool edge = best == 0 || best + 1 == r.points.size();
  if (!flat && !edge) {
    auto f = [&](double x) {
      return evaluate_point(make(x), opts.propagation, x).variance;
    };
    const GoldenResult g = golden_section(f, r.bracket_lo, r.bracket_hi, tol);
    // Keep the coarse cell if refinement did not improve on it (the bracket
    // was not unimodal).
    if (g.fx < b.variance) {
      r.arg_min = g.x;
      r.min_value = g.fx;
      r.interior = true;
    }
  }
  r.at_min = compute_squeezing(make(r.arg_min), opts.propagation);
  r.min_value = r.at_min.variance;
  return r;
}

}  // namespace

SystemParams make_params(const SystemParams& base, double alpha, double omega,
                         double delta, DetuningSetting setting, double ratio) {
  SystemParams p = base;
  p.alpha = alpha;
  p.delta = delta;
  std::tie(p.delta_p, p.delta_c) = split_detuning(setting, delta);
  p.delta = p.delta_p - p.delta_c;
  p.omega_p0 = ratio * omega;
  p.omega_c0 = omega;
  check_params(p);
  return p;
}

ScanPoint evaluate_point(const SystemParams& p, const PropagationOptions& opts,
                         double x) {
  ScanPoint pt;
  pt.x = x;
  try {
    const SqueezingResult r = compute_squeezing(p, opts);
    pt.variance = r.variance;
    pt.transmission_p = r.transmission_p;
    pt.transmission_c = r.transmission_c;
  } catch (const SimulationError& e) {
    pt.variance = kInf;
    pt.transmission_p = pt.transmission_c = std::nan("");
    pt.error = e.what();
  }
  return pt;
}

ScanResult optimize_over_rabi(double alpha, double delta,
                              DetuningSetting setting,
                              const ScanOptions& opts) {
  if (delta == 0.0)
    throw InvalidParams(
        "optimize-rabi needs delta != 0: at two-photon resonance the medium "
        "is CPT-transparent and V == 1 for every Rabi frequency");
  const auto grid = log_grid(opts.lo.value_or(0.1), opts.hi.value_or(4.0),
                             opts.coarse_points.value_or(25));
  return scan_1d("omega", grid, opts.tol.value_or(1e-3), opts,
                 [&](double w) {
                   return make_params(opts.base, alpha, w, delta, setting);
                 });
}

ScanResult optimize_over_detuning(double alpha, double omega,
                                  DetuningSetting setting,
                                  const ScanOptions& opts, double ratio) {
  if (!(omega > 0.0))
    throw InvalidParams("optimize-detuning needs omega > 0");
  const auto grid = log_grid(opts.lo.value_or(1e-4), opts.hi.value_or(0.3),
                             opts.coarse_points.value_or(31));
  return scan_1d("delta", grid, opts.tol.value_or(1e-5), opts,
                 [&](double d) {
                   return make_params(opts.base, alpha, omega, d, setting,
                                      ratio);
                 });
}

std::vector<double> Axis::values() const {
  if (points < 2) throw InvalidParams("axis needs at least 2 points");
  if (log) return log_grid(lo, hi, points);
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i)
    v[i] = lo + (hi - lo) * i / (points - 1);
  v.back() = hi;
  return v;
}

SweepMap sweep_map(double alpha, const Axis& omega, const Axis& delta,
                   DetuningSetting setting, const ScanOptions& opts) {
  if (!(omega.lo > 0.0) || !(delta.lo > 0.0) || omega.hi < omega.lo ||
      delta.hi < delta.lo)
    throw InvalidParams("sweep ranges must be positive and ascending");
  SweepMap m;
  m.omega = omega.values();
  m.delta = delta.values();
  m.cells.resize(m.omega.size() * m.delta.size());
  for_each_index(m.cells.size(), opts.execution, [&](std::size_t k) {
    SweepCell& c = m.cells[k];
    c.omega = m.omega[k / m.delta.size()];
    c.delta = m.delta[k % m.delta.size()];
    try {
      c.result = compute_squeezing(
          make_params(opts.base, alpha, c.omega, c.delta, setting),
          opts.propagation);
    } catch (const SimulationError& e) {
      c.error = e.what();
    }
  });
  return m;
}

std::vector<RatioEntry> ratio_scan(double alpha, double omega_c,
                                   const std::vector<double>& ratios,
                                   const ScanOptions& opts) {
  std::vector<RatioEntry> out;
  for (double r : ratios) {
    if (!(r > 0.0)) throw InvalidParams("Rabi ratios must be positive");
    out.push_back({r, optimize_over_detuning(alpha, omega_c,
                                             DetuningSetting::symmetric, opts,
                                             r)});
  }
  return out;
}

std::vector<SettingEntry> detuning_setting_compare(
    double alpha, double delta, std::optional<double> reference_omega,
    const ScanOptions& opts) {
  std::vector<SettingEntry> out;
  for (auto s : kAllSettings) {
    SettingEntry e;
    e.setting = s;
    e.scan = optimize_over_rabi(alpha, delta, s, opts);
    if (reference_omega)
      e.reference = evaluate_point(
          make_params(opts.base, alpha, *reference_omega, delta, s),
          opts.propagation, *reference_omega);
    out.push_back(std::move(e));
  }
  return out;
}

double max_setting_spread_db(const std::vector<SettingEntry>& table) {
  double spread = 0.0;
  for (const auto& a : table)
    for (const auto& b : table)
      spread = std::max(spread, std::abs(to_db(a.scan.min_value) -
                                         to_db(b.scan.min_value)));
  return spread;
}

double sign_asymmetry(double alpha, double omega, double delta,
                      DetuningSetting setting, const ScanOptions& opts) {
  const double vp =
      compute_squeezing(make_params(opts.base, alpha, omega, delta, setting),
                        opts.propagation)
          .variance;
  const double vm =
      compute_squeezing(make_params(opts.base, alpha, omega, -delta, setting),
                        opts.propagation)
          .variance;
  return vp - vm;
}

}  // namespace cptsq
