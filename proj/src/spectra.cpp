#include "cptsq/spectra.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace cptsq {

namespace {
Mat9 shifted_m1(const SystemParams& p, cplx omega_p, cplx omega_c, double w);
}  // namespace

Mat9 frequency_response(const SystemParams& p, cplx omega_p, cplx omega_c,
                        double w) {
  try {
    return negative_inverse(shifted_m1(p, omega_p, omega_c, w),
                            "M1 + i w Io");
  } catch (const SingularSystem& e) {
    throw SingularSystem(std::string(e.what()) + " at w = " +
                         std::to_string(w));
  }
}

namespace {

using Row9 = Eigen::Matrix<cplx, 1, 9>;

// Conjugated coefficient pattern of a drift row: (A, B, C, D) ->
// (-B*, -A*, -D*, -C*).
Eigen::Matrix<cplx, 1, 4> dagger_row(const Eigen::Matrix<cplx, 1, 4>& r) {
  Eigen::Matrix<cplx, 1, 4> out;
  out << -std::conj(r(1)), -std::conj(r(0)), -std::conj(r(3)), -std::conj(r(2));
  return out;
}

// Row of V' for a dagger component: entry m is -conj(T'(-w)[row, adj(m)]).
Row9 dagger_noise_row(const Row9& t_minus_row) {
  Row9 out;
  for (int m = 0; m < 9; ++m)
    out(m) = -std::conj(t_minus_row(idx::adjoint[m]));
  return out;
}

// Drift and noise from rows s13, s23 of T'(w) and of T'(-w).
void assemble(const SystemParams& p, const AtomicState& state, double w,
              const Row9& p13, const Row9& p23, const Row9& m13,
              const Row9& m23, Mat4& c4w, Mat4& z4w) {
  const Mat94 m2 = build_m2(state);
  Mat4 c;
  c.row(0) = p13 * m2;
  c.row(1) = dagger_row(m13 * m2);
  c.row(2) = p23 * m2;
  c.row(3) = dagger_row(m23 * m2);
  c4w = (I * (p.gamma * p.alpha / 2.0)) * c;
  c4w.diagonal().array() += I * (w * p.lc);

  Mat49 v;
  v.row(0) = p13;
  v.row(1) = dagger_noise_row(m13);
  v.row(2) = p23;
  v.row(3) = dagger_noise_row(m23);
  z4w = (p.gamma * p.alpha / 4.0) *
        (v * build_diffusion(state, p) * v.adjoint());
}

Mat9 shifted_m1(const SystemParams& p, cplx omega_p, cplx omega_c, double w) {
  Mat9 m = build_m1(p, omega_p, omega_c);
  for (int k = 0; k < 9; ++k)
    if (k != idx::s33) m(k, k) += I * w;
  return m;
}

// Lean path used during propagation: only rows s13, s23, s31, s32 of T'(w)
// are solved for, and the rows of T'(-w) follow from
// T'(-w)[i, j] = conj(T'(w)[adj(i), adj(j)]).
void spectral_drift_noise(const SystemParams& p, cplx omega_p, cplx omega_c,
                          const AtomicState& state, double w, Mat4& c4w,
                          Mat4& z4w) {
  const Mat9 m = shifted_m1(p, omega_p, omega_c, w);
  Eigen::PartialPivLU<Mat9> lu(m.transpose());
  // Cheap pivot screen first; the condition estimate costs more than the
  // factorization and is only consulted for suspicious pivots.
  const auto piv = lu.matrixLU().diagonal().cwiseAbs();
  const bool zero_pivot = !(piv.minCoeff() > 0.0);
  if (zero_pivot ||
      (!(piv.minCoeff() > 1e-10 * piv.maxCoeff()) && !(lu.rcond() >= 1e-14)))
    throw SingularSystem("M1 + i w Io is singular at w = " +
                         std::to_string(w));
  Eigen::Matrix<cplx, 9, 4> e = Eigen::Matrix<cplx, 9, 4>::Zero();
  e(idx::s13, 0) = e(idx::s23, 1) = e(idx::s31, 2) = e(idx::s32, 3) = 1.0;
  const Eigen::Matrix<cplx, 9, 4> x = -lu.solve(e);  // columns = rows of T'
  const Row9 p13 = x.col(0).transpose(), p23 = x.col(1).transpose();
  const Row9 p31 = x.col(2).transpose(), p32 = x.col(3).transpose();
  Row9 m13, m23;
  for (int j = 0; j < 9; ++j) {
    m13(j) = std::conj(p31(idx::adjoint[j]));
    m23(j) = std::conj(p32(idx::adjoint[j]));
  }
  assemble(p, state, w, p13, p23, m13, m23, c4w, z4w);
}

}  // namespace

SpectralMatrices spectral_matrices(const SystemParams& p, cplx omega_p,
                                   cplx omega_c, const AtomicState& state,
                                   double w) {
  SpectralMatrices sm;
  sm.t_plus = frequency_response(p, omega_p, omega_c, w);
  const Mat9 t_minus =
      w == 0.0 ? sm.t_plus : frequency_response(p, omega_p, omega_c, -w);
  sm.t_minus_conj = t_minus.conjugate();
  assemble(p, state, w, sm.t_plus.row(idx::s13), sm.t_plus.row(idx::s23),
           t_minus.row(idx::s13), t_minus.row(idx::s23), sm.c4w, sm.z4w);
  return sm;
}

void spectral_matrices_fast(const SystemParams& p, const StagePoint& st,
                            double w, Mat4& c4w, Mat4& z4w) {
  spectral_drift_noise(p, st.omega_p, st.omega_c, st.state, w, c4w, z4w);
}

SpectralMatrices spectral_matrices(const SystemParams& p, const StagePoint& st,
                                   double w) {
  return spectral_matrices(p, st.omega_p, st.omega_c, st.state, w);
}

Mat4 propagate_spectral_matrix(const SystemParams& p,
                               const MeanFieldSolution& mean, double w) {
  Mat4 g = Mat4::Zero();
  g(0, 0) = 1.0;
  g(2, 2) = 1.0;
  Mat4 c, z;
  auto rhs = [&](const StagePoint& st, const Mat4& y) -> Mat4 {
    spectral_matrices_fast(p, st, w, c, z);
    return c * y + y * c.adjoint() + z;
  };
  for (int n = 0; n < mean.steps; ++n) {
    const double h = mean.profile.xi[n + 1] - mean.profile.xi[n];
    const auto& st = mean.stages[n];
    const Mat4 k1 = rhs(st[0], g);
    const Mat4 k2 = rhs(st[1], g + (h / 2) * k1);
    const Mat4 k3 = rhs(st[2], g + (h / 2) * k2);
    const Mat4 k4 = rhs(st[3], g + h * k3);
    g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!g.allFinite())
      throw NonConvergence("spectral correlations diverged at w = " +
                           std::to_string(w));
  }
  return g;
}

double spectrum_value(const Mat4& g, double theta) {
  return g(0, 0).real() + g(1, 1).real() +
         2.0 * (std::exp(-2.0 * I * theta) * g(0, 1)).real();
}

double spectrum_optimal(const Mat4& g) {
  return g(0, 0).real() + g(1, 1).real() - 2.0 * std::abs(g(0, 1));
}

SpectrumResult squeezing_spectrum(const SystemParams& p,
                                  const std::vector<double>& w_grid,
                                  const SpectrumOptions& opts) {
  for (std::size_t i = 0; i < w_grid.size(); ++i) {
    if (!std::isfinite(w_grid[i]))
      throw InvalidParams("spectrum frequencies must be finite");
    if (i > 0 && !(w_grid[i] > w_grid[i - 1]))
      throw InvalidParams("spectrum frequencies must be strictly increasing");
  }
  SqueezingRun run = run_squeezing(p, opts.propagation);
  if (!opts.on_refined_grid && run.mean.steps != p.xi_steps)
    run.mean = propagate_mean_fixed(p, p.xi_steps);

  SpectrumResult r;
  r.omega = w_grid;
  r.theta_used = run.result.theta_opt;
  r.s.assign(w_grid.size(), std::nan(""));
  r.s_opt.assign(w_grid.size(), std::nan(""));
  r.failures.assign(w_grid.size(), std::string());
  for_each_index(w_grid.size(), opts.execution, [&](std::size_t i) {
    try {
      const Mat4 g = propagate_spectral_matrix(p, run.mean, w_grid[i]);
      r.s[i] = spectrum_value(g, r.theta_used);
      r.s_opt[i] = spectrum_optimal(g);
      if (!(r.s[i] > 0.0) || !(r.s_opt[i] > 0.0))
        throw NonConvergence("non-positive noise spectrum at w = " +
                             std::to_string(w_grid[i]));
    } catch (const SimulationError& e) {
      r.s[i] = r.s_opt[i] = std::nan("");
      r.failures[i] = e.what();
    }
  });
  try {
    const SpectrumFeatures f = spectrum_features(r);
    r.bandwidth = f.bandwidth;
    r.period = f.period;
  } catch (const FeatureUndefined&) {
    r.bandwidth = r.period = std::nan("");
  }
  return r;
}

namespace {

// Vertex abscissa of the parabola through three equally weighted samples.
double parabolic_vertex(double x0, double x1, double x2, double y0, double y1,
                        double y2) {
  const double d = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
  if (d == 0.0) return x1;
  const double n = (x1 - x0) * (x1 - x0) * (y1 - y2) -
                   (x1 - x2) * (x1 - x2) * (y1 - y0);
  const double x = x1 - 0.5 * n / d;
  return std::clamp(x, x0, x2);
}

}  // namespace

SpectrumFeatures spectrum_features(const SpectrumResult& spec) {
  std::size_t start = 0;
  while (start < spec.omega.size() && spec.omega[start] < 0.0) ++start;
  if (start == spec.omega.size() || spec.omega[start] != 0.0)
    throw FeatureUndefined("spectrum grid must contain w = 0");
  const std::size_t n = spec.omega.size() - start;
  if (n < 3) throw FeatureUndefined("too few non-negative frequencies");

  std::vector<double> w(spec.omega.begin() + start, spec.omega.end());
  std::vector<double> s(spec.s.begin() + start, spec.s.end());
  std::vector<double> b = s;
  if (spec.s_opt.size() == spec.omega.size())
    b.assign(spec.s_opt.begin() + start, spec.s_opt.end());
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(s[i]) || !std::isfinite(b[i]))
      throw FeatureUndefined("spectrum has failed points at w = " +
                             std::to_string(w[i]));
  if (s[0] >= 1.0)
    throw FeatureUndefined("no squeezing at w = 0 (S(0) = " +
                           std::to_string(s[0]) + ")");

  SpectrumFeatures f;
  // End of the squeezed band: the first local minimum that is not below 1
  // closes it; the edge is the last upward crossing of 1 before that.
  std::size_t stop = n - 1;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (b[i] <= b[i - 1] && b[i] <= b[i + 1] && b[i] >= 1.0) {
      stop = i;
      break;
    }
  std::size_t last = 0;
  for (std::size_t i = 0; i <= stop; ++i)
    if (b[i] < 1.0) last = i;
  if (last == n - 1) {
    f.bandwidth = w[n - 1];
    f.bandwidth_truncated = true;
  } else {
    const double t = (1.0 - b[last]) / (b[last + 1] - b[last]);
    f.bandwidth = w[last] + t * (w[last + 1] - w[last]);
  }

  std::vector<double> maxima, extrema{0.0};
  for (std::size_t i = 1; i + 1 < n && w[i] <= f.bandwidth; ++i) {
    const bool is_max = s[i] > s[i - 1] && s[i] >= s[i + 1];
    const bool is_min = s[i] < s[i - 1] && s[i] <= s[i + 1];
    if (!is_max && !is_min) continue;
    const double x =
        parabolic_vertex(w[i - 1], w[i], w[i + 1], s[i - 1], s[i], s[i + 1]);
    extrema.push_back(x);
    if (is_max) maxima.push_back(x);
  }
  if (maxima.size() >= 2) {
    f.period = (maxima.back() - maxima.front()) / (maxima.size() - 1);
  } else if (extrema.size() >= 2) {
    f.period = 2.0 * (extrema.back() - extrema.front()) / (extrema.size() - 1);
  } else {
    throw FeatureUndefined("no oscillation resolved inside the squeezed band");
  }
  return f;
}

double spectrum_asymmetry(const SpectrumResult& spec) {
  std::map<double, double> by_w;
  for (std::size_t i = 0; i < spec.omega.size(); ++i)
    if (std::isfinite(spec.s[i])) by_w[spec.omega[i]] = spec.s[i];
  double worst = 0.0;
  for (const auto& [w, v] : by_w) {
    if (w <= 0.0) continue;
    const auto it = by_w.find(-w);
    if (it != by_w.end()) worst = std::max(worst, std::abs(v - it->second));
  }
  return worst;
}

}  // namespace cptsq
