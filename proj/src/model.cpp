#include "cptsq/model.hpp"

#include <cmath>
#include <string>

namespace cptsq {

std::string_view to_string(DetuningSetting s) {
  switch (s) {
    case DetuningSetting::symmetric: return "symmetric";
    case DetuningSetting::probe_only: return "probe-only";
    case DetuningSetting::coupling_only: return "coupling-only";
  }
  return "symmetric";
}

DetuningSetting parse_detuning_setting(std::string_view name) {
  for (auto s : kAllSettings)
    if (to_string(s) == name) return s;
  throw InvalidParams("unknown detuning setting '" + std::string(name) +
                      "' (expected symmetric, probe-only or coupling-only)");
}

std::pair<double, double> split_detuning(DetuningSetting s, double delta) {
  switch (s) {
    case DetuningSetting::symmetric: return {delta / 2.0, -delta / 2.0};
    case DetuningSetting::probe_only: return {delta, 0.0};
    case DetuningSetting::coupling_only: return {0.0, -delta};
  }
  return {delta / 2.0, -delta / 2.0};
}

void RawParams::merge(const RawParams& over) {
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(alpha, over.alpha);
  take(gamma, over.gamma);
  take(gamma12, over.gamma12);
  take(delta, over.delta);
  take(delta_p, over.delta_p);
  take(delta_c, over.delta_c);
  take(setting, over.setting);
  take(omega, over.omega);
  take(omega_p0, over.omega_p0);
  take(omega_c0, over.omega_c0);
  take(lc, over.lc);
  take(xi_steps, over.xi_steps);
  take(g_norm, over.g_norm);
  take(gamma1, over.gamma1);
  take(gamma2, over.gamma2);
}

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v))
    throw InvalidParams(std::string(name) + " must be finite");
}

void require_finite(cplx v, const char* name) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw InvalidParams(std::string(name) + " must be finite");
}

}  // namespace

void check_params(const SystemParams& p) {
  require_finite(p.alpha, "alpha");
  require_finite(p.gamma, "gamma");
  require_finite(p.gamma12, "gamma12");
  require_finite(p.delta, "delta");
  require_finite(p.delta_p, "delta_p");
  require_finite(p.delta_c, "delta_c");
  require_finite(p.omega_p0, "omega_p0");
  require_finite(p.omega_c0, "omega_c0");
  require_finite(p.lc, "lc");
  require_finite(p.gamma1, "gamma1");
  require_finite(p.gamma2, "gamma2");
  if (p.g_norm) require_finite(*p.g_norm, "g_norm");
  if (p.alpha < 0) throw InvalidParams("alpha must be >= 0");
  if (p.gamma <= 0) throw InvalidParams("gamma must be > 0");
  if (p.gamma12 < 0) throw InvalidParams("gamma12 must be >= 0");
  if (p.gamma1 < 0 || p.gamma2 < 0)
    throw InvalidParams("branching rates gamma1, gamma2 must be >= 0");
  if (p.lc < 0) throw InvalidParams("lc must be >= 0");
  if (p.xi_steps < 2) throw InvalidParams("xi_steps must be >= 2");
  if (p.delta != p.delta_p - p.delta_c)
    throw InvalidParams("delta must equal delta_p - delta_c");
}

void require_input_field(const SystemParams& p) {
  if (std::norm(p.omega_p0) + std::norm(p.omega_c0) <= 0.0)
    throw InvalidParams("at least one input Rabi frequency must be nonzero");
}

SystemParams validate_params(const RawParams& raw) {
  SystemParams p;
  if (!raw.alpha) throw InvalidParams("alpha is required");
  p.alpha = *raw.alpha;
  if (raw.gamma) p.gamma = *raw.gamma;
  p.gamma1 = raw.gamma1.value_or(p.gamma / 2.0);
  p.gamma2 = raw.gamma2.value_or(p.gamma / 2.0);
  if (raw.gamma12) p.gamma12 = *raw.gamma12;
  if (raw.lc) p.lc = *raw.lc;
  if (raw.xi_steps) p.xi_steps = *raw.xi_steps;
  p.g_norm = raw.g_norm;

  const bool explicit_split = raw.delta_p.has_value() || raw.delta_c.has_value();
  if (explicit_split && raw.setting)
    throw InvalidParams(
        "give either explicit delta_p/delta_c or a named setting, not both");
  if (explicit_split) {
    if (!raw.delta_p || !raw.delta_c)
      throw InvalidParams("delta_p and delta_c must be given together");
    require_finite(*raw.delta_p, "delta_p");
    require_finite(*raw.delta_c, "delta_c");
    const double implied = *raw.delta_p - *raw.delta_c;
    if (raw.delta) {
      require_finite(*raw.delta, "delta");
      if (std::abs(*raw.delta - implied) > 1e-12)
        throw InvalidParams("delta (" + std::to_string(*raw.delta) +
                            ") != delta_p - delta_c (" +
                            std::to_string(implied) + ")");
    }
    p.delta_p = *raw.delta_p;
    p.delta_c = *raw.delta_c;
    p.delta = implied;
  } else {
    if (!raw.delta)
      throw InvalidParams("delta (or delta_p and delta_c) is required");
    require_finite(*raw.delta, "delta");
    const auto setting = raw.setting ? parse_detuning_setting(*raw.setting)
                                     : DetuningSetting::symmetric;
    std::tie(p.delta_p, p.delta_c) = split_detuning(setting, *raw.delta);
    p.delta = p.delta_p - p.delta_c;
  }

  if (!raw.omega && !raw.omega_p0 && !raw.omega_c0)
    throw InvalidParams("an input Rabi frequency (omega) is required");
  const cplx common = raw.omega.value_or(cplx{0.0, 0.0});
  p.omega_p0 = raw.omega_p0.value_or(common);
  p.omega_c0 = raw.omega_c0.value_or(common);

  check_params(p);
  return p;
}

cplx AtomicState::sigma(int i, int j) const {
  // Row-major table of x indices for <i|rho|j>.
  static constexpr int table[3][3] = {{idx::s11, idx::s12, idx::s13},
                                      {idx::s21, idx::s22, idx::s23},
                                      {idx::s31, idx::s32, idx::s33}};
  return x(table[i - 1][j - 1]);
}

Mat3 AtomicState::density_matrix() const {
  Mat3 rho;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) rho(i - 1, j - 1) = sigma(i, j);
  return rho;
}

}  // namespace cptsq
