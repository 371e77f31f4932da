#include "cptsq/meanfield.hpp"

#include <cmath>
#include <string>

#include "cptsq/atomic.hpp"

namespace cptsq {

namespace {

struct FieldPair {
  cplx p, c;
};

FieldPair axpy(const FieldPair& y, double h, const FieldPair& k) {
  return {y.p + h * k.p, y.c + h * k.c};
}

}  // namespace

MeanFieldSolution propagate_mean_fixed(const SystemParams& p, int steps) {
  check_params(p);
  require_input_field(p);
  if (steps < 2) throw InvalidParams("propagation needs at least 2 steps");

  const double h = 1.0 / steps;
  const cplx gain = I * (p.gamma * p.alpha / 2.0);

  MeanFieldSolution sol;
  sol.steps = steps;
  sol.profile.xi.resize(steps + 1);
  sol.profile.omega_p.resize(steps + 1);
  sol.profile.omega_c.resize(steps + 1);
  sol.stages.resize(steps);

  auto eval = [&](double xi, const FieldPair& y, StagePoint& stage) {
    stage.xi = xi;
    stage.omega_p = y.p;
    stage.omega_c = y.c;
    stage.state = steady_state(p, y.p, y.c);
    return FieldPair{gain * stage.state[idx::s13], gain * stage.state[idx::s23]};
  };

  FieldPair y{p.omega_p0, p.omega_c0};
  sol.profile.xi[0] = 0.0;
  sol.profile.omega_p[0] = y.p;
  sol.profile.omega_c[0] = y.c;
  for (int n = 0; n < steps; ++n) {
    const double xi = n * h;
    auto& st = sol.stages[n];
    const FieldPair k1 = eval(xi, y, st[0]);
    const FieldPair k2 = eval(xi + h / 2, axpy(y, h / 2, k1), st[1]);
    const FieldPair k3 = eval(xi + h / 2, axpy(y, h / 2, k2), st[2]);
    const FieldPair k4 = eval(xi + h, axpy(y, h, k3), st[3]);
    y.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    y.c += h / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
    if (!std::isfinite(std::abs(y.p)) || !std::isfinite(std::abs(y.c)))
      throw NonConvergence("mean field diverged at xi = " + std::to_string(xi));
    sol.profile.xi[n + 1] = (n + 1 == steps) ? 1.0 : (n + 1) * h;
    sol.profile.omega_p[n + 1] = y.p;
    sol.profile.omega_c[n + 1] = y.c;
  }
  return sol;
}

double end_field_change(const MeanFieldSolution& coarse,
                        const MeanFieldSolution& fine) {
  const cplx dp = fine.profile.omega_p.back() - coarse.profile.omega_p.back();
  const cplx dc = fine.profile.omega_c.back() - coarse.profile.omega_c.back();
  const double scale = std::sqrt(std::norm(fine.profile.omega_p.back()) +
                                 std::norm(fine.profile.omega_c.back()));
  const double diff = std::sqrt(std::norm(dp) + std::norm(dc));
  if (diff == 0.0) return 0.0;
  return scale > 0.0 ? diff / scale : INFINITY;
}

MeanFieldSolution propagate_mean(const SystemParams& p,
                                 const PropagationOptions& opts) {
  MeanFieldSolution coarse = propagate_mean_fixed(p, p.xi_steps);
  if (!opts.refine) return coarse;
  int steps = p.xi_steps;
  for (int d = 0; d < opts.max_doublings; ++d) {
    steps *= 2;
    MeanFieldSolution fine = propagate_mean_fixed(p, steps);
    fine.refinement_change = end_field_change(coarse, fine);
    if (fine.refinement_change < opts.mean_tol) return fine;
    coarse = std::move(fine);
  }
  throw NonConvergence("mean-field propagation not converged after " +
                       std::to_string(opts.max_doublings) +
                       " grid doublings (last relative change " +
                       std::to_string(coarse.refinement_change) + ")");
}

Transmission transmission(const FieldProfile& profile) {
  const double p0 = std::norm(profile.omega_p.front());
  const double c0 = std::norm(profile.omega_c.front());
  if (p0 == 0.0)
    throw InvalidParams("probe transmission undefined for zero probe input");
  Transmission t;
  t.probe = std::norm(profile.omega_p.back()) / p0;
  t.coupling = c0 == 0.0 ? 1.0 : std::norm(profile.omega_c.back()) / c0;
  return t;
}

}  // namespace cptsq
