#pragma once

#include <cmath>
#include <functional>

namespace cptsq {

struct GoldenResult {
  double x = 0.0;
  double fx = 0.0;
  double lo = 0.0;  // final bracket
  double hi = 0.0;
  int evaluations = 0;
};

/// Golden-section minimization of a unimodal f on [lo, hi], stopping when the
/// bracket is narrower than tol. The returned point is the best interior
/// evaluation; on ties the smaller abscissa wins.
inline GoldenResult golden_section(const std::function<double(double)>& f,
                                   double lo, double hi, double tol) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  int n = 2;
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
    ++n;
  }
  GoldenResult g;
  g.lo = a;
  g.hi = b;
  g.evaluations = n;
  if (f1 <= f2) {
    g.x = x1;
    g.fx = f1;
  } else {
    g.x = x2;
    g.fx = f2;
  }
  return g;
}

}  // namespace cptsq
