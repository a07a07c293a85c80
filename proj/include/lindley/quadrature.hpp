#pragma once

#include <functional>

namespace lindley::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  int evaluations = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod (7, 15) on [a, b].  Subdivides until the summed
// error estimate meets abs_tol + rel_tol * |value| or the interval budget
// is exhausted.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-10,
                 int max_intervals = 4000);

// Same, but throws ConvergenceError when the tolerance is not met.
double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, double abs_tol = 1e-12,
                          double rel_tol = 1e-10, int max_intervals = 4000);

}  // namespace lindley::quadrature
