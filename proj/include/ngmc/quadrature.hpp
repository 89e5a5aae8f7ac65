#pragma once

#include <functional>

namespace ngmc {

struct QuadratureOptions {
  double rel_tol = 1e-12;       // relative to the accumulated integral
  double abs_tol = 0.0;         // absolute floor; whichever is looser wins
  int max_segments = 4000;      // refinement budget
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // conservative |K15 - G7| accumulation
  int evaluations = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod 7/15 on [lo, hi] with globally worst-first interval
// splitting.  Never throws on its own: the caller decides whether a
// non-converged result is fatal.
QuadratureResult integrate(const std::function<double(double)>& f, double lo,
                           double hi, const QuadratureOptions& opt = {});

// Same, but throws NumericalError when the tolerance was not reached.
double integrate_or_throw(const std::function<double(double)>& f, double lo,
                          double hi, const QuadratureOptions& opt = {},
                          const char* what = "quadrature");

// Expands from u_peak until log_f drops below log_f(u_peak) - drop on both
// sides (or the hard limits are hit) and returns the bracket.  Used to clip
// integration domains of exp(log_f) style integrands.
struct LogBracket {
  double lo, hi;
};
LogBracket bracket_log_peak(const std::function<double(double)>& log_f,
                            double u_peak, double drop, double lo_limit,
                            double hi_limit);

}  // namespace ngmc
