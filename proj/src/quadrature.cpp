#include "ngmc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "ngmc/errors.hpp"

namespace ngmc {
namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK constants).
constexpr double kNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
constexpr double kWeightsK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
// Gauss weights attach to nodes 1, 3, 5, 7 of the table above.
constexpr double kWeightsG[4] = {0.129484966168870, 0.279705391489277,
                                 0.381830050505119, 0.417959183673469};

struct Segment {
  double lo, hi;
  double value;
  double error;
};

Segment evaluate(const std::function<double(double)>& f, double lo, double hi,
                 int& evals) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  double fk = kWeightsK[7] * f(c);
  double fg = kWeightsG[3] * f(c);
  evals += 1;
  for (int i = 0; i < 7; ++i) {
    const double y1 = f(c - h * kNodes[i]);
    const double y2 = f(c + h * kNodes[i]);
    evals += 2;
    fk += kWeightsK[i] * (y1 + y2);
    if (i % 2 == 1) fg += kWeightsG[i / 2] * (y1 + y2);
  }
  const double k15 = fk * h;
  const double g7 = fg * h;
  return Segment{lo, hi, k15, std::abs(k15 - g7)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double lo,
                           double hi, const QuadratureOptions& opt) {
  QuadratureResult out;
  if (!(hi > lo)) {
    out.converged = true;
    return out;
  }

  auto worse = [](const Segment& a, const Segment& b) {
    return a.error < b.error;
  };
  std::priority_queue<Segment, std::vector<Segment>, decltype(worse)> heap(
      worse);

  Segment whole = evaluate(f, lo, hi, out.evaluations);
  double total = whole.value;
  double total_err = whole.error;
  heap.push(whole);
  int segments = 1;

  auto tolerance = [&]() {
    return std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  };

  while (total_err > tolerance() && segments < opt.max_segments) {
    Segment s = heap.top();
    heap.pop();
    const double mid = 0.5 * (s.lo + s.hi);
    if (mid <= s.lo || mid >= s.hi) {
      // Interval at floating point resolution; cannot split further.
      heap.push(Segment{s.lo, s.hi, s.value, 0.0});
      total_err -= s.error;
      continue;
    }
    Segment a = evaluate(f, s.lo, mid, out.evaluations);
    Segment b = evaluate(f, mid, s.hi, out.evaluations);
    total += a.value + b.value - s.value;
    total_err += a.error + b.error - s.error;
    heap.push(a);
    heap.push(b);
    ++segments;
  }

  out.value = total;
  out.error_estimate = total_err;
  out.converged = total_err <= tolerance();
  return out;
}

double integrate_or_throw(const std::function<double(double)>& f, double lo,
                          double hi, const QuadratureOptions& opt,
                          const char* what) {
  const QuadratureResult r = integrate(f, lo, hi, opt);
  if (!r.converged) {
    throw NumericalError(std::string(what) +
                         ": adaptive quadrature did not reach tolerance "
                         "(error estimate " +
                         std::to_string(r.error_estimate) + ")");
  }
  return r.value;
}

LogBracket bracket_log_peak(const std::function<double(double)>& log_f,
                            double u_peak, double drop, double lo_limit,
                            double hi_limit) {
  const double target = log_f(u_peak) - drop;
  auto push = [&](double direction_sign, double limit) {
    double step = 1.0;
    double u = u_peak;
    while (true) {
      double next = u + direction_sign * step;
      if ((direction_sign > 0 && next >= limit) ||
          (direction_sign < 0 && next <= limit)) {
        return limit;
      }
      if (log_f(next) < target) return next;
      u = next;
      step *= 2.0;
    }
  };
  return LogBracket{push(-1.0, lo_limit), push(+1.0, hi_limit)};
}

}  // namespace ngmc
