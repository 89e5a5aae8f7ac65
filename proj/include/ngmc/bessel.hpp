#pragma once

namespace ngmc {

// ln K_nu(x), the modified Bessel function of the second kind, evaluated in
// log space so that huge (small x, large |nu|) and tiny (large x) values
// never leave the representable range.
//
// Evaluation scheme: a Temme series for x <= 2 and a Steed/Lentz continued
// fraction for x > 2, both at a fractional base order |mu| <= 1/2, followed
// by the (stable) upward order recurrence with overflow rescaling.
//
// Domain: x > 0, any finite nu.  K is even in the order, so the value is
// computed at |nu|; the symmetry is therefore exact in bits.
// Accuracy target: relative error of the log below 1e-10 for
// nu in [-10, 10], x in [1e-6, 700] (validated against the quadrature
// oracle below).  Throws std::domain_error outside the domain.
double log_bessel_k(double nu, double x);

// ln K_{nu_num}(x_num) - ln K_{nu_den}(x_den) in one call; ratios of huge or
// tiny Bessel values stay finite this way.  Equal order and argument pairs
// return exactly 0.
double log_bessel_k_ratio(double nu_num, double x_num, double nu_den,
                          double x_den);

// Ground-truth oracle: adaptive Gauss-Kronrod quadrature of the integral
// representation K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt, with the
// domain clipped where the integrand underflows.  Test-side reference only;
// never used in sampling paths.  Throws NumericalError when the quadrature
// does not converge.  Domain: x >= 1e-6 (below that the clipping rule is
// not validated).
double bessel_k_quadrature_oracle(double nu, double x, double rel_tol = 1e-12);

// Same oracle on the log scale (the comparisons in tests happen there).
double log_bessel_k_quadrature_oracle(double nu, double x,
                                      double rel_tol = 1e-12);

}  // namespace ngmc
