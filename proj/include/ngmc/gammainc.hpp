#pragma once

namespace ngmc {

// ln of the unnormalised lower incomplete gamma integral
//     gamma(s, x) = \int_0^x t^{s-1} e^{-t} dt,   s > 0, x >= 0.
// Returns -inf at x == 0.
double log_lower_gamma(double s, double x);

// ln of the unnormalised upper incomplete gamma integral
//     Gamma(s, x) = \int_x^inf t^{s-1} e^{-t} dt,   x > 0, any real s.
double log_upper_gamma(double s, double x);

// Regularised lower incomplete gamma P(s, x) for s > 0.
double reg_lower_gamma(double s, double x);

}  // namespace ngmc
