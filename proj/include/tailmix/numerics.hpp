#pragma once

#include <functional>

namespace tailmix {

// Standard normal cdf.
double normal_cdf(double x);

// Standard normal quantile. Acklam's rational approximation polished with one
// Halley step; accurate to full double precision on (0,1).
double normal_quantile(double p);

// Finds the root of an increasing function on [lo,hi]: bisection to narrow the
// bracket, then secant polish. `xtol` is the tolerance on the argument.
// Throws InversionError if the polish stalls above tolerance.
double solve_increasing(const std::function<double(double)>& f, double target,
                        double lo, double hi, double xtol);

// Fixed-order Gauss-Legendre quadrature of f over [a,b] (128 nodes).
double gauss_legendre(const std::function<double(double)>& f, double a, double b);

} // namespace tailmix
