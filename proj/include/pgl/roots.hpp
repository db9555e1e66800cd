#pragma once

#include <functional>

namespace pgl {

/// Root of a scalar function on the bracket [a, b] with f(a) f(b) < 0, using
/// Brent's method (bisection safeguarding secant and inverse quadratic steps).
/// The returned point lies in a final bracket of width <= tol. Functions with
/// a jump sign change are handled, the method then degrades to bisection.
///
/// Throws InvalidArgument when f(a) and f(b) do not differ in sign.
double find_root(const std::function<double(double)>& f, double a, double b, double tol);

}  // namespace pgl
