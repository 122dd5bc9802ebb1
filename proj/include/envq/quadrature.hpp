#pragma once

#include <functional>
#include <optional>

namespace envq {

using Fn1 = std::function<double(double)>;

// Adaptive Gauss-Kronrod, falling back to tanh-sinh for endpoint
// singularities. Throws NumericalError if neither reaches the tolerance.
double integrate(const Fn1& f, double a, double b, double rel_tol = 1e-10);

// Integral over [a, b] of a nonnegative integrand that may blow up at an
// endpoint. Returns nullopt when the endpoint windows show non-vanishing
// increments (divergence).
std::optional<double> integrate_or_diverge(const Fn1& f, double a, double b, double rel_tol = 1e-10);

}  // namespace envq
