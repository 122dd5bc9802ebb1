#include "envq/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <string>

#include "envq/errors.hpp"

namespace envq {

double integrate(const Fn1& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, rel_tol, &err, &l1);
  if (std::isfinite(v) && err <= 10.0 * rel_tol * std::max(l1, 1e-300)) return v;
  try {
    boost::math::quadrature::tanh_sinh<double> ts(12);
    double err2 = 0.0;
    double l1b = 0.0;
    double w = ts.integrate(f, a, b, rel_tol, &err2, &l1b);
    if (std::isfinite(w) && err2 <= 1e3 * rel_tol * std::max(l1b, 1e-300)) return w;
    throw NumericalError("quadrature did not converge on [" + std::to_string(a) + ", " + std::to_string(b) +
                         "], error estimate " + std::to_string(err2));
  } catch (const std::domain_error& e) {
    throw NumericalError(std::string("quadrature failed: ") + e.what());
  } catch (const boost::math::evaluation_error& e) {
    throw NumericalError(std::string("quadrature failed: ") + e.what());
  }
}

std::optional<double> integrate_or_diverge(const Fn1& f, double a, double b, double rel_tol) {
  const double w = b - a;
  auto window = [&](double e) { return integrate(f, a + e * w, b - e * w, rel_tol); };
  double i1, i2, i3;
  try {
    i1 = window(1e-4);
    i2 = window(1e-7);
    i3 = window(1e-10);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
  const double d1 = i2 - i1;
  const double d2 = i3 - i2;
  if (!std::isfinite(i3)) return std::nullopt;
  // A convergent power-law singularity shrinks the increment per three
  // decades; a logarithmic or worse one does not.
  if (d2 > 1e-9 * std::max(1.0, std::abs(i3)) && d2 > 0.7 * d1) return std::nullopt;
  try {
    return integrate(f, a, b, rel_tol);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace envq
