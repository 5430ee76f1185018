#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace stripkde::quad {

//! Adaptive 15-point Gauss-Kronrod on [a, b].
template<class F>
double
gk15(F&& f, double a, double b, double tol = 1e-13, unsigned depth = 10)
{
  if (a == b)
    return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
    f, a, b, depth, tol);
}

//! Adaptive 61-point Gauss-Kronrod on [a, b].
template<class F>
double
gk61(F&& f, double a, double b, double tol = 1e-13, unsigned depth = 15)
{
  if (a == b)
    return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
    f, a, b, depth, tol);
}

//! Integral over [a, inf) by the exp-sinh rule.
template<class F>
double
half_line(F&& f, double a, double tol = 1e-12)
{
  boost::math::quadrature::exp_sinh<double> rule;
  auto shifted = [&](double s) { return f(a + s); };
  return rule.integrate(
    shifted, 0.0, std::numeric_limits<double>::infinity(), tol);
}

//! Integral over the real line: Gauss-Kronrod on the core [lo, hi] split at
//! `mid`, exp-sinh on both tails.
template<class F>
double
real_line(F&& f, double lo, double mid, double hi, double tol = 1e-12)
{
  double core = gk61(f, lo, mid, tol) + gk61(f, mid, hi, tol);
  double right = half_line(f, hi, tol);
  double left = half_line([&](double s) { return f(-s); }, -lo, tol);
  return core + left + right;
}

} // namespace stripkde::quad
