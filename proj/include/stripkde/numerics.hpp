#pragma once

#include "stripkde/densities.hpp"
#include "stripkde/kernels.hpp"

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace stripkde {

//! Symmetric uniform grid on [-half_width, half_width].
struct GridSpec
{
  double half_width = 50.0;
  double step = 0.01;

  //! Number of points; validates that 2 L / step is (close to) an integer.
  std::size_t size() const;
  double x(std::size_t i) const noexcept { return -half_width + static_cast<double>(i) * step; }
};

//! Values of a real function on a uniform grid: values[i] ~ g(left + i * step).
class GridFunction
{
public:
  GridFunction(double left, double step, std::vector<double> values);

  static GridFunction tabulate(const std::function<double(double)>& g, const GridSpec& grid);
  static GridFunction tabulate(const std::function<double(double)>& g, double left, double step,
                               std::size_t count);

  double left() const noexcept { return left_; }
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return values_.size(); }
  double x(std::size_t i) const noexcept { return left_ + static_cast<double>(i) * step_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  bool same_grid(const GridFunction& other) const noexcept;
  //! Throws std::invalid_argument when grids differ.
  void require_same_grid(const GridFunction& other, const char* what) const;

  //! a * this + b * other, pointwise.
  GridFunction combine(double a, const GridFunction& other, double b) const;
  GridFunction scaled(double c) const;

private:
  double left_;
  double step_;
  std::vector<double> values_;
};

struct LpNorm
{
  double value;
  //! |boundary values| exceed 1e-6 * max|values|: truncation may matter.
  bool tail_risk;
};

//! Composite trapezoid approximation of (int |g|^p)^(1/p), p >= 1.
LpNorm lp_norm(const GridFunction& g, double p);

//! Composite trapezoid approximation of int |g|^p (no root).
double lp_integral(const GridFunction& g, double p);

//! Trapezoid approximation of the Fourier integral int g(x) exp(-i t x) dx.
std::complex<double> numerical_ft(const GridFunction& g, double t);
std::vector<std::complex<double>> numerical_ft(const GridFunction& g, std::span<const double> ts);

//! A kernel for quadrature convolution: evaluator, panel length and a bound
//! sup_{|u| >= r} |k(u)|.
struct KernelFunction
{
  std::function<double(double)> eval;
  double panel;
  std::function<double(double)> tail_sup;

  static KernelFunction from(const ScaledKernel& k);
  //! u -> k(u)^2
  static KernelFunction squared(const ScaledKernel& k);
};

//! int k(x - y) f(y) dy at one point, absolute error about `tol`.
double convolve_at(const KernelFunction& kernel, const AnalyticDensity& d, double x,
                   double tol = 1e-11);

//! (k * f) tabulated on the grid; parallel over grid points.
GridFunction convolve_with_density(const KernelFunction& kernel, const AnalyticDensity& d,
                                   const GridSpec& grid, double tol = 1e-11);

//! Two-column CSV "x,value" with 17 significant digits.
void write_csv(std::ostream& os, const GridFunction& g, const std::string& value_name = "value");

} // namespace stripkde
