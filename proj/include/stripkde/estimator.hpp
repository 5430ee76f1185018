#pragma once

#include "stripkde/densities.hpp"
#include "stripkde/kernels.hpp"
#include "stripkde/numerics.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stripkde {

//! Algorithm used to evaluate n^-1 sum_i k(x_j - X_i) on a grid.
//!
//! - reference: serial scalar double loop, the testing baseline
//! - direct: OpenMP over grid points, SIMD over the sample using angle
//!   addition; bit-identical for any thread count
//! - spread: band-limited interpolation of the sample onto a fine lattice,
//!   then a direct lattice-to-grid sum; matches direct to about 1e-14
//!   relative to the kernel peak and is much faster for large n
enum class Evaluator
{
  reference,
  direct,
  spread
};

Evaluator parse_evaluator(std::string_view name);
std::string to_string(Evaluator e);

//! f_n on the grid for an arbitrary band-limited kernel. The sample is
//! sorted internally, so any permutation gives bit-identical output.
GridFunction kde_evaluate(std::span<const double> sample, const ScaledKernel& kernel,
                          const GridSpec& grid, Evaluator evaluator = Evaluator::direct);

//! f_n(x) = n^-1 sum k_{h_n}(x - X_i) with the Fejér-type kernel of `sched`.
GridFunction kde_evaluate(std::span<const double> sample, const BandwidthSchedule& sched,
                          const GridSpec& grid, Evaluator evaluator = Evaluator::direct);

//! Sinc baseline with h = 2 gamma / ln(n).
ScaledKernel sinc_kernel_for(double gamma, std::int64_t n);
GridFunction sinc_kde_evaluate(std::span<const double> sample, double gamma, const GridSpec& grid,
                               Evaluator evaluator = Evaluator::direct);

//! n^-1 sum_i k(x - X_i) at one point, summed in the given order.
double kernel_sum_at(std::span<const double> sample, const ScaledKernel& kernel, double x);

//! E_f k(x - X) tabulated on the grid (the smoothed density k * f).
GridFunction smoothed_density(const ScaledKernel& kernel, const AnalyticDensity& d,
                              const GridSpec& grid);

//! b_n = k_{h_n} * f - f on the grid.
GridFunction bias_function(const BandwidthSchedule& sched, const AnalyticDensity& d,
                           const GridSpec& grid);
GridFunction bias_function(const ScaledKernel& kernel, const AnalyticDensity& d,
                           const GridSpec& grid);

struct PointwiseMoments
{
  double mean;          //!< E k_{h_n}(x - X)
  double second_moment; //!< E k_{h_n}(x - X)^2
};

PointwiseMoments pointwise_moments(const BandwidthSchedule& sched, const AnalyticDensity& d,
                                   double x);

struct EstimateResult
{
  GridFunction f_n;
  BandwidthSchedule sched;
  std::int64_t sample_size;
  std::uint64_t seed;
  std::string kernel; //!< ScaledKernel::describe()
};

//! Draws n points from d with `seed` and evaluates f_n.
EstimateResult estimate_from_density(const AnalyticDensity& d, double gamma, std::int64_t n,
                                     std::uint64_t seed, const GridSpec& grid,
                                     Evaluator evaluator = Evaluator::spread);

struct ErrorDecomposition
{
  GridFunction xi;   //!< (n h_n)^(1/2) (f_n - k_{h_n} * f)
  GridFunction bias; //!< k_{h_n} * f - f
};

ErrorDecomposition decompose_error(const EstimateResult& est, const AnalyticDensity& d);

//! Same, with k_{h_n} * f and f already tabulated on est's grid.
ErrorDecomposition decompose_error(const EstimateResult& est, const GridFunction& smoothed,
                                   const GridFunction& truth);

//! CSV with columns x,f_n.
void write_estimate_csv(std::ostream& os, const EstimateResult& est);
//! JSON sidecar: schedule, sample size, seed, kernel and grid.
std::string estimate_sidecar_json(const EstimateResult& est);

} // namespace stripkde
