#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stripkde {

//! Below this |x| the Fejér-type kernel is evaluated by its two-term Taylor
//! expansion instead of the closed form.
inline constexpr double kSeriesSwitch = 1e-4;

//! Shape parameter of the Fejér-type kernel family
//!
//!   k(x; theta) = (cos(theta x) - cos x) / (pi (1 - theta) x^2),
//!
//! with theta = 0 the Fejér kernel, theta = 1/2 the Vallée-Poussin kernel and
//! theta = 1 the limiting sinc kernel sin(x) / (pi x).
class KernelSpec
{
public:
  explicit KernelSpec(double theta);

  double theta() const noexcept { return theta_; }
  bool is_sinc() const noexcept { return theta_ == 1.0; }

private:
  double theta_;
};

//! Thrown when ln(n) <= 2 gamma, i.e. the exponential type N would not exceed 1.
class SubcriticalSampleSize : public std::invalid_argument
{
public:
  SubcriticalSampleSize(double gamma, std::int64_t n);

  double gamma() const noexcept { return gamma_; }
  std::int64_t n() const noexcept { return n_; }
  //! Smallest sample size accepted for this gamma.
  std::int64_t minimum_n() const noexcept { return minimum_n_; }

private:
  double gamma_;
  std::int64_t n_;
  std::int64_t minimum_n_;
};

//! The deterministic bandwidth schedule
//!   N = ln(n) / (2 gamma),  theta_n = 1 - 1/N,  h_n = theta_n / N.
struct BandwidthSchedule
{
  double gamma;
  std::int64_t n;
  double N;
  double theta;
  double h;
};

BandwidthSchedule bandwidth_schedule(double gamma, std::int64_t n);

//! k(x; theta). Even in x; uses the Taylor branch for |x| < kSeriesSwitch.
//! Throws std::domain_error on non-finite x.
double fejer_kernel_eval(double x, const KernelSpec& spec);

//! Two-term Taylor value (1+theta)/(2 pi) - x^2 (1+theta)(1+theta^2)/(24 pi).
double fejer_kernel_taylor(double x, const KernelSpec& spec) noexcept;

//! Closed form without the series switch (accurate for |x| >= kSeriesSwitch).
double fejer_kernel_closed_form(double x, const KernelSpec& spec);

//! Fourier transform: 1 on |t| <= theta, linear ramp to 0 at |t| = 1.
//! For theta = 1 this is the indicator of [-1, 1].
double fejer_kernel_ft(double t, const KernelSpec& spec) noexcept;

struct KernelNorms
{
  double l2_sq;    //!< (1+2 theta)/(3 pi), exact (Plancherel on the trapezoid)
  double l2_sq_stated; //!< (1+theta)/(2 pi); equals k(0), not the squared norm
  double l1_lower; //!< +inf for the sinc kernel
  double l1_upper; //!< +inf for the sinc kernel
};

KernelNorms kernel_norms(const KernelSpec& spec);

//! ||k||_1 by quadrature over [-1e4/(1-theta), 1e4/(1-theta)], integrated
//! between consecutive zeros of the kernel, plus the mean-value estimate of
//! the remaining tail. Returns +inf for theta = 1.
double kernel_l1_quadrature(const KernelSpec& spec);

//! ||k||_2^2 by quadrature over [-half_width, half_width].
double kernel_l2sq_quadrature(const KernelSpec& spec, double half_width = 1e6);

//! k_{h_n}(x) = k(x / h_n; theta_n) / h_n.
double scaled_kernel_eval(double x, const BandwidthSchedule& sched);

//! A band-limited kernel at a fixed bandwidth: either the scaled Fejér-type
//! kernel of a schedule or the scaled sinc kernel sin(u/h)/(pi u).
class ScaledKernel
{
public:
  enum class Family
  {
    fejer,
    sinc
  };

  static ScaledKernel fejer(const BandwidthSchedule& sched);
  static ScaledKernel fejer(double theta, double h);
  static ScaledKernel sinc(double h);

  Family family() const noexcept { return family_; }
  double theta() const noexcept { return theta_; }
  double h() const noexcept { return h_; }

  double operator()(double u) const noexcept;

  //! Fourier transform vanishes for |t| > bandwidth() = 1/h.
  double bandwidth() const noexcept { return 1.0 / h_; }
  double peak() const noexcept;
  //! Upper bound on |k(u)| for |u| >= r.
  double tail_sup(double r) const noexcept;
  //! Half-period of the fastest oscillating factor; a natural quadrature panel.
  double panel_length() const noexcept;

  // Coefficients of the separable closed form used by the fast evaluators.
  //   fejer: k(u) = scale * sin(alpha u) sin(beta u) / u^2
  //   sinc:  k(u) = scale * sin(alpha u) / u
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double scale() const noexcept { return scale_; }
  //! Taylor branch is used for |u| < switch_radius().
  double switch_radius() const noexcept { return kSeriesSwitch * h_; }
  //! Taylor value k(0) - c2 u^2 near the origin.
  double taylor_c0() const noexcept { return c0_; }
  double taylor_c2() const noexcept { return c2_; }

  std::string describe() const;

private:
  ScaledKernel(Family family, double theta, double h);

  Family family_;
  double theta_;
  double h_;
  double alpha_;
  double beta_;
  double scale_;
  double c0_;
  double c2_;
};

} // namespace stripkde
