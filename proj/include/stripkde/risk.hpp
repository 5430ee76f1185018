#pragma once

#include "stripkde/densities.hpp"
#include "stripkde/estimator.hpp"
#include "stripkde/kernels.hpp"
#include "stripkde/numerics.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stripkde {

//! M_p = (E|Z|^p)^(1/p) = sqrt(2) (Gamma((p+1)/2) / sqrt(pi))^(1/p), p >= 1.
double gaussian_abs_moment(double p);

//! beta_p = pi^(-1/2) ||f||_{p/2}^(1/2) M_p.
double beta_p(const AnalyticDensity& d, double p);

//! psi_p(n) = (n h_n)^(-1/2) beta_p.
double rate_psi(std::int64_t n, double gamma, double p, const AnalyticDensity& d);
double rate_psi(const BandwidthSchedule& sched, double beta);

//! Loss l: [0, inf) -> [0, inf), non-decreasing, l(0) = 0, l(x) <= A e^{B x}.
class LossSpec
{
public:
  enum class Kind
  {
    identity,
    power,
    capped
  };

  static LossSpec identity();
  static LossSpec power(double q);
  static LossSpec capped(double cap);
  //! "identity", "power:Q" or "capped:C".
  static LossSpec parse(std::string_view spec);

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }
  double operator()(double x) const;
  //! Constants (A, B) of the exponential growth bound.
  std::pair<double, double> growth_bound() const;
  std::string id() const;

private:
  LossSpec(Kind kind, double param);

  Kind kind_;
  double param_;
};

//! Raised when (density, p) lies outside the class the rate theory covers.
class ClassViolation : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! p >= 2 needs ||f||_{p/2} < inf; 1 <= p < 2 needs int |x|^lambda f < inf
//! for some lambda in ((2-p)/p, 2].
void validate_class(const AnalyticDensity& d, double p);

//! The schedule's gamma must lie strictly inside the density's strip.
void validate_strip(const AnalyticDensity& d, double gamma);

struct MonteCarloSettings
{
  GridSpec grid{};
  Evaluator evaluator = Evaluator::spread;
};

//! Per-replicate norms at one sample size, for several exponents p.
struct ReplicateBatch
{
  BandwidthSchedule sched;
  std::int64_t replicates;
  std::vector<double> ps;
  std::vector<double> bias_norm;                  //!< ||b_n||_p per p
  std::vector<std::vector<double>> error_norm;    //!< [p][r] ||f_n - f||_p
  std::vector<std::vector<double>> centered_norm; //!< [p][r] ||f_n - E f_n||_p
  std::vector<std::vector<double>> xi_power;      //!< [p][r] ||xi_n||_p^p
  bool tail_risk;                                 //!< any lp_norm flagged truncation
};

//! Replicate r draws its sample with seed replicate_seed(master_seed, n, r).
ReplicateBatch simulate_replicates(const AnalyticDensity& d, double gamma, std::int64_t n,
                                   std::int64_t replicates, std::uint64_t master_seed,
                                   std::vector<double> ps, const MonteCarloSettings& settings = {});

struct SampleStats
{
  double mean;
  double variance; //!< unbiased
  double std_error; //!< sqrt(variance / count)
};

SampleStats sample_stats(const std::vector<double>& values);

struct RiskRow
{
  std::int64_t n;
  double N;
  double h;
  double psi;
  double mean_risk;
  double std_error;
  std::int64_t replicates;
  double bias_norm;
  double xi_moment;    //!< mean ||xi_n||_p^p
  double vicinity_max; //!< max mean risk over the density and its vicinity
  bool tail_risk;
};

struct RiskReport
{
  std::string density;
  std::vector<std::string> vicinity;
  double gamma;
  double p;
  std::string loss;
  GridSpec grid;
  std::uint64_t master_seed;
  std::string evaluator;
  double f_norm; //!< ||f||_{p/2}, cached
  double beta;   //!< beta_p
  std::vector<RiskRow> rows;
};

//! Monte Carlo estimate of E l(psi_p(n)^-1 ||f_n - f||_p) for each n.
RiskReport mc_risk(const AnalyticDensity& d, double gamma, double p, const LossSpec& loss,
                   const std::vector<std::int64_t>& n_list, std::int64_t replicates,
                   std::uint64_t master_seed, const MonteCarloSettings& settings = {},
                   const std::vector<AnalyticDensity>& vicinity = {});

struct XiMoment
{
  double estimate; //!< mean of ||xi_n||_p^p
  double std_error;
  double variance; //!< replicate variance of ||xi_n||_p^p
  double target;   //!< beta_p^p
  std::int64_t replicates;
};

XiMoment mc_xi_moment(const AnalyticDensity& d, double gamma, double p, std::int64_t n,
                      std::int64_t replicates, std::uint64_t master_seed,
                      const MonteCarloSettings& settings = {});
XiMoment xi_moment_from(const ReplicateBatch& batch, std::size_t p_index, double beta);

//! D_n = {|x - y| >= N^(-(1-delta)/2)}.
bool in_region_dn(double x, double y, double N, double delta);

struct CovarianceResult
{
  double x;
  double y;
  double cov;
  double corr;
  double var_x;
  double var_y;
  bool in_D_n;
};

//! Sample covariance of (xi_n(x), xi_n(y)) across replicates.
std::vector<CovarianceResult> mc_covariance(const AnalyticDensity& d, double gamma, std::int64_t n,
                                            std::int64_t replicates, std::uint64_t master_seed,
                                            const std::vector<std::pair<double, double>>& pairs,
                                            double delta = 0.5);

//! E|Y_n|^lambda for Y_n with density k_n^2 / ||k_n||_2^2 (unit scale).
double y_moment(double lambda, const BandwidthSchedule& sched);

} // namespace stripkde
