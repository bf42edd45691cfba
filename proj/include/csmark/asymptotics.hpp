#pragma once

#include "csmark/estimators.hpp"
#include "csmark/kernels.hpp"
#include "csmark/scenarios.hpp"

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace csmark {

//! alpha_n = c1 n^{-1/5}, beta_n = c2 n^{-beta_exponent}.
struct BandwidthSchedule
{
  double c1 = 0.5;
  double c2 = 0.5;
  double beta_exponent = 1.0 / 3.0;

  void validate() const;
  Bandwidths at(std::size_t n) const;

  //! Schedule that reproduces fixed bandwidths at sample size n.
  static BandwidthSchedule from_fixed(Bandwidths bandwidths,
                                      std::size_t n,
                                      double beta_exponent = 1.0 / 3.0);
};

//! Limit law constants of n^{2/5}(F_hat - F0) at one point.
struct AsymptoticParams
{
  double mu1 = 0.0;
  double sigma2 = 0.0;
  double mu2 = 0.0;
  Point point{};
  bool degenerate = false; // first-order bias bracket vanishes
};

//! Bias and variance of the time-smoothed estimator with alpha_n = c n^{-1/5}.
//! mu2 is set equal to mu1. Throws DomainError when g(t0) <= 0.
AsymptoticParams mu1_sigma2(const Scenario& scenario,
                            Point point,
                            double c,
                            const UnivariateKernel& kernel);

//! Bias of the bivariate estimator: mu1 plus the mark-smoothing term when
//! beta_exponent == 1/5. Throws DivergenceError for beta_exponent < 1/5.
double mu2(const Scenario& scenario,
           Point point,
           const BandwidthSchedule& schedule,
           const UnivariateKernel& kernel1,
           const BivariateKernel& kernel2);

enum class EstimatorKind
{
  F1,
  F2
};

const char* to_string(EstimatorKind kind);

struct MonteCarloSummary
{
  std::vector<double> values; // one statistic per successful replication
  std::size_t m = 0;          // values.size()
  std::size_t requested = 0;
  std::size_t failures = 0;
  double mean = 0.0;
  double variance = 0.0;
  double ks_distance = NAN;
  double reference_mean = NAN;
  double reference_variance = NAN;
  double mean_sq_error = NAN;  // mean of squared raw errors, when defined
  double std_err_of_mse = NAN; // standard error of that mean

  //! False when more than 1% of the replications failed.
  bool valid() const { return failures * 100 <= requested; }
};

struct ReplicationPlan
{
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0; // replication r uses seed + r
  std::size_t threads = 1;
};

//! m replications of n^{2/5}(F_hat(point) - F0(point)) compared with the
//! normal limit (mu2 in the beta = 1/5 regime for F2, mu1 otherwise).
MonteCarloSummary mc_normality(const Scenario& scenario,
                               EstimatorKind estimator,
                               Point point,
                               const BandwidthSchedule& schedule,
                               const UnivariateKernel& kernel,
                               const ReplicationPlan& plan);

struct QQPoint
{
  double normal_quantile;
  double statistic;
  double reference; // mu + q sigma
};

std::vector<QQPoint> qq_data(const MonteCarloSummary& summary);

//! Monte Carlo mean squared error of an estimator at fixed bandwidths; the
//! statistic stored per replication is F_hat - F0.
MonteCarloSummary mc_mse(const Scenario& scenario,
                         EstimatorKind estimator,
                         Point point,
                         Bandwidths bandwidths,
                         const UnivariateKernel& kernel,
                         const ReplicationPlan& plan);

struct EquivalenceRow
{
  std::size_t n;
  double diff;     // n^{2/5}(F2 - F1)
  double envelope; // envelope_constant * n^{-1/6}
};

struct EquivalenceCurve
{
  std::vector<EquivalenceRow> rows;
  std::size_t failures = 0;
  double fraction_inside = 0.0;
};

//! One replication per sample size; sample size i uses seed + i.
EquivalenceCurve equivalence_curve(const Scenario& scenario,
                                   Point point,
                                   std::span<const std::size_t> n_grid,
                                   const BandwidthSchedule& schedule,
                                   const UnivariateKernel& kernel,
                                   std::uint64_t seed,
                                   double envelope_constant = 1.5);

//! m replications of n^{2/5}(F2 - F1) at one n. reference_mean is the
//! limiting mark-smoothing bias (zero unless beta_exponent == 1/5).
MonteCarloSummary mc_difference(const Scenario& scenario,
                                Point point,
                                const BandwidthSchedule& schedule,
                                const UnivariateKernel& kernel,
                                const ReplicationPlan& plan);

//! Geometric grid of sample sizes from lo to hi (inclusive).
std::vector<std::size_t> geometric_sizes(std::size_t lo, std::size_t hi, std::size_t count);

struct MeanFunctionalEstimate
{
  double value = 0.0;
  std::size_t fallback_points = 0; // midpoints with an empty window
};

//! Mean event time from the uniform-kernel F1 at z = infinity, integrated
//! over [lo, hi] by the composite midpoint rule.
MeanFunctionalEstimate mean_functional(const Sample& sample,
                                       double alpha,
                                       std::size_t grid = 2000,
                                       double lo = 0.0,
                                       double hi = 1.0);

//! Mean event time of the scenario, integral of 1 - F0(x, inf).
double true_mean(const Scenario& scenario);

//! Information lower bound for the mean functional.
double efficient_variance(const Scenario& scenario);

//! alpha_n = constant * n^{-exponent}.
struct AlphaRule
{
  double exponent = 1.0 / 3.0;
  double constant = 1.0;

  double at(std::size_t n) const;
};

//! m replications of sqrt(n)(mu_hat - mu_F); reference_variance holds the
//! efficient variance and reference_mean zero.
MonteCarloSummary mc_functional(const Scenario& scenario, AlphaRule rule, const ReplicationPlan& plan);

//! CSV `replicate,statistic` followed by nothing else.
void write_statistics_csv(std::ostream& out, const MonteCarloSummary& summary);

//! Single summary line `m,ks,mu,sigma2` as a JSON object.
void write_summary_line(std::ostream& out, const MonteCarloSummary& summary);

void write_equivalence_csv(std::ostream& out, const EquivalenceCurve& curve);

} // namespace csmark
