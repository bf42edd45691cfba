#pragma once

#include "csmark/asymptotics.hpp"
#include "csmark/estimators.hpp"
#include "csmark/rng.hpp"
#include "csmark/scenarios.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace csmark {

struct BootstrapPlan
{
  double alpha0 = 0.4;
  double beta0 = 0.4;
  std::size_t B = 500;
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid; // empty: only F1 candidates
  Point point{0.5, 0.5};
  std::uint64_t seed = 0;        // replication b uses seed + b
  std::size_t threads = 1;
  std::optional<double> truth;   // F0(point), when known, for the oracle MSE

  //! Throws DomainError on empty, unsorted or non-positive grids or B == 0.
  void validate() const;
};

//! Pilot bandwidth 0.4 (100 / n)^{1/5}.
double default_pilot_bandwidth(std::size_t n);

//! Draws a variate from the kernel density by inverting its antiderivative.
double sample_kernel(const UnivariateKernel& k, Rng& rng);

//! Oversmoothed pilot fit that the smoothed bootstrap resamples from.
//!
//! Inspection times come from the pilot density estimate of g restricted to
//! the support. Event-time/mark pairs come from the pilot bivariate density
//! clipped at zero, by rejection from the support box with an envelope of
//! 1.1 times its maximum over a 200 x 200 grid.
class PilotModel
{
public:
  PilotModel(const Sample& sample, const EstimatorConfig& config, Box support);

  const EstimatorConfig& config() const noexcept { return config_; }
  const Box& support() const noexcept { return support_; }
  double envelope() const noexcept { return envelope_; }

  //! Clipped pilot density max(0, f2) at (x, y); zero outside the box or
  //! where the pilot denominator is unstable.
  double clipped_density(double x, double y) const;

  //! Pilot F2 at a point.
  double cdf(Point p) const;

  double draw_time(Rng& rng) const;

  //! `envelope` is the caller's working bound; it grows (and the draw is
  //! restarted) whenever a proposal exceeds it.
  HiddenPair draw_pair(Rng& rng, double& envelope) const;

  //! One bootstrap sample of size n.
  Sample resample(std::size_t n, std::uint64_t seed) const;

private:
  Sample sample_;
  EstimatorConfig config_;
  Box support_;
  double envelope_ = 0.0;
};

//! Throws DegeneratePilot when the clipped pilot density vanishes on the box.
PilotModel fit_pilot(const Sample& sample,
                     double alpha0,
                     double beta0,
                     const UnivariateKernel& kernel,
                     Box support = Box{});

struct MseRow
{
  EstimatorKind estimator;
  double alpha;
  double beta; // 0 for F1
  double mse_hat;
  double mse_tilde; // NaN when the truth is unknown
  std::size_t failures;
  bool valid;
};

struct BootstrapTable
{
  std::vector<MseRow> rows;
  double pilot_value = 0.0; // pilot F2 at the plan's point
  std::size_t B = 0;
};

//! Smoothed-bootstrap MSE of F1 over alpha_grid and of F2 over
//! alpha_grid x beta_grid at the plan's point.
BootstrapTable bootstrap_mse(const Sample& sample,
                             const BootstrapPlan& plan,
                             const UnivariateKernel& kernel,
                             Box support = Box{});

struct Choice
{
  double alpha;
  double beta;
  double mse_hat;
};

struct Selection
{
  std::optional<Choice> F1;
  std::optional<Choice> F2;
};

//! Argmin of mse_hat over one estimator's valid rows; ties go to the
//! smaller alpha, then the smaller beta. Throws SelectionFailure when no
//! row is valid.
Choice select(std::span<const MseRow> rows, EstimatorKind estimator);

//! Per-estimator argmin for every estimator present in the table.
Selection select(const BootstrapTable& table);

//! CSV `estimator,alpha,beta,mse_hat,mse_tilde,failures`.
void write_bootstrap_csv(std::ostream& out, const BootstrapTable& table);

} // namespace csmark
