#pragma once

#include "csmark/kernels.hpp"
#include "csmark/scenarios.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace csmark {

struct Point
{
  double t;
  double z;
};

//! Smoothing parameters: alpha in the time direction, beta in the mark
//! direction. beta == 0 means "not set"; only the bivariate estimators
//! need it.
struct Bandwidths
{
  double alpha = 0.0;
  double beta = 0.0;

  //! Throws InvalidBandwidth unless alpha > 0 and beta >= 0.
  void validate() const;
};

//! Lower end of the mark integral in the bivariate estimator. With
//! full_line the kernel mass of every observation is kept, which is what
//! makes 1 - F2(t, inf) = h0/g hold exactly; from_zero truncates at z = 0.
enum class MarkIntegration
{
  full_line,
  from_zero
};

class EstimatorConfig
{
public:
  //! Uses `kernel` in time and the product kernel `kernel` x `kernel`.
  EstimatorConfig(UnivariateKernel kernel, Bandwidths bandwidths, double g_floor = 1e-8);

  EstimatorConfig(UnivariateKernel kernel1,
                  BivariateKernel kernel2,
                  Bandwidths bandwidths,
                  double g_floor = 1e-8,
                  MarkIntegration integration = MarkIntegration::full_line);

  const UnivariateKernel& kernel1() const noexcept { return kernel1_; }
  const BivariateKernel& kernel2() const noexcept { return kernel2_; }
  const Bandwidths& bandwidths() const noexcept { return bandwidths_; }
  double alpha() const noexcept { return bandwidths_.alpha; }
  double beta() const noexcept { return bandwidths_.beta; }
  double g_floor() const noexcept { return g_floor_; }
  MarkIntegration integration() const noexcept { return integration_; }

  //! Whether kernel1 is the time marginal of kernel2.
  bool marginal_matches() const noexcept { return marginal_matches_; }

  //! Same kernels, different bandwidths; skips re-validating the kernels.
  EstimatorConfig with_bandwidths(Bandwidths bandwidths) const;

private:
  UnivariateKernel kernel1_;
  BivariateKernel kernel2_;
  Bandwidths bandwidths_;
  double g_floor_;
  MarkIntegration integration_;
  bool marginal_matches_ = false;
};

//! Kernel estimate of the censoring density at t0.
double g_hat(const Sample& sample, const EstimatorConfig& config, double t0);

//! Derivative of g_hat in t0. Throws DerivativeUnavailable when the time
//! kernel has no derivative.
double g_hat_prime(const Sample& sample, const EstimatorConfig& config, double t0);

//! Kernel estimate of the censored sub-density h0 at t0.
double h0_hat(const Sample& sample, const EstimatorConfig& config, double t0);

//! Kernel estimate of the uncensored sub-density h1 at (t0, z0) with the
//! bivariate kernel.
double h1_hat(const Sample& sample, const EstimatorConfig& config, double t0, double z0);

//! Plug-in estimator with smoothing in time only.
double F1(const Sample& sample, const EstimatorConfig& config, double t0, double z0);

//! The uniform-kernel F1 written as a ratio of counts in the window
//! [t0 - alpha, t0 + alpha].
double F1_counting(const Sample& sample, double t0, double z0, double alpha);

//! Plug-in estimator with smoothing in both time and mark.
double F2(const Sample& sample, const EstimatorConfig& config, double t0, double z0);

//! Mixed partial derivative of F2, the Lebesgue density of the estimator.
double f2_density(const Sample& sample, const EstimatorConfig& config, double t0, double z0);

struct GridRow
{
  double t;
  double z;
  std::optional<double> F1;
  std::optional<double> F2;
  std::optional<double> f2;
};

//! Evaluates F1, F2 and f2 on the Cartesian grid ts x zs; a value that
//! cannot be computed at a point is left empty.
std::vector<GridRow> estimate_grid(const Sample& sample,
                                   const EstimatorConfig& config,
                                   std::span<const double> ts,
                                   std::span<const double> zs);

//! CSV with header `t,z,F1,F2,f2`.
void write_grid_csv(std::ostream& out, std::span<const GridRow> rows);

} // namespace csmark
