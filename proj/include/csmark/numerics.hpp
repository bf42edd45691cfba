#pragma once

#include <functional>
#include <span>
#include <vector>

namespace csmark {

//! Adaptive Gauss-Kronrod quadrature of f over [a, b]. Throws
//! QuadratureFailure when the result is not finite or the error estimate
//! exceeds `max_error`.
double integrate(const std::function<double(double)>& f,
                 double a,
                 double b,
                 double max_error = 1e-9);

//! Standard normal distribution function and its inverse.
double normal_cdf(double x);
double normal_quantile(double p);

//! One-sample Kolmogorov-Smirnov distance between the empirical
//! distribution of `values` and N(mean, variance).
double ks_distance_normal(std::span<const double> values, double mean, double variance);

//! Two-sample Kolmogorov-Smirnov distance.
double ks_distance_two_sample(std::span<const double> a, std::span<const double> b);

//! Asymptotic critical value c(level) * sqrt((n + m) / (n m)) of the
//! two-sample KS test; level 0.01 gives c = 1.628.
double ks_two_sample_critical(std::size_t n, std::size_t m, double level = 0.01);

struct MeanVariance
{
  double mean = 0.0;
  double variance = 0.0; // unbiased (divides by count - 1)
};

//! Mean and unbiased variance, accumulated in index order.
MeanVariance mean_variance(std::span<const double> values);

} // namespace csmark
