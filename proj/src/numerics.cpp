#include "csmark/numerics.hpp"

#include "csmark/error.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

namespace csmark {

double integrate(const std::function<double(double)>& f, double a, double b, double max_error)
{
  double error = 0.0;
  double value = 0.0;
  try {
    value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, 15, 1e-13, &error);
  } catch (const std::exception& e) {
    throw QuadratureFailure(std::string("quadrature failed: ") + e.what());
  }
  if (!std::isfinite(value) || !std::isfinite(error) || error > max_error)
    throw QuadratureFailure("quadrature did not converge on [" + std::to_string(a) + ", " +
                            std::to_string(b) + "], error estimate " + std::to_string(error));
  return value;
}

double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double p)
{
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

double ks_distance_normal(std::span<const double> values, double mean, double variance)
{
  if (values.empty())
    return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(variance);
  const auto m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf((sorted[i] - mean) / sd);
    const auto rank = static_cast<double>(i);
    d = std::max({d, (rank + 1.0) / m - cdf, cdf - rank / m});
  }
  return d;
}

double ks_distance_two_sample(std::span<const double> a, std::span<const double> b)
{
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto nx = static_cast<double>(x.size());
  const auto ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v)
      ++i;
    while (j < y.size() && y[j] <= v)
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double level)
{
  const double c = std::sqrt(-0.5 * std::log(level / 2.0));
  const auto dn = static_cast<double>(n);
  const auto dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

MeanVariance mean_variance(std::span<const double> values)
{
  MeanVariance out;
  if (values.empty())
    return out;
  double sum = 0.0;
  for (double v : values)
    sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2)
    return out;
  double ss = 0.0;
  for (double v : values)
    ss += (v - out.mean) * (v - out.mean);
  out.variance = ss / static_cast<double>(values.size() - 1);
  return out;
}

} // namespace csmark
