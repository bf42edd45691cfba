#include "csmark/kernels.hpp"

#include "csmark/error.hpp"
#include "csmark/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace csmark {

namespace {

double uniform_density(double u)
{
  return std::abs(u) <= 1.0 ? 0.5 : 0.0;
}

double uniform_antiderivative(double u)
{
  if (u <= -1.0)
    return 0.0;
  if (u >= 1.0)
    return 1.0;
  return 0.5 * (u + 1.0);
}

double epanechnikov_density(double u)
{
  return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

double epanechnikov_antiderivative(double u)
{
  if (u <= -1.0)
    return 0.0;
  if (u >= 1.0)
    return 1.0;
  return 0.25 * (2.0 + 3.0 * u - u * u * u);
}

double epanechnikov_derivative(double u)
{
  return std::abs(u) <= 1.0 ? -1.5 * u : 0.0;
}

} // namespace

UnivariateKernel UnivariateKernel::uniform()
{
  UnivariateKernel k;
  k.family_ = KernelFamily::uniform;
  k.name_ = "uniform";
  k.density_ = uniform_density;
  k.antiderivative_ = uniform_antiderivative;
  k.second_moment_ = 1.0 / 3.0;
  k.l2_norm_sq_ = 0.5;
  return k;
}

UnivariateKernel UnivariateKernel::epanechnikov()
{
  UnivariateKernel k;
  k.family_ = KernelFamily::epanechnikov;
  k.name_ = "epanechnikov";
  k.density_ = epanechnikov_density;
  k.antiderivative_ = epanechnikov_antiderivative;
  k.derivative_ = epanechnikov_derivative;
  k.second_moment_ = 0.2;
  k.l2_norm_sq_ = 0.6;
  return k;
}

UnivariateKernel UnivariateKernel::custom(std::string name,
                                          std::function<double(double)> density,
                                          std::function<double(double)> antiderivative,
                                          std::function<double(double)> derivative)
{
  if (!density || !antiderivative)
    throw KernelConditionViolation("custom kernel '" + name +
                                   "' needs a density and an antiderivative");
  UnivariateKernel k;
  k.family_ = KernelFamily::custom;
  k.name_ = std::move(name);
  k.density_ = std::move(density);
  k.antiderivative_ = std::move(antiderivative);
  k.derivative_ = std::move(derivative);
  const auto& f = k.density_;
  k.second_moment_ = integrate([&](double u) { return u * u * f(u); }, -1.0, 1.0);
  k.l2_norm_sq_ = integrate([&](double u) { return f(u) * f(u); }, -1.0, 1.0);
  return k;
}

UnivariateKernel UnivariateKernel::by_name(const std::string& name)
{
  if (name == "uniform")
    return uniform();
  if (name == "epanechnikov")
    return epanechnikov();
  throw KernelConditionViolation("unknown kernel '" + name + "'");
}

double UnivariateKernel::operator()(double u) const
{
  switch (family_) {
    case KernelFamily::uniform:
      return uniform_density(u);
    case KernelFamily::epanechnikov:
      return epanechnikov_density(u);
    case KernelFamily::custom:
      break;
  }
  return density_(u);
}

double UnivariateKernel::antiderivative(double u) const
{
  switch (family_) {
    case KernelFamily::uniform:
      return uniform_antiderivative(u);
    case KernelFamily::epanechnikov:
      return epanechnikov_antiderivative(u);
    case KernelFamily::custom:
      break;
  }
  return antiderivative_(u);
}

bool UnivariateKernel::has_derivative() const noexcept
{
  return static_cast<bool>(derivative_);
}

double UnivariateKernel::derivative(double u) const
{
  if (family_ == KernelFamily::epanechnikov)
    return epanechnikov_derivative(u);
  if (!derivative_)
    throw DerivativeUnavailable("kernel '" + name_ + "' has no derivative");
  return derivative_(u);
}

double eval_rescaled(const UnivariateKernel& k, double alpha, double u)
{
  if (!(alpha > 0.0))
    throw InvalidBandwidth("bandwidth must be positive, got " + std::to_string(alpha));
  return k(u / alpha) / alpha;
}

double second_moment(const UnivariateKernel& k)
{
  return k.second_moment();
}

double l2_norm_sq(const UnivariateKernel& k)
{
  return k.l2_norm_sq();
}

double BivariateKernel::second_moment(int coordinate) const
{
  return coordinate == 0 ? first_.second_moment() : second_.second_moment();
}

const char* to_string(KernelCondition c)
{
  switch (c) {
    case KernelCondition::marginalization:
      return "marginalization";
    case KernelCondition::symmetry:
      return "symmetry";
    case KernelCondition::support:
      return "support";
    case KernelCondition::normalization:
      return "normalization";
    case KernelCondition::zero_first_moments:
      return "zero_first_moments";
    case KernelCondition::equal_second_moments:
      return "equal_second_moments";
  }
  return "unknown";
}

bool ValidationReport::all_passed() const
{
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

bool ValidationReport::passed(KernelCondition c) const
{
  for (const auto& check : checks)
    if (check.condition == c)
      return check.passed;
  return false;
}

double ValidationReport::residual(KernelCondition c) const
{
  for (const auto& check : checks)
    if (check.condition == c)
      return check.residual;
  return NAN;
}

namespace {

constexpr int grid_points = 400;

double symmetry_residual(const UnivariateKernel& k)
{
  double worst = 0.0;
  for (int i = 0; i <= grid_points; ++i) {
    const double u = 2.0 * i / grid_points;
    worst = std::max(worst, std::abs(k(u) - k(-u)));
  }
  return worst;
}

double support_residual(const UnivariateKernel& k)
{
  double worst = 0.0;
  for (int i = 1; i <= grid_points; ++i) {
    const double u = 1.0 + 1.0 * i / grid_points;
    worst = std::max({worst, std::abs(k(u)), std::abs(k(-u))});
  }
  return worst;
}

void append_univariate(ValidationReport& report, const UnivariateKernel& k, double tol)
{
  const double mass = integrate([&](double u) { return k(u); }, -1.0, 1.0);
  const double sym = symmetry_residual(k);
  const double supp = support_residual(k);
  report.checks.push_back({KernelCondition::normalization, std::abs(mass - 1.0) <= tol,
                           std::abs(mass - 1.0)});
  report.checks.push_back({KernelCondition::symmetry, sym <= tol, sym});
  report.checks.push_back({KernelCondition::support, supp <= tol, supp});
}

} // namespace

ValidationReport validate_kernel(const UnivariateKernel& k, double tolerance)
{
  ValidationReport report;
  append_univariate(report, k, tolerance);
  return report;
}

ValidationReport validate_conditions(const BivariateKernel& kt, double tolerance)
{
  return validate_conditions(kt, kt.first(), tolerance);
}

ValidationReport validate_conditions(const BivariateKernel& kt,
                                     const UnivariateKernel& marginal,
                                     double tolerance)
{
  ValidationReport report;

  // Symmetry, support and normalization must hold for both factors.
  ValidationReport a;
  ValidationReport b;
  append_univariate(a, kt.first(), tolerance);
  append_univariate(b, kt.second(), tolerance);
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    const double r = std::max(a.checks[i].residual, b.checks[i].residual);
    report.checks.push_back({a.checks[i].condition, a.checks[i].passed && b.checks[i].passed, r});
  }

  // Integrate out the second coordinate at grid points and compare.
  const double second_mass = integrate([&](double w) { return kt.second()(w); }, -1.0, 1.0);
  double marginal_residual = 0.0;
  for (int i = 0; i <= 80; ++i) {
    const double x = -1.0 + 2.0 * i / 80.0;
    marginal_residual =
      std::max(marginal_residual, std::abs(kt.first()(x) * second_mass - marginal(x)));
  }
  report.checks.push_back(
    {KernelCondition::marginalization, marginal_residual <= tolerance, marginal_residual});

  const double m1x = integrate([&](double u) { return u * kt.first()(u); }, -1.0, 1.0);
  const double m1y = integrate([&](double u) { return u * kt.second()(u); }, -1.0, 1.0);
  const double first = std::max(std::abs(m1x), std::abs(m1y));
  report.checks.push_back({KernelCondition::zero_first_moments, first <= tolerance, first});

  const double m2x = integrate([&](double u) { return u * u * kt.first()(u); }, -1.0, 1.0);
  const double m2y = integrate([&](double u) { return u * u * kt.second()(u); }, -1.0, 1.0);
  const double gap = std::abs(m2x - m2y);
  report.checks.push_back({KernelCondition::equal_second_moments, gap <= tolerance, gap});
  return report;
}

double kernel_distance(const UnivariateKernel& k1, const UnivariateKernel& k2)
{
  double worst = 0.0;
  for (int i = 0; i <= 600; ++i) {
    const double u = -1.5 + 3.0 * i / 600.0;
    worst = std::max(worst, std::abs(k1(u) - k2(u)));
  }
  return worst;
}

} // namespace csmark
