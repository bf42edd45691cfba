#include "csmark/estimators.hpp"

#include "csmark/csv.hpp"
#include "csmark/error.hpp"

#include <cmath>
#include <ostream>

namespace csmark {

void Bandwidths::validate() const
{
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidBandwidth("alpha must be positive, got " + std::to_string(alpha));
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw InvalidBandwidth("beta must be non-negative, got " + std::to_string(beta));
}

namespace {

void require_valid(const UnivariateKernel& k)
{
  if (k.family() != KernelFamily::custom)
    return;
  const auto report = validate_kernel(k);
  if (!report.all_passed())
    throw KernelConditionViolation("custom kernel '" + k.name() + "' fails validation");
}

void require_nonempty(const Sample& sample)
{
  if (sample.empty())
    throw EmptySample("estimators need at least one observation");
}

void require_beta(const EstimatorConfig& config)
{
  if (!(config.beta() > 0.0))
    throw InvalidBandwidth("the bivariate estimators need beta > 0");
}

double checked_denominator(double g, const EstimatorConfig& config, double t0)
{
  if (!(g >= config.g_floor()))
    throw UnstableDenominator("g_hat(" + std::to_string(t0) + ") = " + std::to_string(g) +
                                " is below the floor " + std::to_string(config.g_floor()),
                              g);
  return g;
}

// Sums over the observations whose time lies inside the kernel window.
struct TimeWindowSums
{
  double all = 0.0;      // sum of k((t0 - T)/alpha)
  double censored = 0.0; // the same over delta = 0
};

TimeWindowSums time_sums(const Sample& sample, const UnivariateKernel& k, double alpha, double t0)
{
  TimeWindowSums s;
  for (const auto& o : sample) {
    const double u = (t0 - o.t) / alpha;
    if (std::abs(u) > 1.0)
      continue;
    const double w = k(u);
    s.all += w;
    if (!o.delta)
      s.censored += w;
  }
  return s;
}

} // namespace

EstimatorConfig::EstimatorConfig(UnivariateKernel kernel, Bandwidths bandwidths, double g_floor)
  : EstimatorConfig(kernel, BivariateKernel::square(kernel), bandwidths, g_floor)
{}

EstimatorConfig::EstimatorConfig(UnivariateKernel kernel1,
                                 BivariateKernel kernel2,
                                 Bandwidths bandwidths,
                                 double g_floor,
                                 MarkIntegration integration)
  : kernel1_(std::move(kernel1)),
    kernel2_(std::move(kernel2)),
    bandwidths_(bandwidths),
    g_floor_(g_floor),
    integration_(integration)
{
  bandwidths_.validate();
  if (!(g_floor_ > 0.0))
    throw DomainError("g_floor must be positive");
  require_valid(kernel1_);
  require_valid(kernel2_.first());
  require_valid(kernel2_.second());
  marginal_matches_ = kernel_distance(kernel1_, kernel2_.first()) <= 1e-12;
}

EstimatorConfig EstimatorConfig::with_bandwidths(Bandwidths bandwidths) const
{
  bandwidths.validate();
  EstimatorConfig copy = *this;
  copy.bandwidths_ = bandwidths;
  return copy;
}

double g_hat(const Sample& sample, const EstimatorConfig& config, double t0)
{
  require_nonempty(sample);
  const double alpha = config.alpha();
  const auto s = time_sums(sample, config.kernel1(), alpha, t0);
  return s.all / (alpha * static_cast<double>(sample.size()));
}

double g_hat_prime(const Sample& sample, const EstimatorConfig& config, double t0)
{
  require_nonempty(sample);
  const auto& k = config.kernel1();
  if (!k.has_derivative())
    throw DerivativeUnavailable("g_hat_prime needs a differentiable time kernel, got '" +
                                k.name() + "'");
  const double alpha = config.alpha();
  double sum = 0.0;
  for (const auto& o : sample) {
    const double u = (t0 - o.t) / alpha;
    if (std::abs(u) <= 1.0)
      sum += k.derivative(u);
  }
  return sum / (alpha * alpha * static_cast<double>(sample.size()));
}

double h0_hat(const Sample& sample, const EstimatorConfig& config, double t0)
{
  require_nonempty(sample);
  const double alpha = config.alpha();
  const auto s = time_sums(sample, config.kernel1(), alpha, t0);
  return s.censored / (alpha * static_cast<double>(sample.size()));
}

double h1_hat(const Sample& sample, const EstimatorConfig& config, double t0, double z0)
{
  require_nonempty(sample);
  require_beta(config);
  const auto& kt = config.kernel2();
  const double alpha = config.alpha();
  const double beta = config.beta();
  double sum = 0.0;
  for (const auto& o : sample) {
    if (!o.delta)
      continue;
    const double u = (t0 - o.t) / alpha;
    const double v = (z0 - o.z) / beta;
    if (std::abs(u) > 1.0 || std::abs(v) > 1.0)
      continue;
    sum += kt(u, v);
  }
  return sum / (alpha * beta * static_cast<double>(sample.size()));
}

double F1(const Sample& sample, const EstimatorConfig& config, double t0, double z0)
{
  require_nonempty(sample);
  const auto& k = config.kernel1();
  const double alpha = config.alpha();
  double num = 0.0;
  double den = 0.0;
  for (const auto& o : sample) {
    const double u = (t0 - o.t) / alpha;
    if (std::abs(u) > 1.0)
      continue;
    const double w = k(u);
    den += w;
    if (o.delta && o.z <= z0)
      num += w;
  }
  const auto n = static_cast<double>(sample.size());
  checked_denominator(den / (alpha * n), config, t0);
  return num / den;
}

double F1_counting(const Sample& sample, double t0, double z0, double alpha)
{
  if (!(alpha > 0.0))
    throw InvalidBandwidth("alpha must be positive, got " + std::to_string(alpha));
  std::size_t in_window = 0;
  std::size_t hits = 0;
  for (const auto& o : sample) {
    if (std::abs(t0 - o.t) > alpha)
      continue;
    ++in_window;
    if (o.delta && o.z <= z0)
      ++hits;
  }
  if (in_window == 0)
    throw UnstableDenominator("no inspection times in [t0 - alpha, t0 + alpha]", 0.0);
  return static_cast<double>(hits) / static_cast<double>(in_window);
}

double F2(const Sample& sample, const EstimatorConfig& config, double t0, double z0)
{
  require_nonempty(sample);
  require_beta(config);
  if (!config.marginal_matches())
    throw KernelConditionViolation(
      "F2 needs the time kernel to equal the time marginal of the bivariate kernel");
  const auto& kt = config.kernel2();
  const auto& kz = kt.second();
  const double alpha = config.alpha();
  const double beta = config.beta();
  const bool from_zero = config.integration() == MarkIntegration::from_zero;
  double num = 0.0;
  double den = 0.0;
  for (const auto& o : sample) {
    const double u = (t0 - o.t) / alpha;
    if (std::abs(u) > 1.0)
      continue;
    const double w = config.kernel1()(u);
    den += w;
    if (!o.delta)
      continue;
    // Mark integral of the product kernel in closed form; the time factor
    // equals kernel1 under the marginal condition.
    double mass = kz.antiderivative((z0 - o.z) / beta);
    if (from_zero)
      mass -= kz.antiderivative(-o.z / beta);
    num += kt.first()(u) * mass;
  }
  const auto n = static_cast<double>(sample.size());
  checked_denominator(den / (alpha * n), config, t0);
  return num / den;
}

double f2_density(const Sample& sample, const EstimatorConfig& config, double t0, double z0)
{
  require_nonempty(sample);
  require_beta(config);
  const auto& k = config.kernel1();
  const auto& kt = config.kernel2();
  if (!k.has_derivative() || !kt.first().has_derivative())
    throw DerivativeUnavailable("f2_density needs a differentiable time kernel");
  const double alpha = config.alpha();
  const double beta = config.beta();

  double g = 0.0;       // sum k(u)
  double g_prime = 0.0; // sum k'(u)
  double h1 = 0.0;      // sum delta k1(u) k2(v)
  double h1_dt = 0.0;   // sum delta k1'(u) k2(v)
  for (const auto& o : sample) {
    const double u = (t0 - o.t) / alpha;
    if (std::abs(u) > 1.0)
      continue;
    g += k(u);
    g_prime += k.derivative(u);
    if (!o.delta)
      continue;
    const double v = (z0 - o.z) / beta;
    if (std::abs(v) > 1.0)
      continue;
    const double kz = kt.second()(v);
    h1 += kt.first()(u) * kz;
    h1_dt += kt.first().derivative(u) * kz;
  }
  const auto n = static_cast<double>(sample.size());
  g /= alpha * n;
  g_prime /= alpha * alpha * n;
  h1 /= alpha * beta * n;
  h1_dt /= alpha * alpha * beta * n;
  checked_denominator(g, config, t0);
  return (g * h1_dt - g_prime * h1) / (g * g);
}

std::vector<GridRow> estimate_grid(const Sample& sample,
                                   const EstimatorConfig& config,
                                   std::span<const double> ts,
                                   std::span<const double> zs)
{
  auto attempt = [](auto&& f) -> std::optional<double> {
    try {
      return f();
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  std::vector<GridRow> rows;
  rows.reserve(ts.size() * zs.size());
  for (double t : ts) {
    for (double z : zs) {
      GridRow row{t, z, {}, {}, {}};
      row.F1 = attempt([&] { return F1(sample, config, t, z); });
      row.F2 = attempt([&] { return F2(sample, config, t, z); });
      row.f2 = attempt([&] { return f2_density(sample, config, t, z); });
      rows.push_back(row);
    }
  }
  return rows;
}

void write_grid_csv(std::ostream& out, std::span<const GridRow> rows)
{
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "t,z,F1,F2,f2\n";
  for (const auto& r : rows)
    out << format_double(r.t) << ',' << format_double(r.z) << ',' << cell(r.F1) << ','
        << cell(r.F2) << ',' << cell(r.f2) << '\n';
}

} // namespace csmark
