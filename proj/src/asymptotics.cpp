#include "csmark/asymptotics.hpp"

#include "csmark/csv.hpp"
#include "csmark/error.hpp"
#include "csmark/numerics.hpp"
#include "csmark/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

namespace csmark {

namespace {

constexpr double fifth = 0.2;
constexpr double degenerate_threshold = 1e-12;

bool is_fifth(double exponent)
{
  return std::abs(exponent - fifth) <= 1e-12;
}

double rate(std::size_t n)
{
  return std::pow(static_cast<double>(n), 0.4);
}

// Runs plan.m replications of `statistic(seed)`, counting library errors
// as failures. Successful values keep replication order.
template <class Statistic>
MonteCarloSummary replicate(const ReplicationPlan& plan, Statistic&& statistic)
{
  if (plan.m < 2)
    throw DomainError("Monte Carlo runs need m >= 2");
  std::vector<std::optional<double>> slots(plan.m);
  parallel_for(plan.m, plan.threads, [&](std::size_t r) {
    try {
      slots[r] = statistic(plan.seed + r);
    } catch (const Error&) {
      slots[r].reset();
    }
  });
  MonteCarloSummary s;
  s.requested = plan.m;
  for (const auto& v : slots) {
    if (v)
      s.values.push_back(*v);
    else
      ++s.failures;
  }
  s.m = s.values.size();
  const auto mv = mean_variance(s.values);
  s.mean = mv.mean;
  s.variance = mv.variance;
  return s;
}

void fill_mse(MonteCarloSummary& s, double scale)
{
  std::vector<double> squares;
  squares.reserve(s.values.size());
  for (double v : s.values)
    squares.push_back((v / scale) * (v / scale));
  const auto mv = mean_variance(squares);
  s.mean_sq_error = mv.mean;
  s.std_err_of_mse = std::sqrt(mv.variance / static_cast<double>(squares.size()));
}

double estimate(EstimatorKind kind, const Sample& sample, const EstimatorConfig& config, Point p)
{
  return kind == EstimatorKind::F1 ? F1(sample, config, p.t, p.z) : F2(sample, config, p.t, p.z);
}

} // namespace

void BandwidthSchedule::validate() const
{
  if (!(c1 > 0.0) || !(c2 > 0.0))
    throw InvalidBandwidth("schedule constants must be positive");
  if (!(beta_exponent > 0.0 && beta_exponent < 1.0))
    throw InvalidBandwidth("beta exponent must lie in (0, 1)");
}

Bandwidths BandwidthSchedule::at(std::size_t n) const
{
  validate();
  const auto dn = static_cast<double>(n);
  return {c1 * std::pow(dn, -fifth), c2 * std::pow(dn, -beta_exponent)};
}

BandwidthSchedule BandwidthSchedule::from_fixed(Bandwidths bandwidths,
                                                std::size_t n,
                                                double beta_exponent)
{
  const auto dn = static_cast<double>(n);
  BandwidthSchedule s;
  s.c1 = bandwidths.alpha * std::pow(dn, fifth);
  s.c2 = bandwidths.beta > 0.0 ? bandwidths.beta * std::pow(dn, beta_exponent) : 1.0;
  s.beta_exponent = beta_exponent;
  return s;
}

AsymptoticParams mu1_sigma2(const Scenario& scenario,
                            Point point,
                            double c,
                            const UnivariateKernel& kernel)
{
  if (!(c > 0.0))
    throw InvalidBandwidth("bandwidth constant must be positive");
  const double g = scenario.censoring_density(point.t);
  if (!(g > 0.0))
    throw DomainError("censoring density vanishes at t0 = " + std::to_string(point.t));
  const double g_prime = scenario.censoring_density_prime(point.t);
  const double F = scenario.cdf(point.t, point.z);
  const double bracket =
    scenario.cdf_dxx(point.t, point.z) + 2.0 * g_prime * scenario.cdf_dx(point.t, point.z) / g;

  AsymptoticParams p;
  p.point = point;
  p.degenerate = std::abs(bracket) < degenerate_threshold;
  p.mu1 = 0.5 * c * c * kernel.second_moment() * bracket;
  p.sigma2 = F * (1.0 - F) / (c * g) * kernel.l2_norm_sq();
  p.mu2 = p.mu1;
  return p;
}

double mu2(const Scenario& scenario,
           Point point,
           const BandwidthSchedule& schedule,
           const UnivariateKernel& kernel1,
           const BivariateKernel& kernel2)
{
  schedule.validate();
  if (schedule.beta_exponent < fifth && !is_fifth(schedule.beta_exponent))
    throw DivergenceError(
      "for beta exponents below 1/5 the scaled difference between the estimators diverges");
  const double mu1 = mu1_sigma2(scenario, point, schedule.c1, kernel1).mu1;
  if (!is_fifth(schedule.beta_exponent))
    return mu1;
  return mu1 + 0.5 * schedule.c2 * schedule.c2 * kernel2.second_moment(0) *
                 scenario.cdf_dzz(point.t, point.z);
}

const char* to_string(EstimatorKind kind)
{
  return kind == EstimatorKind::F1 ? "F1" : "F2";
}

MonteCarloSummary mc_normality(const Scenario& scenario,
                               EstimatorKind estimator,
                               Point point,
                               const BandwidthSchedule& schedule,
                               const UnivariateKernel& kernel,
                               const ReplicationPlan& plan)
{
  const Bandwidths bw = schedule.at(plan.n);
  const EstimatorConfig config(kernel, bw);
  const double truth = scenario.cdf(point.t, point.z);
  const double scale = rate(plan.n);

  auto s = replicate(plan, [&](std::uint64_t seed) {
    const Sample data = sample(scenario, plan.n, seed);
    return scale * (estimate(estimator, data, config, point) - truth);
  });

  const auto params = mu1_sigma2(scenario, point, schedule.c1, kernel);
  s.reference_mean = estimator == EstimatorKind::F1
                       ? params.mu1
                       : mu2(scenario, point, schedule, kernel, config.kernel2());
  s.reference_variance = params.sigma2;
  s.ks_distance = ks_distance_normal(s.values, s.reference_mean, s.reference_variance);
  fill_mse(s, scale);
  return s;
}

std::vector<QQPoint> qq_data(const MonteCarloSummary& summary)
{
  std::vector<double> sorted = summary.values;
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(summary.reference_variance);
  const auto m = static_cast<double>(sorted.size());
  std::vector<QQPoint> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double q = normal_quantile((static_cast<double>(i) + 0.5) / m);
    out.push_back({q, sorted[i], summary.reference_mean + q * sd});
  }
  return out;
}

MonteCarloSummary mc_mse(const Scenario& scenario,
                         EstimatorKind estimator,
                         Point point,
                         Bandwidths bandwidths,
                         const UnivariateKernel& kernel,
                         const ReplicationPlan& plan)
{
  const EstimatorConfig config(kernel, bandwidths);
  const double truth = scenario.cdf(point.t, point.z);
  auto s = replicate(plan, [&](std::uint64_t seed) {
    const Sample data = sample(scenario, plan.n, seed);
    return estimate(estimator, data, config, point) - truth;
  });
  fill_mse(s, 1.0);
  return s;
}

EquivalenceCurve equivalence_curve(const Scenario& scenario,
                                   Point point,
                                   std::span<const std::size_t> n_grid,
                                   const BandwidthSchedule& schedule,
                                   const UnivariateKernel& kernel,
                                   std::uint64_t seed,
                                   double envelope_constant)
{
  EquivalenceCurve curve;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const std::size_t n = n_grid[i];
    const EstimatorConfig config(kernel, schedule.at(n));
    const Sample data = sample(scenario, n, seed + i);
    double diff = 0.0;
    try {
      diff = rate(n) * (F2(data, config, point.t, point.z) - F1(data, config, point.t, point.z));
    } catch (const UnstableDenominator&) {
      ++curve.failures;
      continue;
    }
    const double envelope = envelope_constant * std::pow(static_cast<double>(n), -1.0 / 6.0);
    if (std::abs(diff) <= envelope)
      ++inside;
    curve.rows.push_back({n, diff, envelope});
  }
  if (!n_grid.empty())
    curve.fraction_inside = static_cast<double>(inside) / static_cast<double>(n_grid.size());
  return curve;
}

MonteCarloSummary mc_difference(const Scenario& scenario,
                                Point point,
                                const BandwidthSchedule& schedule,
                                const UnivariateKernel& kernel,
                                const ReplicationPlan& plan)
{
  const EstimatorConfig config(kernel, schedule.at(plan.n));
  const double scale = rate(plan.n);
  auto s = replicate(plan, [&](std::uint64_t seed) {
    const Sample data = sample(scenario, plan.n, seed);
    return scale * (F2(data, config, point.t, point.z) - F1(data, config, point.t, point.z));
  });
  s.reference_mean = mu2(scenario, point, schedule, kernel, config.kernel2()) -
                     mu1_sigma2(scenario, point, schedule.c1, kernel).mu1;
  return s;
}

std::vector<std::size_t> geometric_sizes(std::size_t lo, std::size_t hi, std::size_t count)
{
  std::vector<std::size_t> out;
  if (count == 0)
    return out;
  if (count == 1)
    return {lo};
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (std::size_t i = 0; i < count; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(static_cast<std::size_t>(std::llround(std::exp(x))));
  }
  return out;
}

MeanFunctionalEstimate mean_functional(const Sample& sample,
                                       double alpha,
                                       std::size_t grid,
                                       double lo,
                                       double hi)
{
  if (!(alpha > 0.0))
    throw InvalidBandwidth("alpha must be positive, got " + std::to_string(alpha));
  if (sample.empty())
    throw EmptySample("mean functional needs observations");
  if (grid == 0 || !(hi > lo))
    throw DomainError("mean functional needs a non-empty integration range");

  // Sorted times with a running count of uncensored records turn every
  // window count into two binary searches.
  std::vector<std::pair<double, bool>> records;
  records.reserve(sample.size());
  for (const auto& o : sample)
    records.emplace_back(o.t, o.delta);
  std::sort(records.begin(), records.end());
  std::vector<double> times(records.size());
  std::vector<std::size_t> uncensored_before(records.size() + 1, 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    times[i] = records[i].first;
    uncensored_before[i + 1] = uncensored_before[i] + (records[i].second ? 1 : 0);
  }

  const double h = (hi - lo) / static_cast<double>(grid);
  std::vector<std::optional<double>> survival(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    const double x = lo + (static_cast<double>(j) + 0.5) * h;
    const auto first = std::lower_bound(times.begin(), times.end(), x - alpha) - times.begin();
    const auto last = std::upper_bound(times.begin(), times.end(), x + alpha) - times.begin();
    if (last <= first)
      continue;
    const auto count = static_cast<double>(last - first);
    const auto hits = static_cast<double>(uncensored_before[last] - uncensored_before[first]);
    survival[j] = 1.0 - hits / count;
  }

  MeanFunctionalEstimate out;
  double sum = 0.0;
  for (std::size_t j = 0; j < grid; ++j) {
    if (survival[j]) {
      sum += *survival[j];
      continue;
    }
    // nearest evaluable midpoint, preferring the left one on ties
    std::optional<double> fill;
    for (std::size_t d = 1; d < grid && !fill; ++d) {
      if (j >= d && survival[j - d])
        fill = survival[j - d];
      else if (j + d < grid && survival[j + d])
        fill = survival[j + d];
    }
    if (!fill)
      throw UnstableDenominator("no midpoint has inspection times in its window", 0.0);
    sum += *fill;
    ++out.fallback_points;
  }
  out.value = lo + sum * h;
  return out;
}

double true_mean(const Scenario& scenario)
{
  const auto& box = scenario.support;
  return box.t_lo +
         integrate([&](double x) { return 1.0 - scenario.marginal_cdf_x(x); }, box.t_lo, box.t_hi);
}

double efficient_variance(const Scenario& scenario)
{
  const auto& box = scenario.support;
  return integrate(
    [&](double t) {
      const double F = scenario.marginal_cdf_x(t);
      const double numerator = F * (1.0 - F);
      if (numerator == 0.0)
        return 0.0;
      return numerator / scenario.censoring_density(t);
    },
    box.t_lo,
    box.t_hi,
    1e-8);
}

double AlphaRule::at(std::size_t n) const
{
  return constant * std::pow(static_cast<double>(n), -exponent);
}

MonteCarloSummary mc_functional(const Scenario& scenario, AlphaRule rule, const ReplicationPlan& plan)
{
  const double alpha = rule.at(plan.n);
  const double truth = true_mean(scenario);
  const double root_n = std::sqrt(static_cast<double>(plan.n));
  const auto& box = scenario.support;
  auto s = replicate(plan, [&](std::uint64_t seed) {
    const Sample data = sample(scenario, plan.n, seed);
    return root_n * (mean_functional(data, alpha, 2000, box.t_lo, box.t_hi).value - truth);
  });
  s.reference_mean = 0.0;
  s.reference_variance = efficient_variance(scenario);
  fill_mse(s, root_n);
  return s;
}

void write_statistics_csv(std::ostream& out, const MonteCarloSummary& summary)
{
  out << "replicate,statistic\n";
  for (std::size_t i = 0; i < summary.values.size(); ++i)
    out << i << ',' << format_double(summary.values[i]) << '\n';
}

void write_summary_line(std::ostream& out, const MonteCarloSummary& summary)
{
  auto number = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("null"); };
  out << "{\"m\":" << summary.m << ",\"ks\":" << number(summary.ks_distance)
      << ",\"mu\":" << number(summary.reference_mean)
      << ",\"sigma2\":" << number(summary.reference_variance) << "}\n";
}

void write_equivalence_csv(std::ostream& out, const EquivalenceCurve& curve)
{
  out << "n,diff,envelope\n";
  for (const auto& r : curve.rows)
    out << r.n << ',' << format_double(r.diff) << ',' << format_double(r.envelope) << '\n';
}

} // namespace csmark
