#include "csmark/bandwidth.hpp"

#include "csmark/csv.hpp"
#include "csmark/error.hpp"
#include "csmark/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace csmark {

namespace {

constexpr int envelope_grid = 200;
constexpr double envelope_margin = 1.1;

void require_grid(const std::vector<double>& grid, const char* name, bool allow_empty)
{
  if (grid.empty()) {
    if (allow_empty)
      return;
    throw DomainError(std::string(name) + " must not be empty");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0))
      throw DomainError(std::string(name) + " must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw DomainError(std::string(name) + " must be strictly increasing");
  }
}

} // namespace

void BootstrapPlan::validate() const
{
  if (B == 0)
    throw DomainError("bootstrap needs B >= 1");
  if (!(alpha0 > 0.0) || !(beta0 > 0.0))
    throw InvalidBandwidth("pilot bandwidths must be positive");
  require_grid(alpha_grid, "alpha grid", false);
  require_grid(beta_grid, "beta grid", true);
}

double default_pilot_bandwidth(std::size_t n)
{
  return 0.4 * std::pow(100.0 / static_cast<double>(n), 0.2);
}

double sample_kernel(const UnivariateKernel& k, Rng& rng)
{
  const double p = rng.uniform();
  switch (k.family()) {
    case KernelFamily::uniform:
      return 2.0 * p - 1.0;
    case KernelFamily::epanechnikov:
      // root of u^3 - 3u + 4p - 2 = 0 in [-1, 1]
      return 2.0 * std::sin(std::asin(2.0 * p - 1.0) / 3.0);
    case KernelFamily::custom:
      break;
  }
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (k.antiderivative(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

PilotModel::PilotModel(const Sample& sample, const EstimatorConfig& config, Box support)
  : sample_(sample), config_(config), support_(support)
{
  if (sample_.empty())
    throw EmptySample("pilot fit needs observations");
  double peak = 0.0;
  for (int i = 0; i < envelope_grid; ++i) {
    const double x =
      support_.t_lo + (support_.t_hi - support_.t_lo) * i / (envelope_grid - 1.0);
    for (int j = 0; j < envelope_grid; ++j) {
      const double y =
        support_.z_lo + (support_.z_hi - support_.z_lo) * j / (envelope_grid - 1.0);
      peak = std::max(peak, clipped_density(x, y));
    }
  }
  if (!(peak > 0.0))
    throw DegeneratePilot("pilot density is nowhere positive on the support box");
  envelope_ = envelope_margin * peak;
}

double PilotModel::clipped_density(double x, double y) const
{
  if (!support_.contains(x, y))
    return 0.0;
  try {
    return std::max(0.0, f2_density(sample_, config_, x, y));
  } catch (const UnstableDenominator&) {
    return 0.0;
  }
}

double PilotModel::cdf(Point p) const
{
  return F2(sample_, config_, p.t, p.z);
}

double PilotModel::draw_time(Rng& rng) const
{
  const auto& k = config_.kernel1();
  const double alpha = config_.alpha();
  for (;;) {
    const auto i = rng.below(sample_.size());
    const double t = sample_[i].t + alpha * sample_kernel(k, rng);
    if (t >= support_.t_lo && t <= support_.t_hi)
      return t;
  }
}

HiddenPair PilotModel::draw_pair(Rng& rng, double& envelope) const
{
  const double width = support_.t_hi - support_.t_lo;
  const double height = support_.z_hi - support_.z_lo;
  for (;;) {
    const double x = support_.t_lo + width * rng.uniform();
    const double y = support_.z_lo + height * rng.uniform();
    const double level = envelope * rng.uniform();
    const double f = clipped_density(x, y);
    if (f > envelope) {
      envelope = envelope_margin * f;
      continue;
    }
    if (level < f)
      return {x, y};
  }
}

Sample PilotModel::resample(std::size_t n, std::uint64_t seed) const
{
  Rng rng(seed);
  double envelope = envelope_;
  std::vector<Observation> obs;
  obs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const HiddenPair pair = draw_pair(rng, envelope);
    const double t = draw_time(rng);
    const bool delta = pair.x <= t;
    obs.push_back({t, delta ? pair.y : 0.0, delta});
  }
  return Sample(std::move(obs), seed);
}

PilotModel fit_pilot(const Sample& sample,
                     double alpha0,
                     double beta0,
                     const UnivariateKernel& kernel,
                     Box support)
{
  const EstimatorConfig config(kernel, Bandwidths{alpha0, beta0});
  return PilotModel(sample, config, support);
}

BootstrapTable bootstrap_mse(const Sample& sample,
                             const BootstrapPlan& plan,
                             const UnivariateKernel& kernel,
                             Box support)
{
  plan.validate();
  const PilotModel pilot = fit_pilot(sample, plan.alpha0, plan.beta0, kernel, support);
  const double target = pilot.cdf(plan.point);
  const EstimatorConfig base = pilot.config();

  const std::size_t na = plan.alpha_grid.size();
  const std::size_t nb = plan.beta_grid.size();
  const std::size_t candidates = na + na * nb;

  // estimates[b * candidates + c]; F1 candidates first, then F2 row-major
  // in (alpha, beta).
  std::vector<std::optional<double>> estimates(plan.B * candidates);
  parallel_for(plan.B, plan.threads, [&](std::size_t b) {
    const Sample boot = pilot.resample(sample.size(), plan.seed + b);
    auto* slot = &estimates[b * candidates];
    for (std::size_t i = 0; i < na; ++i) {
      const auto config = base.with_bandwidths({plan.alpha_grid[i], base.beta()});
      try {
        slot[i] = F1(boot, config, plan.point.t, plan.point.z);
      } catch (const Error&) {
      }
      for (std::size_t j = 0; j < nb; ++j) {
        const auto config2 = base.with_bandwidths({plan.alpha_grid[i], plan.beta_grid[j]});
        try {
          slot[na + i * nb + j] = F2(boot, config2, plan.point.t, plan.point.z);
        } catch (const Error&) {
        }
      }
    }
  });

  BootstrapTable table;
  table.pilot_value = target;
  table.B = plan.B;
  auto reduce = [&](std::size_t c, EstimatorKind kind, double alpha, double beta) {
    double hat = 0.0;
    double tilde = 0.0;
    std::size_t ok = 0;
    for (std::size_t b = 0; b < plan.B; ++b) {
      const auto& v = estimates[b * candidates + c];
      if (!v)
        continue;
      hat += (*v - target) * (*v - target);
      if (plan.truth)
        tilde += (*v - *plan.truth) * (*v - *plan.truth);
      ++ok;
    }
    const std::size_t failures = plan.B - ok;
    MseRow row{kind, alpha, beta, NAN, NAN, failures, failures * 100 <= plan.B && ok > 0};
    if (ok > 0) {
      row.mse_hat = hat / static_cast<double>(ok);
      if (plan.truth)
        row.mse_tilde = tilde / static_cast<double>(ok);
    }
    table.rows.push_back(row);
  };
  for (std::size_t i = 0; i < na; ++i)
    reduce(i, EstimatorKind::F1, plan.alpha_grid[i], 0.0);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      reduce(na + i * nb + j, EstimatorKind::F2, plan.alpha_grid[i], plan.beta_grid[j]);
  return table;
}

Choice select(std::span<const MseRow> rows, EstimatorKind estimator)
{
  const MseRow* best = nullptr;
  for (const auto& row : rows) {
    if (row.estimator != estimator || !row.valid)
      continue;
    if (!best || row.mse_hat < best->mse_hat ||
        (row.mse_hat == best->mse_hat &&
         (row.alpha < best->alpha || (row.alpha == best->alpha && row.beta < best->beta))))
      best = &row;
  }
  if (!best)
    throw SelectionFailure(std::string("no valid bandwidth candidate for ") +
                           to_string(estimator));
  return {best->alpha, best->beta, best->mse_hat};
}

Selection select(const BootstrapTable& table)
{
  Selection out;
  auto present = [&](EstimatorKind kind) {
    return std::any_of(table.rows.begin(), table.rows.end(),
                       [&](const MseRow& r) { return r.estimator == kind; });
  };
  if (present(EstimatorKind::F1))
    out.F1 = select(table.rows, EstimatorKind::F1);
  if (present(EstimatorKind::F2))
    out.F2 = select(table.rows, EstimatorKind::F2);
  return out;
}

void write_bootstrap_csv(std::ostream& out, const BootstrapTable& table)
{
  out << "estimator,alpha,beta,mse_hat,mse_tilde,failures\n";
  for (const auto& r : table.rows) {
    out << to_string(r.estimator) << ',' << format_double(r.alpha) << ',';
    if (r.estimator == EstimatorKind::F2)
      out << format_double(r.beta);
    out << ',' << format_double(r.mse_hat) << ',';
    if (!std::isnan(r.mse_tilde))
      out << format_double(r.mse_tilde);
    out << ',' << r.failures << '\n';
  }
}

} // namespace csmark
