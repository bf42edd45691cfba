#include "csmark/bandwidth.hpp"
#include "csmark/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace csmark;

namespace {

const UnivariateKernel epa = UnivariateKernel::epanechnikov();

MseRow row(double alpha, double mse, double beta = 0.0, bool valid = true,
           EstimatorKind kind = EstimatorKind::F1)
{
  return {kind, alpha, beta, mse, NAN, 0, valid};
}

} // namespace

TEST_CASE("kernel variates follow the kernel")
{
  Rng rng(5);
  for (const auto& k : {UnivariateKernel::uniform(), epa}) {
    std::vector<int> bins(10, 0);
    const int draws = 50000;
    for (int i = 0; i < draws; ++i) {
      const double u = sample_kernel(k, rng);
      REQUIRE((u >= -1.0 && u <= 1.0));
      ++bins[std::min(9, static_cast<int>((u + 1.0) * 5.0))];
    }
    for (int b = 0; b < 10; ++b) {
      const double p = k.antiderivative(-1.0 + 0.2 * (b + 1)) - k.antiderivative(-1.0 + 0.2 * b);
      const double se = std::sqrt(p * (1.0 - p) / draws);
      CHECK(std::abs(bins[b] / double(draws) - p) < 4.0 * se);
    }
  }
}

TEST_CASE("pilot resamples")
{
  const auto data = sample(scenario_B(), 100, 3);
  const auto pilot = fit_pilot(data, 0.4, 0.4, epa);
  CHECK(pilot.envelope() > 0.0);

  double observed = 0.0;
  for (const auto& o : data)
    observed += o.delta;
  observed /= 100.0;

  double resampled = 0.0;
  std::size_t total = 0;
  for (std::uint64_t b = 0; b < 20; ++b) {
    const auto boot = pilot.resample(100, b);
    REQUIRE(boot.size() == 100);
    for (const auto& o : boot) {
      CHECK((o.delta || o.z == 0.0));
      CHECK((o.t >= 0.0 && o.t <= 1.0));
      resampled += o.delta;
      ++total;
    }
  }
  CHECK(std::abs(resampled / total - observed) < 0.1);
}

TEST_CASE("pilot times follow the truncated pilot design density")
{
  // Smoothing a flat design leaks mass past both ends, so after
  // truncation the pilot is not flat; bin masses come from the pilot's own
  // density integrated by Simpson.
  const auto data = sample(scenario_A(), 2000, 4);
  const auto pilot = fit_pilot(data, 0.4, 0.4, epa);
  const auto g0 = [&](double t) { return g_hat(data, pilot.config(), t); };
  const double kept = oracle::simpson(g0, 0.0, 1.0);
  Rng rng(9);
  std::vector<int> bins(10, 0);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i)
    ++bins[std::min(9, static_cast<int>(pilot.draw_time(rng) * 10.0))];
  for (int b = 0; b < 10; ++b) {
    const double p = oracle::simpson(g0, 0.1 * b, 0.1 * (b + 1)) / kept;
    const double se = std::sqrt(p * (1.0 - p) / draws);
    CHECK(std::abs(bins[b] / double(draws) - p) < 3.0 * se);
  }
}

TEST_CASE("degenerate pilot")
{
  std::vector<Observation> none;
  for (int i = 0; i < 50; ++i)
    none.push_back({0.02 * i, 0.0, false});
  CHECK_THROWS_AS(fit_pilot(Sample(none), 0.4, 0.4, epa), DegeneratePilot);
}

TEST_CASE("bootstrap with a single replication")
{
  const auto data = sample(scenario_B(), 100, 6);
  BootstrapPlan plan;
  plan.B = 1;
  plan.alpha_grid = {0.2, 0.3};
  plan.beta_grid = {0.2};
  plan.truth = scenario_B().cdf(0.5, 0.5);
  const auto table = bootstrap_mse(data, plan, epa);
  REQUIRE(table.rows.size() == 4);

  const auto pilot = fit_pilot(data, 0.4, 0.4, epa);
  const auto boot = pilot.resample(100, plan.seed);
  const double est = F1(boot, pilot.config().with_bandwidths({0.2, 0.4}), 0.5, 0.5);
  CHECK(table.rows[0].mse_hat == doctest::Approx((est - table.pilot_value) * (est - table.pilot_value)));
  CHECK(table.rows[0].mse_tilde == doctest::Approx((est - *plan.truth) * (est - *plan.truth)));
  for (const auto& r : table.rows)
    CHECK(std::isfinite(r.mse_hat));
}

TEST_CASE("bootstrap plan validation")
{
  const auto data = sample(scenario_B(), 100, 6);
  BootstrapPlan plan;
  plan.alpha_grid = {0.3, 0.2};
  CHECK_THROWS_AS(bootstrap_mse(data, plan, epa), DomainError);
  plan.alpha_grid = {};
  CHECK_THROWS_AS(bootstrap_mse(data, plan, epa), DomainError);
  plan.alpha_grid = {0.2};
  plan.B = 0;
  CHECK_THROWS_AS(bootstrap_mse(data, plan, epa), DomainError);
}

TEST_CASE("bootstrap is reproducible across worker counts")
{
  const auto data = sample(scenario_B(), 100, 8);
  BootstrapPlan plan;
  plan.B = 40;
  plan.alpha_grid = {0.15, 0.3, 0.45};
  plan.beta_grid = {0.1, 0.3};
  plan.seed = 17;
  const auto one = bootstrap_mse(data, plan, epa);
  plan.threads = 4;
  const auto many = bootstrap_mse(data, plan, epa);
  REQUIRE(one.rows.size() == many.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i)
    CHECK(one.rows[i].mse_hat == many.rows[i].mse_hat);

  std::ostringstream out;
  write_bootstrap_csv(out, one);
  CHECK(out.str().rfind("estimator,alpha,beta,mse_hat,mse_tilde,failures\nF1,0.15,,", 0) == 0);
}

TEST_CASE("selection")
{
  const std::vector<MseRow> rows{row(0.2, 0.004), row(0.3, 0.002), row(0.4, 0.003)};
  CHECK(select(rows, EstimatorKind::F1).alpha == 0.3);

  const std::vector<MseRow> tie{row(0.3, 0.002), row(0.2, 0.002)};
  CHECK(select(tie, EstimatorKind::F1).alpha == 0.2);

  const std::vector<MseRow> beta_tie{row(0.2, 0.001, 0.3, true, EstimatorKind::F2),
                                     row(0.2, 0.001, 0.1, true, EstimatorKind::F2)};
  CHECK(select(beta_tie, EstimatorKind::F2).beta == 0.1);

  const std::vector<MseRow> invalid{row(0.2, 0.001, 0.0, false)};
  CHECK_THROWS_AS(select(invalid, EstimatorKind::F1), SelectionFailure);

  BootstrapTable table;
  table.rows = rows;
  const auto chosen = select(table);
  CHECK(chosen.F1.has_value());
  CHECK_FALSE(chosen.F2.has_value());
}
