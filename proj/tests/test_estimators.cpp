#include "csmark/error.hpp"
#include "csmark/estimators.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace csmark;

namespace {

const UnivariateKernel epa = UnivariateKernel::epanechnikov();
const UnivariateKernel box = UnivariateKernel::uniform();

Sample records(std::vector<Observation> obs)
{
  return Sample(std::move(obs));
}

} // namespace

TEST_CASE("censoring density estimate")
{
  const EstimatorConfig cfg(box, {0.2, 0.1});
  CHECK(g_hat(records({{0.5, 0.0, false}}), cfg, 0.5) == doctest::Approx(2.5));
  CHECK(g_hat(records({{0.9, 0.0, false}, {0.1, 0.3, true}}), cfg, 0.5) == 0.0);

  const auto data = sample(scenario_A(), 100000, 11);
  const double est = g_hat(data, EstimatorConfig(epa, {0.05, 0.05}), 0.5);
  // one standard error is sqrt(0.6 / (n alpha)) ~ 0.011
  CHECK(std::abs(est - 1.0) < 0.03);
}

TEST_CASE("derivative of the censoring density estimate")
{
  const EstimatorConfig cfg(epa, {0.1, 0.1});
  CHECK(std::abs(g_hat_prime(records({{0.45, 0.0, false}, {0.55, 0.0, false}}), cfg, 0.5)) < 1e-12);
  CHECK(g_hat_prime(records({{0.5, 0.0, false}}), cfg, 0.5) == 0.0);
  CHECK_THROWS_AS(g_hat_prime(records({{0.5, 0.0, false}}), EstimatorConfig(box, {0.1, 0.1}), 0.5),
                  DerivativeUnavailable);

  const auto data = sample(scenario_B(), 100000, 12);
  const EstimatorConfig wide(epa, {0.08, 0.08});
  const double analytic = g_hat_prime(data, wide, 0.5);
  const double numeric = oracle::d1([&](double t) { return g_hat(data, wide, t); }, 0.5, 0.01);
  CHECK(std::abs(analytic - 2.0) < 0.3);
  CHECK(std::abs(analytic - numeric) < 0.05);
}

TEST_CASE("censored sub-density")
{
  const EstimatorConfig cfg(epa, {0.05, 0.05});
  CHECK(h0_hat(records({{0.5, 0.2, true}, {0.51, 0.7, true}}), cfg, 0.5) == 0.0);
  const auto data = sample(scenario_B(), 100000, 13);
  CHECK(std::abs(h0_hat(data, cfg, 0.5) - 0.625) < 0.02);
}

TEST_CASE("time-smoothed estimator edge cases")
{
  const EstimatorConfig cfg(epa, {0.2, 0.1});
  const auto obs = records({{0.5, 0.3, true}, {0.45, 0.9, true}, {0.6, 0.0, false}});
  CHECK(F1(obs, cfg, 0.5, 0.0) == 0.0);
  CHECK(F1(records({{0.5, 0.3, true}, {0.45, 0.9, true}}), cfg, 0.5, 0.9) == 1.0);
  CHECK(F1(obs, cfg, 0.5, 0.3) > 0.0);

  // ties at the evaluation mark count as included
  CHECK(F1(records({{0.5, 0.3, true}}), cfg, 0.5, 0.3) == 1.0);

  try {
    F1(obs, cfg, 0.95, 0.5);
    FAIL("expected an unstable denominator");
  } catch (const UnstableDenominator& e) {
    CHECK(e.denominator() == 0.0);
  }
}

TEST_CASE("counting form")
{
  const auto window = records({{0.5, 0.3, true}, {0.55, 0.9, true}, {0.45, 0.0, false}});
  CHECK(F1_counting(window, 0.5, 0.5, 0.1) == doctest::Approx(1.0 / 3.0));
  CHECK(F1_counting(records({{0.5, 0.0, false}, {0.52, 0.0, false}}), 0.5, 0.5, 0.1) == 0.0);
  CHECK_THROWS_AS(F1_counting(window, 0.9, 0.5, 0.1), UnstableDenominator);

  const EstimatorConfig cfg(box, {0.1, 0.1});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto data = sample(scenario_B(), 300, seed);
    for (double z : {0.2, 0.5, 0.8})
      CHECK(std::abs(F1(data, cfg, 0.5, z) - F1_counting(data, 0.5, z, 0.1)) <= 1e-14);
  }
}

TEST_CASE("estimators match direct-loop oracles")
{
  const auto data = sample(scenario_B(), 400, 21);
  std::vector<oracle::Record> raw;
  for (const auto& o : data)
    raw.push_back({o.t, o.z, o.delta});

  const EstimatorConfig cfg(epa, {0.15, 0.1});
  const EstimatorConfig truncated(epa, BivariateKernel::square(epa), {0.15, 0.1}, 1e-8,
                                  MarkIntegration::from_zero);
  for (double t : {0.3, 0.5, 0.7}) {
    for (double z : {0.05, 0.4, 0.8}) {
      CAPTURE(t);
      CAPTURE(z);
      CHECK(F1(data, cfg, t, z) ==
            doctest::Approx(oracle::time_smoothed(raw, oracle::epanechnikov, 0.15, t, z)).epsilon(1e-12));
      CHECK(F2(data, cfg, t, z) ==
            doctest::Approx(oracle::doubly_smoothed(raw, oracle::epanechnikov, 0.15, 0.1, t, z, -1.0))
              .epsilon(1e-10));
      CHECK(F2(data, truncated, t, z) ==
            doctest::Approx(oracle::doubly_smoothed(raw, oracle::epanechnikov, 0.15, 0.1, t, z, 0.0))
              .epsilon(1e-10));
    }
  }
}

TEST_CASE("estimates are probabilities and monotone in the mark")
{
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const auto data = sample(scenario_B(), 200, seed);
    for (const auto& k : {epa, box}) {
      const EstimatorConfig cfg(k, {0.15, 0.1});
      for (double t = 0.2; t < 0.85; t += 0.1) {
        double prev1 = 0.0, prev2 = 0.0;
        for (double z = 0.0; z <= 1.2; z += 0.05) {
          const double a = F1(data, cfg, t, z);
          const double b = F2(data, cfg, t, z);
          CHECK((a >= 0.0 && a <= 1.0));
          CHECK((b >= 0.0 && b <= 1.0 + 1e-15));
          CHECK(a >= prev1);
          CHECK(b >= prev2 - 1e-15);
          prev1 = a;
          prev2 = b;
        }
      }
    }
  }
}

TEST_CASE("marginal identity holds exactly")
{
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = sample(scenario_B(), 250, seed);
    const EstimatorConfig cfg(epa, {0.12, 0.07});
    for (double t : {0.3, 0.5, 0.8}) {
      const double lhs = 1.0 - F2(data, cfg, t, data.max_mark() + cfg.beta());
      const double rhs = h0_hat(data, cfg, t) / g_hat(data, cfg, t);
      CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
  }
}

TEST_CASE("bivariate estimator edge cases")
{
  const EstimatorConfig cfg(epa, {0.2, 0.1});
  CHECK(F2(records({{0.5, 0.3, true}, {0.55, 0.0, false}}), cfg, 0.5, 0.0) == 0.0);
  CHECK_THROWS_AS(F2(records({{0.5, 0.3, true}}), EstimatorConfig(epa, {0.2, 0.0}), 0.5, 0.3),
                  InvalidBandwidth);
  const EstimatorConfig mismatched(epa, BivariateKernel::square(box), {0.2, 0.1});
  CHECK_FALSE(mismatched.marginal_matches());
  CHECK_THROWS_AS(F2(records({{0.5, 0.3, true}}), mismatched, 0.5, 0.3), KernelConditionViolation);
  CHECK_THROWS_AS(EstimatorConfig(epa, {0.0, 0.1}), InvalidBandwidth);
}

TEST_CASE("estimators are not monotone in time")
{
  // Guards against accidental isotonisation: a seeded sample whose
  // estimates decrease somewhere along t at a fixed mark.
  const auto data = sample(scenario_B(), 200, 7);
  const EstimatorConfig cfg(epa, {0.1, 0.1});
  bool f1_drops = false;
  bool f2_drops = false;
  for (double t = 0.2; t < 0.8; t += 0.02) {
    f1_drops = f1_drops || F1(data, cfg, t + 0.02, 0.5) < F1(data, cfg, t, 0.5);
    f2_drops = f2_drops || F2(data, cfg, t + 0.02, 0.5) < F2(data, cfg, t, 0.5);
  }
  CHECK(f1_drops);
  CHECK(f2_drops);
}

TEST_CASE("density estimate")
{
  // A kernel with a continuous derivative keeps the finite differences of
  // F2 smooth at every window edge.
  const auto triweight = UnivariateKernel::custom(
    "triweight",
    [](double u) { return std::abs(u) <= 1.0 ? 35.0 / 32.0 * std::pow(1.0 - u * u, 3) : 0.0; },
    [](double u) {
      const double v = std::clamp(u, -1.0, 1.0);
      return 0.5 + 35.0 / 32.0 * (v - v * v * v + 0.6 * std::pow(v, 5) - std::pow(v, 7) / 7.0);
    },
    [](double u) { return std::abs(u) <= 1.0 ? -210.0 / 32.0 * u * (1.0 - u * u) * (1.0 - u * u) : 0.0; });
  const auto data = sample(scenario_B(), 2000, 31);
  for (const auto& k : {triweight, epa}) {
    const EstimatorConfig cfg(k, {0.2, 0.2});
    for (double t : {0.35, 0.5, 0.65}) {
      // the Epanechnikov derivative jumps at the window edge; skip points
      // where an inspection time sits within the difference stencil of it
      const bool near_edge = std::any_of(data.begin(), data.end(), [&](const Observation& o) {
        return std::abs(std::abs(t - o.t) - 0.2) < 3e-4;
      });
      if (k.family() == KernelFamily::epanechnikov && near_edge)
        continue;
      for (double z : {0.35, 0.5, 0.65}) {
        CAPTURE(k.name());
        CAPTURE(t);
        CAPTURE(z);
        const double fd = oracle::mixed([&](double a, double b) { return F2(data, cfg, a, b); }, t, z);
        const double exact = f2_density(data, cfg, t, z);
        CHECK(std::abs(fd - exact) <= 1e-3 * std::abs(exact));
      }
    }
  }
  const EstimatorConfig cfg(epa, {0.2, 0.2});

  const auto big = sample(scenario_B(), 100000, 32);
  CHECK(std::abs(f2_density(big, EstimatorConfig(epa, {0.1, 0.1}), 0.5, 0.5) - 1.0) < 0.15);

  // no uncensored records near the point and a flat time design
  std::vector<Observation> flat;
  for (int i = 0; i < 101; ++i)
    flat.push_back({i / 100.0, 0.0, false});
  CHECK(f2_density(Sample(flat), cfg, 0.5, 0.5) == doctest::Approx(0.0));

  CHECK_THROWS_AS(f2_density(data, EstimatorConfig(box, {0.2, 0.2}), 0.5, 0.5),
                  DerivativeUnavailable);
}

TEST_CASE("grid evaluation and CSV")
{
  const auto data = sample(scenario_B(), 300, 41);
  const std::vector<double> ts{0.5, 1.5};
  const std::vector<double> zs{0.25, 0.75};
  const auto rows = estimate_grid(data, EstimatorConfig(epa, {0.2, 0.1}), ts, zs);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].F1.has_value());
  CHECK(rows[0].f2.has_value());
  CHECK_FALSE(rows[3].F1.has_value());

  std::ostringstream out;
  write_grid_csv(out, rows);
  const std::string text = out.str();
  CHECK(text.rfind("t,z,F1,F2,f2\n", 0) == 0);
  CHECK(text.find("1.5,0.75,,,\n") != std::string::npos);
}
