#include "csmark/scenarios.hpp"

#include "csmark/csv.hpp"
#include "csmark/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace csmark {

namespace {

double clamp01(double v)
{
  return std::clamp(v, 0.0, 1.0);
}

bool in_unit(double v)
{
  return v >= 0.0 && v <= 1.0;
}

} // namespace

Scenario scenario_A()
{
  Scenario s;
  s.id = "A";
  s.cdf = [](double x, double y) { return clamp01(x) * clamp01(y); };
  s.density = [](double x, double y) { return in_unit(x) && in_unit(y) ? 1.0 : 0.0; };
  s.cdf_dx = [](double, double y) { return y; };
  s.cdf_dxx = [](double, double) { return 0.0; };
  s.cdf_dz = [](double x, double) { return x; };
  s.cdf_dzz = [](double, double) { return 0.0; };
  s.marginal_cdf_x = [](double x) { return clamp01(x); };
  s.censoring_density = [](double t) { return in_unit(t) ? 1.0 : 0.0; };
  s.censoring_density_prime = [](double) { return 0.0; };
  s.censoring_density_second = [](double) { return 0.0; };
  s.support = Box{};
  s.draw_hidden = [](Rng& rng) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    return HiddenPair{x, y};
  };
  s.draw_censoring = [](Rng& rng) { return rng.uniform(); };
  return s;
}

Scenario scenario_B()
{
  Scenario s;
  s.id = "B";
  s.cdf = [](double x, double y) {
    x = clamp01(x);
    y = clamp01(y);
    return 0.5 * x * y * (x + y);
  };
  s.density = [](double x, double y) { return in_unit(x) && in_unit(y) ? x + y : 0.0; };
  s.cdf_dx = [](double x, double y) { return x * y + 0.5 * y * y; };
  s.cdf_dxx = [](double, double y) { return y; };
  s.cdf_dz = [](double x, double y) { return 0.5 * x * x + x * y; };
  s.cdf_dzz = [](double x, double) { return x; };
  s.marginal_cdf_x = [](double x) {
    x = clamp01(x);
    return 0.5 * x * (x + 1.0);
  };
  s.censoring_density = [](double t) { return in_unit(t) ? 2.0 * t : 0.0; };
  s.censoring_density_prime = [](double t) { return in_unit(t) ? 2.0 : 0.0; };
  s.censoring_density_second = [](double) { return 0.0; };
  s.support = Box{};
  // Inverse CDFs in closed form: marginal x^2/2 + x/2 = u, then the
  // conditional (xy + y^2/2)/(x + 1/2) = v; both take the root in [0, 1].
  s.draw_hidden = [](Rng& rng) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    const double x = 0.5 * (std::sqrt(1.0 + 8.0 * u) - 1.0);
    const double y = std::sqrt(x * x + v * (2.0 * x + 1.0)) - x;
    return HiddenPair{x, std::min(y, 1.0)};
  };
  s.draw_censoring = [](Rng& rng) { return std::sqrt(rng.uniform()); };
  return s;
}

Scenario scenario_by_id(const std::string& id)
{
  std::string key = id;
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  if (key == "A")
    return scenario_A();
  if (key == "B")
    return scenario_B();
  throw DomainError("unknown scenario '" + id + "'");
}

Sample::Sample(std::vector<Observation> observations, std::uint64_t seed)
  : observations_(std::move(observations)), seed_(seed)
{
  for (const auto& o : observations_) {
    if (!(o.t >= 0.0) || !(o.z >= 0.0))
      throw DomainError("observation with negative time or mark");
    if (!o.delta && o.z != 0.0)
      throw DomainError("censored observation (delta = 0) must carry z = 0");
  }
}

double Sample::max_mark() const noexcept
{
  double m = 0.0;
  for (const auto& o : observations_)
    m = std::max(m, o.z);
  return m;
}

Sample sample(const Scenario& scenario, std::size_t n, std::uint64_t seed)
{
  if (n == 0)
    throw EmptySample("sample size must be at least 1");
  Rng rng(seed);
  std::vector<Observation> obs;
  obs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const HiddenPair hidden = scenario.draw_hidden(rng);
    const double t = scenario.draw_censoring(rng);
    const bool delta = hidden.x <= t;
    obs.push_back({t, delta ? hidden.y : 0.0, delta});
  }
  return Sample(std::move(obs), seed);
}

double observation_density(const Scenario& scenario, double t, double z, bool delta)
{
  if (!scenario.support.contains(t, delta ? z : scenario.support.z_lo))
    throw DomainError("point outside the scenario support");
  const double g = scenario.censoring_density(t);
  if (delta)
    return g * scenario.cdf_dz(t, z);
  return g * (1.0 - scenario.marginal_cdf_x(t));
}

void write_sample_csv(std::ostream& out, const Sample& sample)
{
  out << "t,z,delta\n";
  for (const auto& o : sample)
    out << format_double(o.t) << ',' << format_double(o.z) << ',' << (o.delta ? 1 : 0) << '\n';
}

Sample read_sample_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || line != "t,z,delta")
    throw DomainError("sample CSV must start with header 't,z,delta'");
  std::vector<Observation> obs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::stringstream row(line);
    std::string t, z, d;
    std::getline(row, t, ',');
    std::getline(row, z, ',');
    std::getline(row, d, ',');
    Observation o{};
    if (!parse_double(t, o.t) || !parse_double(z, o.z) || (d != "0" && d != "1"))
      throw DomainError("malformed sample CSV at line " + std::to_string(line_no));
    o.delta = d == "1";
    obs.push_back(o);
  }
  return Sample(std::move(obs));
}

} // namespace csmark
