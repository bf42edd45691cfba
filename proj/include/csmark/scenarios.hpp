#pragma once

#include "csmark/rng.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace csmark {

struct Box
{
  double t_lo = 0.0;
  double t_hi = 1.0;
  double z_lo = 0.0;
  double z_hi = 1.0;

  bool contains(double t, double z) const
  {
    return t >= t_lo && t <= t_hi && z >= z_lo && z <= z_hi;
  }
};

//! Hidden event time and mark. Only scenario samplers and test oracles
//! ever see these; a Sample never stores them.
struct HiddenPair
{
  double x;
  double y;
};

using Surface = std::function<double(double, double)>;
using Curve = std::function<double(double)>;

//! Analytic truth model for the joint law of (X, Y) and the censoring
//! density g of T, with exact samplers for both.
struct Scenario
{
  std::string id;
  Surface cdf;     // F0(x, z)
  Surface density; // f0(x, z)
  Surface cdf_dx;  // d/dx F0
  Surface cdf_dxx; // d^2/dx^2 F0
  Surface cdf_dz;  // d/dz F0
  Surface cdf_dzz; // d^2/dz^2 F0
  Curve marginal_cdf_x; // F0(x, inf)
  Curve censoring_density;
  Curve censoring_density_prime;
  Curve censoring_density_second;
  Box support;
  std::function<HiddenPair(Rng&)> draw_hidden;
  std::function<double(Rng&)> draw_censoring;
};

//! F0(x, y) = xy and g = 1 on [0, 1]^2.
Scenario scenario_A();

//! F0(x, y) = xy(x + y)/2 and g(t) = 2t on [0, 1]^2.
Scenario scenario_B();

//! Resolves "A" or "B" (case-insensitive).
Scenario scenario_by_id(const std::string& id);

//! One current-status record: inspection time, observed mark, indicator.
struct Observation
{
  double t;
  double z;
  bool delta;
};

class Sample
{
public:
  //! Throws DomainError if any record breaks the censoring structure.
  explicit Sample(std::vector<Observation> observations, std::uint64_t seed = 0);

  std::span<const Observation> observations() const noexcept { return observations_; }
  std::size_t size() const noexcept { return observations_.size(); }
  bool empty() const noexcept { return observations_.empty(); }
  std::uint64_t seed() const noexcept { return seed_; }

  const Observation& operator[](std::size_t i) const { return observations_[i]; }
  auto begin() const noexcept { return observations_.begin(); }
  auto end() const noexcept { return observations_.end(); }

  //! Largest observed mark (0 for an all-censored sample).
  double max_mark() const noexcept;

private:
  std::vector<Observation> observations_;
  std::uint64_t seed_;
};

//! n iid censored records from the scenario; identical seeds give
//! identical samples. Throws EmptySample for n == 0.
Sample sample(const Scenario& scenario, std::size_t n, std::uint64_t seed);

//! Density of the observable (T, Z, Delta) at one point.
double observation_density(const Scenario& scenario, double t, double z, bool delta);

//! CSV with header `t,z,delta`, shortest round-trip decimals.
void write_sample_csv(std::ostream& out, const Sample& sample);
Sample read_sample_csv(std::istream& in);

} // namespace csmark
