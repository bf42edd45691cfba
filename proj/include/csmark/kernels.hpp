#pragma once

#include <functional>
#include <string>
#include <vector>

namespace csmark {

enum class KernelFamily
{
  uniform,
  epanechnikov,
  custom
};

//! Univariate kernel density supported on [-1, 1].
//!
//! Built-in families carry closed-form antiderivatives, derivatives and
//! moment constants. Custom kernels supply their own density and
//! antiderivative; their moments are computed once by quadrature. Objects
//! are immutable after construction.
class UnivariateKernel
{
public:
  static UnivariateKernel uniform();
  static UnivariateKernel epanechnikov();
  static UnivariateKernel custom(std::string name,
                                 std::function<double(double)> density,
                                 std::function<double(double)> antiderivative,
                                 std::function<double(double)> derivative = {});

  //! Look up a built-in kernel by name ("uniform", "epanechnikov").
  static UnivariateKernel by_name(const std::string& name);

  KernelFamily family() const noexcept { return family_; }
  const std::string& name() const noexcept { return name_; }

  double operator()(double u) const;

  //! Integral of the density over (-inf, u]; 0 below -1 and 1 above 1.
  double antiderivative(double u) const;

  bool has_derivative() const noexcept;

  //! k'(u). Throws DerivativeUnavailable for kernels without one.
  double derivative(double u) const;

  double second_moment() const noexcept { return second_moment_; }
  double l2_norm_sq() const noexcept { return l2_norm_sq_; }

private:
  UnivariateKernel() = default;

  KernelFamily family_ = KernelFamily::uniform;
  std::string name_;
  std::function<double(double)> density_;
  std::function<double(double)> antiderivative_;
  std::function<double(double)> derivative_;
  double second_moment_ = 0.0;
  double l2_norm_sq_ = 0.0;
};

//! alpha^{-1} k(u / alpha). Throws InvalidBandwidth for alpha <= 0.
double eval_rescaled(const UnivariateKernel& k, double alpha, double u);

double second_moment(const UnivariateKernel& k);
double l2_norm_sq(const UnivariateKernel& k);

//! Product kernel k1(x) k2(y) on [-1, 1]^2.
class BivariateKernel
{
public:
  BivariateKernel(UnivariateKernel first, UnivariateKernel second)
    : first_(std::move(first)), second_(std::move(second))
  {}

  //! Product of one kernel with itself.
  static BivariateKernel square(const UnivariateKernel& k) { return {k, k}; }

  const UnivariateKernel& first() const noexcept { return first_; }
  const UnivariateKernel& second() const noexcept { return second_; }

  double operator()(double x, double y) const { return first_(x) * second_(y); }

  //! Second moment in coordinate 0 (x) or 1 (y).
  double second_moment(int coordinate) const;

private:
  UnivariateKernel first_;
  UnivariateKernel second_;
};

enum class KernelCondition
{
  marginalization,      // integrating out the mark coordinate recovers k
  symmetry,             // k(u) = k(-u)
  support,              // zero outside [-1, 1]
  normalization,        // integrates to one
  zero_first_moments,   // both coordinates centred
  equal_second_moments, // same second moment in both coordinates
};

const char* to_string(KernelCondition c);

struct ConditionCheck
{
  KernelCondition condition;
  bool passed;
  double residual;
};

struct ValidationReport
{
  std::vector<ConditionCheck> checks;

  bool all_passed() const;
  bool passed(KernelCondition c) const;
  double residual(KernelCondition c) const;
};

//! Checks a univariate kernel for normalization, symmetry and support.
ValidationReport validate_kernel(const UnivariateKernel& k, double tolerance = 1e-10);

//! Checks a product kernel against every condition the estimators rely on,
//! including marginalization against `marginal` (defaults to the first factor).
ValidationReport validate_conditions(const BivariateKernel& kt, double tolerance = 1e-10);
ValidationReport validate_conditions(const BivariateKernel& kt,
                                     const UnivariateKernel& marginal,
                                     double tolerance = 1e-10);

//! Max |k1(u) - k2(u)| over a fine grid on [-1.5, 1.5].
double kernel_distance(const UnivariateKernel& k1, const UnivariateKernel& k2);

} // namespace csmark
