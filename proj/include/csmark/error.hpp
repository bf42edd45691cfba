#pragma once

#include <stdexcept>
#include <string>

namespace csmark {

// Base for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class InvalidBandwidth : public Error
{
public:
  using Error::Error;
};

class EmptySample : public Error
{
public:
  using Error::Error;
};

class DomainError : public Error
{
public:
  using Error::Error;
};

class DerivativeUnavailable : public Error
{
public:
  using Error::Error;
};

class KernelConditionViolation : public Error
{
public:
  using Error::Error;
};

class DivergenceError : public Error
{
public:
  using Error::Error;
};

class QuadratureFailure : public Error
{
public:
  using Error::Error;
};

class DegeneratePilot : public Error
{
public:
  using Error::Error;
};

class SelectionFailure : public Error
{
public:
  using Error::Error;
};

//! Raised when the denominator of a plug-in ratio is too small to trust.
class UnstableDenominator : public Error
{
public:
  UnstableDenominator(const std::string& what, double denominator)
    : Error(what), denominator_(denominator)
  {}

  double denominator() const noexcept { return denominator_; }

private:
  double denominator_;
};

} // namespace csmark
