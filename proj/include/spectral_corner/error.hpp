#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace spectral {

/// Base class of every failure raised by the library. The stage names the
/// pipeline step ("special.bessel_zero", "zeta.prime_at_zero", ...) so callers
/// can attribute a failure without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Ill-formed input or a violated precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not reach its tolerance. Carries the best
/// estimate it had and the accuracy it actually achieved.
class NumericalError : public Error {
 public:
  NumericalError(std::string stage, const std::string& what,
                 double best_estimate = std::numeric_limits<double>::quiet_NaN(),
                 double achieved = std::numeric_limits<double>::quiet_NaN())
      : Error(std::move(stage), what), best_(best_estimate), achieved_(achieved) {}

  double best_estimate() const noexcept { return best_; }
  double achieved() const noexcept { return achieved_; }

 private:
  double best_;
  double achieved_;
};

}  // namespace spectral
