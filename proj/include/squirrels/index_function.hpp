#pragma once

#include <functional>
#include <limits>
#include <string>

#include "squirrels/states.hpp"

namespace squirrels {

/// Concave increasing index function tau -> psi(tau) with an optional
/// closed-form derivative.
class IndexFunction {
 public:
  using Fn = std::function<double(double)>;

  IndexFunction(Fn value, Fn derivative, double tau_max, std::string name);

  /// C tau^{1/(1+2 k0)}.
  static IndexFunction holder(double c, int k0);
  /// C ((-log tau) / log(-log tau))^{-4 mu} on tau < exp(-e).
  static IndexFunction polynomial(double c, double mu);
  /// C exp(-sqrt(2 (-log b)(-log tau))) on tau < 1.
  static IndexFunction exponential(double c, double b);
  /// Theoretical form for a prior class with constant c.
  static IndexFunction for_prior(const PriorClass& prior, double c);

  /// Throws DomainError outside (0, tau_max).
  double operator()(double tau) const;
  /// Closed form when available, else central difference with relative step 1e-6.
  double derivative(double tau) const;
  double finite_difference_derivative(double tau) const;
  bool has_closed_form_derivative() const { return static_cast<bool>(derivative_); }

  double tau_max() const noexcept { return tau_max_; }
  const std::string& name() const noexcept { return name_; }

 private:
  void check_domain(double tau) const;

  Fn value_;
  Fn derivative_;
  double tau_max_;
  std::string name_;
};

}  // namespace squirrels
