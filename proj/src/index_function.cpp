#include "squirrels/index_function.hpp"

#include <cmath>

#include "squirrels/errors.hpp"

namespace squirrels {

IndexFunction::IndexFunction(Fn value, Fn derivative, double tau_max, std::string name)
    : value_(std::move(value)),
      derivative_(std::move(derivative)),
      tau_max_(tau_max),
      name_(std::move(name)) {
  if (!value_) throw InvalidInput("index function needs a value callback");
}

IndexFunction IndexFunction::holder(double c, int k0) {
  if (!(c > 0.0) || k0 < 0) throw InvalidInput("holder index function needs C > 0, k0 >= 0");
  const double p = 1.0 / (1.0 + 2.0 * k0);
  return IndexFunction([c, p](double t) { return c * std::pow(t, p); },
                       [c, p](double t) { return c * p * std::pow(t, p - 1.0); },
                       std::numeric_limits<double>::infinity(), "holder");
}

IndexFunction IndexFunction::polynomial(double c, double mu) {
  if (!(c > 0.0) || !(mu > 0.0)) throw InvalidInput("polynomial index function needs C, mu > 0");
  return IndexFunction(
      [c, mu](double t) {
        const double s = -std::log(t);
        return c * std::pow(s / std::log(s), -4.0 * mu);
      },
      {}, std::exp(-std::exp(1.0)), "polynomial");
}

IndexFunction IndexFunction::exponential(double c, double b) {
  if (!(c > 0.0) || !(b > 0.0 && b < 1.0)) {
    throw InvalidInput("exponential index function needs C > 0 and b in (0, 1)");
  }
  const double lb = -std::log(b);
  return IndexFunction(
      [c, lb](double t) { return c * std::exp(-std::sqrt(2.0 * lb * -std::log(t))); }, {}, 1.0,
      "exponential");
}

IndexFunction IndexFunction::for_prior(const PriorClass& prior, double c) {
  switch (prior.kind) {
    case PriorKind::band_limited:
      return holder(c, prior.k0);
    case PriorKind::polynomial:
      return polynomial(c, prior.mu);
    case PriorKind::exponential:
      return exponential(c, prior.b);
  }
  throw InvalidInput("unknown prior kind");
}

void IndexFunction::check_domain(double tau) const {
  if (!(tau > 0.0 && tau < tau_max_)) {
    throw DomainError(name_ + " index function evaluated outside (0, " +
                      std::to_string(tau_max_) + "): tau = " + std::to_string(tau));
  }
}

double IndexFunction::operator()(double tau) const {
  check_domain(tau);
  return value_(tau);
}

double IndexFunction::finite_difference_derivative(double tau) const {
  check_domain(tau);
  const double h = 1e-6 * tau;
  return ((*this)(tau + h) - (*this)(tau - h)) / (2.0 * h);
}

double IndexFunction::derivative(double tau) const {
  if (derivative_) {
    check_domain(tau);
    return derivative_(tau);
  }
  return finite_difference_derivative(tau);
}

}  // namespace squirrels
