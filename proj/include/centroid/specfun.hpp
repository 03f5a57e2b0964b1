#ifndef CENTROID_SPECFUN_HPP
#define CENTROID_SPECFUN_HPP

// Scalar special functions behind the centroid estimator.
//
// Bounded regime (unit cube): the cell density is the indicator of [0,1],
//   P(s)  = (1 - e^-s) / s                   Laplace transform of 1_[0,1]
//   K(t)  = log P(-t) = log((e^t - 1) / t)   cumulant function, K(0) = 0
//   σ(t)  = K'(t) = (coth(t/2) - 2/t + 1)/2  squashing function onto (0,1)
//   σ'(t) = K''(t), maximal at t = 0 where it equals 1/12.
// Unbounded regime (nonnegative orthant): K(t) = -log(-t), σ(t) = -1/t, t < 0.

#include <array>
#include <cmath>
#include <string>

#include "centroid/error.hpp"

namespace centroid {

enum class Regime { Bounded, Unbounded };

inline std::string to_string(Regime r) {
  return r == Regime::Bounded ? "bounded" : "unbounded";
}

namespace detail {

// B_2n / (2n)! for n = 1..20; σ(t) = 1/2 + Σ c_n t^(2n-1).
inline constexpr std::array<double, 20> kBernoulliOverFactorial = {
    8.33333333333333333333e-2,   -1.38888888888888888889e-3,
    3.30687830687830687831e-5,   -8.26719576719576719577e-7,
    2.08767569878680989792e-8,   -5.28419013868749318485e-10,
    1.33825365306846788328e-11,  -3.38968029632258286683e-13,
    8.58606205627784456414e-15,  -2.17486869855806187304e-16,
    5.5090028283602295152e-18,   -1.39544646858125233407e-19,
    3.53470703962946747169e-21,  -8.9535174270375468504e-23,
    2.26795245233768306031e-24,  -5.74479066887220244526e-26,
    1.45517247561486490187e-27,  -3.68599494066531017818e-29,
    9.33673425709504467203e-31,  -2.36502241570062993456e-32,
};

// Below this |t| the Bounded functions use the power series; above it the
// closed forms. The closed form of σ' cancels badly for small t.
inline constexpr double kSeriesThreshold = 1.0;
inline constexpr double kAsymptoticK = 30.0;

inline double sigma_series(double t) {
  const auto& c = kBernoulliOverFactorial;
  const double t2 = t * t;
  double acc = 0.0;
  for (std::size_t n = c.size(); n-- > 0;) acc = acc * t2 + c[n];
  return 0.5 + t * acc;
}

inline double sigma_prime_series(double t) {
  const auto& c = kBernoulliOverFactorial;
  const double t2 = t * t;
  double acc = 0.0;
  for (std::size_t n = c.size(); n-- > 0;) acc = acc * t2 + double(2 * n + 1) * c[n];
  return acc;
}

inline double cumulant_series(double t) {
  const auto& c = kBernoulliOverFactorial;
  const double t2 = t * t;
  double acc = 0.0;
  for (std::size_t n = c.size(); n-- > 0;) acc = acc * t2 + c[n] / double(2 * n + 2);
  return 0.5 * t + t2 * acc;
}

// σ(t) = 1/(1 - e^-t) - 1/t, written so neither tail overflows.
inline double sigma_closed(double t) { return -1.0 / t - 1.0 / std::expm1(-t); }

inline double sigma_prime_closed(double t) {
  const double a = std::fabs(t);
  const double d = std::expm1(-a);
  return 1.0 / (a * a) - std::exp(-a) / (d * d);
}

inline double cumulant_closed(double t) {
  if (t > kAsymptoticK) return t - std::log(t) + std::log1p(-std::exp(-t));
  if (t < -kAsymptoticK) return -std::log(-t) + std::log1p(-std::exp(t));
  return std::log(std::expm1(t) / t);
}

[[noreturn]] inline void unbounded_domain(const char* fn, double t) {
  fail(ErrorKind::Domain, std::string(fn) + ": unbounded regime requires t < 0, got " +
                              std::to_string(t));
}

}  // namespace detail

inline double sigma(double t, Regime regime = Regime::Bounded) {
  if (regime == Regime::Unbounded) {
    if (!(t < 0.0)) detail::unbounded_domain("sigma", t);
    return -1.0 / t;
  }
  if (std::fabs(t) < detail::kSeriesThreshold) return detail::sigma_series(t);
  return detail::sigma_closed(t);
}

inline double sigma_prime(double t, Regime regime = Regime::Bounded) {
  if (regime == Regime::Unbounded) {
    if (!(t < 0.0)) detail::unbounded_domain("sigma_prime", t);
    return 1.0 / (t * t);
  }
  if (std::fabs(t) < detail::kSeriesThreshold) return detail::sigma_prime_series(t);
  return detail::sigma_prime_closed(t);
}

inline double cumulant_K(double t, Regime regime = Regime::Bounded) {
  if (regime == Regime::Unbounded) {
    if (!(t < 0.0)) detail::unbounded_domain("cumulant_K", t);
    return -std::log(-t);
  }
  if (std::fabs(t) < detail::kSeriesThreshold) return detail::cumulant_series(t);
  return detail::cumulant_closed(t);
}

/// Laplace transform of 1_[0,1]: P(s) = (1 - e^-s)/s, P(0) = 1.
inline double laplace_P(double s) {
  if (s == 0.0) return 1.0;
  return -std::expm1(-s) / s;
}

/// Laplace transform of t·1_[0,1](t): P̂(s) = (1 - (1+s)e^-s)/s² = -P'(s), P̂(0) = 1/2.
inline double laplace_Phat(double s) {
  if (std::fabs(s) < 1.0) {
    // Σ_k (-s)^k / (k! (k+2))
    double term = 1.0, acc = 0.0;
    for (int k = 0; k < 30; ++k) {
      acc += term / double(k + 2);
      term *= -s / double(k + 1);
    }
    return acc;
  }
  return (-std::expm1(-s) - s * std::exp(-s)) / (s * s);
}

}  // namespace centroid

#endif  // CENTROID_SPECFUN_HPP
