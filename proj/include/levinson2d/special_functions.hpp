#pragma once

// Bessel-family kernels of real order nu >= 0 and real argument.
//
// Plain values come from Boost.Math; this header adds the pieces the solver
// needs on top of that: log-scaled I/K that survive arguments far outside the
// double exponent range, overflow-free ratios, and derivatives from the
// order-raising recurrences.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/math/special_functions/bessel.hpp>

#include "levinson2d/errors.hpp"

namespace levinson2d::special {

namespace detail {

inline void require_order(double nu, const char* who) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    fail(ErrorKind::domain_error, std::string(who) + ": order must be finite and >= 0");
  }
}

// Arguments beyond this use the Hankel large-argument series for log I / log K.
inline constexpr double kLargeArgument = 500.0;
// Arguments up to this use the ascending series for log I.
inline constexpr double kSmallArgument = 2.0;

// log of sum_k (x^2/4)^k / (k! (nu+1)_k), the bracket of the ascending series of I_nu.
inline double log_i_series_bracket(double nu, double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (k * (nu + k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return std::log(sum);
}

// Hankel large-argument series  sum_k (+-1)^k a_k(nu) / x^k  for e^{-x} sqrt(2 pi x) I_nu
// (alternating) and e^{x} sqrt(2x/pi) K_nu (all positive).
inline double hankel_sum(double nu, double x, bool alternating) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    if (term == 0.0) break;
    const double magnitude = std::abs(term);
    if (magnitude > previous) break;  // asymptotic series started diverging
    previous = magnitude;
    sum += (alternating && (k % 2 == 1)) ? -term : term;
    if (magnitude < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace detail

/// J_nu(x) for nu >= 0, x >= 0.
inline double bessel_j(double nu, double x) {
  detail::require_order(nu, "bessel_j");
  if (!(x >= 0.0)) fail(ErrorKind::domain_error, "bessel_j: argument must be >= 0");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  return boost::math::cyl_bessel_j(nu, x);
}

/// Neumann function N_nu(x) (a.k.a. Y_nu) for nu >= 0, x > 0.
inline double bessel_n(double nu, double x) {
  detail::require_order(nu, "bessel_n");
  if (!(x > 0.0)) fail(ErrorKind::domain_error, "bessel_n: argument must be > 0");
  return boost::math::cyl_neumann(nu, x);
}

/// Modified Bessel I_nu(x); throws std::overflow_error when the value is not representable.
inline double mod_bessel_i(double nu, double x) {
  detail::require_order(nu, "mod_bessel_i");
  if (!(x >= 0.0)) fail(ErrorKind::domain_error, "mod_bessel_i: argument must be >= 0");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  return boost::math::cyl_bessel_i(nu, x);
}

/// Modified Bessel K_nu(x) for x > 0.
inline double mod_bessel_k(double nu, double x) {
  detail::require_order(nu, "mod_bessel_k");
  if (!(x > 0.0)) fail(ErrorKind::domain_error, "mod_bessel_k: argument must be > 0");
  return boost::math::cyl_bessel_k(nu, x);
}

struct LogIK {
  double log_i;
  double log_k;
};

/// (log I_nu(x), log K_nu(x)), finite for every x > 0 and nu >= 0.
inline LogIK log_scaled_ik(double nu, double x) {
  detail::require_order(nu, "log_scaled_ik");
  if (!(x > 0.0)) fail(ErrorKind::domain_error, "log_scaled_ik: argument must be > 0");
  using std::numbers::pi;

  LogIK out{};
  if (x > detail::kLargeArgument) {
    out.log_i = x - 0.5 * std::log(2.0 * pi * x) + std::log(detail::hankel_sum(nu, x, true));
    out.log_k = -x + 0.5 * std::log(pi / (2.0 * x)) + std::log(detail::hankel_sum(nu, x, false));
    return out;
  }

  if (x <= detail::kSmallArgument) {
    out.log_i = nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + detail::log_i_series_bracket(nu, x);
  } else {
    out.log_i = std::log(boost::math::cyl_bessel_i(nu, x));
  }

  // Leading small-x behaviour; used only where K itself overflows.
  const double leading_log_k =
      nu > 0.0 ? std::lgamma(nu) + nu * std::log(2.0 / x) - std::log(2.0)
               : std::log(-std::log(0.5 * x) - std::numbers::egamma);
  if (leading_log_k > 600.0) {
    double correction = 0.0;
    if (nu > 2.0) correction = std::log1p(0.25 * x * x / (1.0 - nu));
    out.log_k = leading_log_k + correction;
  } else {
    out.log_k = std::log(boost::math::cyl_bessel_k(nu, x));
  }
  return out;
}

/// I_{nu+1}(x) / I_nu(x), evaluated without forming either factor when x is small.
inline double i_ratio(double nu, double x) {
  detail::require_order(nu, "i_ratio");
  if (!(x >= 0.0)) fail(ErrorKind::domain_error, "i_ratio: argument must be >= 0");
  if (x == 0.0) return 0.0;
  if (x > 100.0) {
    return std::exp(log_scaled_ik(nu + 1.0, x).log_i - log_scaled_ik(nu, x).log_i);
  }
  // Gauss continued fraction I_{nu+1}/I_nu = 1/(2(nu+1)/x + 1/(2(nu+2)/x + ...)),
  // evaluated with the modified Lentz method (leading term b0 = 0).
  constexpr double tiny = 1e-300;
  double f = tiny;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 10000; ++k) {
    const double b = 2.0 * (nu + k) / x;
    d = b + d;
    if (d == 0.0) d = tiny;
    c = b + 1.0 / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return f;
}

/// K_{nu+1}(x) / K_nu(x).
inline double k_ratio(double nu, double x) {
  detail::require_order(nu, "k_ratio");
  if (!(x > 0.0)) fail(ErrorKind::domain_error, "k_ratio: argument must be > 0");
  return std::exp(log_scaled_ik(nu + 1.0, x).log_k - log_scaled_ik(nu, x).log_k);
}

inline double bessel_j_prime(double nu, double x) {
  return (nu / x) * bessel_j(nu, x) - bessel_j(nu + 1.0, x);
}

inline double bessel_n_prime(double nu, double x) {
  return (nu / x) * bessel_n(nu, x) - bessel_n(nu + 1.0, x);
}

inline double mod_bessel_i_prime(double nu, double x) {
  return (nu / x) * mod_bessel_i(nu, x) + mod_bessel_i(nu + 1.0, x);
}

inline double mod_bessel_k_prime(double nu, double x) {
  return (nu / x) * mod_bessel_k(nu, x) - mod_bessel_k(nu + 1.0, x);
}

}  // namespace levinson2d::special
