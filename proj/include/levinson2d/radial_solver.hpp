#pragma once

// Radial Dirac equations for positive j,
//   f' =  (j/r) f - (E - V + M) g,
//   g' = -(j/r) g + (E - V - M) f,
// integrated in Pruefer form f = rho sin(theta), g = rho cos(theta) with t = ln r:
//   dtheta/dt   = j sin(2 theta) - r (E - V) - r M cos(2 theta)
//   dlog_rho/dt = -j cos(2 theta) - r M sin(2 theta)
// The match ratio A = f/g = tan(theta) is carried as the angle, so poles of A are ordinary points.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "levinson2d/errors.hpp"
#include "levinson2d/potentials.hpp"
#include "levinson2d/special_functions.hpp"

namespace levinson2d {

enum class Side { plus = +1, minus = -1 };

constexpr int sign_of(Side s) { return static_cast<int>(s); }

constexpr std::string_view to_string(Side s) { return s == Side::plus ? "+M" : "-M"; }

/// Energy with E + M, E - M and the momentum kept to full relative precision near the thresholds.
struct Energy {
  double E = 0.0;
  double M = 1.0;
  double e_plus_m = 1.0;   // E + M
  double e_minus_m = -1.0; // E - M
  double k = 0.0;          // sqrt(E^2 - M^2) when |E| > M
  double kappa = 1.0;      // sqrt(M^2 - E^2) when |E| <= M

  [[nodiscard]] static Energy from_E(double E, double M) {
    check_mass(M);
    if (!std::isfinite(E)) fail(ErrorKind::domain_error, "energy must be finite");
    Energy out;
    out.E = E;
    out.M = M;
    out.e_plus_m = E + M;
    out.e_minus_m = E - M;
    const double p = std::sqrt(std::abs(out.e_plus_m * out.e_minus_m));
    if (std::abs(E) > M) {
      out.k = p;
      out.kappa = 0.0;
    } else {
      out.k = 0.0;
      out.kappa = p;
    }
    return out;
  }

  /// Scattering energy E = +-sqrt(M^2 + k^2), k > 0.
  [[nodiscard]] static Energy from_k(double k, double M, Side side) {
    check_mass(M);
    if (!(k > 0.0) || !std::isfinite(k)) fail(ErrorKind::domain_error, "k must be > 0");
    const double abs_e = std::hypot(M, k);
    Energy out;
    out.M = M;
    out.k = k;
    out.kappa = 0.0;
    if (side == Side::plus) {
      out.E = abs_e;
      out.e_plus_m = abs_e + M;
      out.e_minus_m = k * k / (abs_e + M);
    } else {
      out.E = -abs_e;
      out.e_plus_m = -k * k / (abs_e + M);
      out.e_minus_m = -(abs_e + M);
    }
    return out;
  }

  /// Bound-region energy E = +-sqrt(M^2 - kappa^2), 0 <= kappa <= M.
  [[nodiscard]] static Energy from_kappa(double kappa, double M, Side side) {
    check_mass(M);
    if (!(kappa >= 0.0) || kappa > M) fail(ErrorKind::domain_error, "kappa must lie in [0, M]");
    const double abs_e = std::sqrt((M - kappa) * (M + kappa));
    Energy out;
    out.M = M;
    out.k = 0.0;
    out.kappa = kappa;
    if (side == Side::plus) {
      out.E = abs_e;
      out.e_plus_m = abs_e + M;
      out.e_minus_m = -kappa * kappa / (abs_e + M);
    } else {
      out.E = -abs_e;
      out.e_plus_m = kappa * kappa / (abs_e + M);
      out.e_minus_m = -(abs_e + M);
    }
    return out;
  }

  [[nodiscard]] static Energy threshold(Side side, double M) { return from_kappa(0.0, M, side); }

  [[nodiscard]] bool scattering() const { return k > 0.0; }
  [[nodiscard]] bool above() const { return k > 0.0 && E > 0.0; }
  [[nodiscard]] bool below() const { return k > 0.0 && E < 0.0; }
  [[nodiscard]] bool at_threshold() const { return k == 0.0 && kappa == 0.0; }

 private:
  static void check_mass(double M) {
    if (!(M > 0.0) || !std::isfinite(M)) fail(ErrorKind::domain_error, "M must be > 0");
  }
};

struct RadialState {
  double r = 0.0;
  double theta = 0.0;
  double log_rho = 0.0;

  [[nodiscard]] double f() const { return std::exp(log_rho) * std::sin(theta); }
  [[nodiscard]] double g() const { return std::exp(log_rho) * std::cos(theta); }
};

/// A = f/g in projective form. `theta` is the representative in [0, pi); value is +-inf at the pole.
struct MatchRatio {
  double value = 0.0;
  double theta = 0.0;

  [[nodiscard]] static MatchRatio from_angle(double angle) {
    double t = std::fmod(angle, std::numbers::pi);
    if (t < 0.0) t += std::numbers::pi;
    if (t >= std::numbers::pi) t -= std::numbers::pi;
    MatchRatio out;
    out.theta = t;
    out.value = (t == std::numbers::pi / 2) ? -std::numeric_limits<double>::infinity() : std::tan(t);
    return out;
  }

  /// From components (f, g); g == 0 gives the pole with the sign of f.
  [[nodiscard]] static MatchRatio from_components(double f, double g) {
    MatchRatio out = from_angle(std::atan2(f, g));
    if (g == 0.0) {
      out.theta = std::numbers::pi / 2;
      out.value = std::copysign(std::numeric_limits<double>::infinity(), f);
    } else {
      out.value = f / g;
    }
    return out;
  }

  [[nodiscard]] bool is_pole() const { return std::isinf(value); }

  /// Angle in (-pi/2, pi/2], the branch used for exterior ratios.
  [[nodiscard]] double centered_angle() const {
    return theta > std::numbers::pi / 2 ? theta - std::numbers::pi : theta;
  }
};

struct SolverOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  double start_fraction = 1e-6;  // r_start / r0
  long max_steps = 20'000'000;
};

namespace detail {

using OdeState = std::array<double, 2>;

inline double start_radius(const ProblemSpec& spec, const SolverOptions& opts) {
  return opts.start_fraction * spec.potential.r0();
}

/// Radii where the right-hand side is discontinuous, restricted to (a, b).
inline std::vector<double> cuts_between(const PotentialModel& V, double a, double b) {
  std::vector<double> out;
  for (double c : V.breakpoints()) {
    if (c > a && c < b) out.push_back(c);
  }
  if (V.r0() > a && V.r0() < b) out.push_back(V.r0());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline void require_positive_j(const ProblemSpec& spec, const char* who) {
  if (!spec.j.positive()) {
    fail(ErrorKind::invalid_argument, std::string(who) + ": j must be positive; map negative j through the symmetry first");
  }
}

}  // namespace detail

/// Regular solution near the origin: f ~ r^j, g ~ c r^(j+1) with c = (E - Vbar - M)/(2j+1).
inline RadialState series_start(const ProblemSpec& spec, const Energy& E, double r_start) {
  detail::require_positive_j(spec, "series_start");
  const double r0 = spec.potential.r0();
  if (!(r_start > 0.0) || r_start > 1e-4 * r0) {
    fail(ErrorKind::invalid_argument, "series_start: r_start must lie in (0, 1e-4 r0]");
  }
  const double j = spec.j.value();
  const double v_edge = spec.lambda * spec.potential(r_start);
  if (!std::isfinite(v_edge) || r_start * std::abs(v_edge) >= j) {
    std::ostringstream os;
    os << "r |V| = " << r_start * std::abs(v_edge) << " at r = " << r_start
       << " reaches j; the regular solution is not of power type";
    fail(ErrorKind::unsupported_origin, os.str());
  }
  const double v_bar = spec.lambda == 0.0 ? 0.0 : spec.lambda * spec.potential.origin_average(r_start);
  const double c = (E.e_minus_m - v_bar) / (2.0 * j + 1.0);
  RadialState s;
  s.r = r_start;
  s.theta = std::atan2(1.0, c * r_start);
  s.log_rho = j * std::log(r_start) + 0.5 * std::log1p((c * r_start) * (c * r_start));
  return s;
}

/// Integrates the Pruefer system from `from` to each radius in `radii` (ascending), returning the states there.
inline std::vector<RadialState> trajectory(const ProblemSpec& spec, const Energy& E, RadialState from,
                                           const std::vector<double>& radii, const SolverOptions& opts = {}) {
  namespace odeint = boost::numeric::odeint;
  detail::require_positive_j(spec, "trajectory");
  const double j = spec.j.value();
  const double M = spec.M;
  const double lambda = spec.lambda;
  const PotentialModel& V = spec.potential;

  const auto rhs = [&](const detail::OdeState& y, detail::OdeState& dy, double t) {
    const double r = std::exp(t);
    const double v = lambda == 0.0 ? 0.0 : lambda * V(r);
    const double s2 = std::sin(2.0 * y[0]);
    const double c2 = std::cos(2.0 * y[0]);
    dy[0] = j * s2 - r * (E.E - v) - r * M * c2;
    dy[1] = -j * c2 - r * M * s2;
  };

  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<detail::OdeState>());
  // log_rho is integrated relative to its start value so the step control never sees the
  // arbitrary normalization.
  detail::OdeState y{from.theta, 0.0};
  double r = from.r;
  long steps = 0;
  std::vector<RadialState> out;
  out.reserve(radii.size());

  for (double target : radii) {
    if (target < r) fail(ErrorKind::invalid_argument, "trajectory radii must be ascending and beyond the start");
    std::vector<double> stops = detail::cuts_between(V, r, target);
    stops.push_back(target);
    for (double stop : stops) {
      if (stop <= r) continue;
      const double t0 = std::log(r);
      const double t1 = std::log(stop);
      double last_t = t0;
      try {
        odeint::integrate_adaptive(stepper, rhs, y, t0, t1, std::min(0.05, 0.1 * (t1 - t0)),
                                   [&](const detail::OdeState& state, double t) {
                                     last_t = t;
                                     if (++steps > opts.max_steps || !std::isfinite(state[0])) {
                                       throw std::runtime_error("step budget exhausted or non-finite state");
                                     }
                                   });
      } catch (const SolverError&) {
        throw;
      } catch (const std::exception& ex) {
        std::ostringstream os;
        os << "integrator stalled near r = " << std::exp(last_t) << " (" << ex.what() << ")";
        fail(ErrorKind::integration_failure, os.str());
      }
      r = stop;
    }
    out.push_back(RadialState{target, y[0], from.log_rho + y[1]});
  }
  return out;
}

/// Unwrapped interior angle theta at r_end, integrated from the regular origin behaviour.
inline double interior_angle(const ProblemSpec& spec, const Energy& E, double r_end, const SolverOptions& opts = {}) {
  const RadialState start = series_start(spec, E, detail::start_radius(spec, opts));
  return trajectory(spec, E, start, {r_end}, opts).front().theta;
}

/// A_j(E, lambda) at r0-.
inline MatchRatio integrate_interior(const ProblemSpec& spec, const Energy& E, const SolverOptions& opts = {}) {
  return MatchRatio::from_angle(interior_angle(spec, E, spec.potential.r0(), opts));
}

namespace detail {

/// I_{nu+1}(x) / (x I_nu(x)), finite at x = 0.
inline double i_ratio_over_x(double nu, double x) {
  if (x < 1e-8) return 1.0 / (2.0 * (nu + 1.0)) * (1.0 - x * x / (4.0 * (nu + 1.0) * (nu + 2.0)));
  return special::i_ratio(nu, x) / x;
}

/// x K_{mu+1}(x) / K_mu(x) with its x -> 0 limit.
inline double x_k_ratio(double mu, double x) {
  if (x == 0.0) return mu > 0.0 ? 2.0 * mu : 0.0;
  return x * special::k_ratio(mu, x);
}

}  // namespace detail

/// Free interior ratio at r0- for |E| <= M:  -sqrt((M+E)/(M-E)) I_{j-1/2}(kappa r0) / I_{j+1/2}(kappa r0).
inline MatchRatio free_interior_ratio(HalfInteger j, const Energy& E, double r0, double M) {
  if (!j.positive()) fail(ErrorKind::invalid_argument, "free_interior_ratio: j must be positive");
  if (E.scattering()) fail(ErrorKind::domain_error, "free_interior_ratio: |E| must be <= M");
  (void)M;
  const double nu = j.value() - 0.5;
  // A = -1 / ((M - E) r0 q),  q = I_{nu+1}/(x I_nu); the pole at E = M is g = 0.
  const double q = detail::i_ratio_over_x(nu, E.kappa * r0);
  return MatchRatio::from_components(-1.0, -E.e_minus_m * r0 * q);
}

/// Free interior ratio continued to |E| > M: B(E) J_{j-1/2}(kr0) / J_{j+1/2}(kr0).
inline MatchRatio free_scattering_ratio(HalfInteger j, const Energy& E, double r0) {
  if (!E.scattering()) fail(ErrorKind::domain_error, "free_scattering_ratio: |E| must exceed M");
  const double nu = j.value() - 0.5;
  const double x = E.k * r0;
  const double b = E.above() ? E.e_plus_m / E.k : E.k / E.e_minus_m;
  return MatchRatio::from_components(b * special::bessel_j(nu, x), special::bessel_j(nu + 1.0, x));
}

/// Exterior ratio at radius R for |E| <= M when the potential beyond R is b/r^2 (b = 0: cutoff).
/// Uses the f-equation reduction for E >= 0 and the g-equation reduction for E < 0; both are
/// exact when b = 0.
inline MatchRatio exterior_power_ratio(HalfInteger j, const Energy& E, double R, double M, double b) {
  if (!j.positive()) fail(ErrorKind::invalid_argument, "exterior ratio: j must be positive");
  if (E.scattering()) fail(ErrorKind::domain_error, "exterior ratio: |E| must be <= M");
  (void)M;
  const double jj = j.value();
  const double x = E.kappa * R;
  if (E.E >= 0.0) {
    const double mu_sq = (jj - 0.5) * (jj - 0.5) + 2.0 * E.E * b;
    if (!(mu_sq >= 0.0)) fail(ErrorKind::infinite_spectrum, "exterior exponent squared is negative");
    const double mu = std::sqrt(mu_sq);
    const double den = (jj - 0.5 - mu) + detail::x_k_ratio(mu, x);
    const double num = E.e_plus_m * R;
    return MatchRatio::from_components(num, den);
  }
  const double mu_sq = (jj + 0.5) * (jj + 0.5) + 2.0 * E.E * b;
  if (!(mu_sq >= 0.0)) fail(ErrorKind::infinite_spectrum, "exterior exponent squared is negative");
  const double mu = std::sqrt(mu_sq);
  double num = 0.0;
  if (b == 0.0 && x > 0.0) {
    // (2j+1) - x K_{j+3/2}/K_{j+1/2} = -x K_{j-1/2}/K_{j+1/2}; the right side avoids cancellation.
    num = -x / special::k_ratio(jj - 0.5, x);
  } else {
    num = (jj + 0.5 + mu) - detail::x_k_ratio(mu, x);
  }
  return MatchRatio::from_components(num, E.e_minus_m * R);
}

/// Exterior ratio at r0+ for |E| <= M and no tail: sqrt((M+E)/(M-E)) K_{j-1/2}(kappa r0) / K_{j+1/2}(kappa r0).
inline MatchRatio exterior_bound_ratio(HalfInteger j, const Energy& E, double r0, double M) {
  if (!j.positive()) fail(ErrorKind::invalid_argument, "exterior_bound_ratio: j must be positive");
  if (E.scattering()) fail(ErrorKind::domain_error, "exterior_bound_ratio: |E| must be <= M");
  (void)M;
  const double nu = j.value() - 0.5;
  const double x = E.kappa * r0;
  if (E.E < 0.0) {
    // (M+E)/kappa = kappa/(M-E): keeps the E = -M limit (ratio -> 0) regular.
    const double num = x == 0.0 ? 0.0 : x / special::k_ratio(nu, x);
    return MatchRatio::from_components(num, -E.e_minus_m * r0);
  }
  return MatchRatio::from_components(E.e_plus_m * r0, detail::x_k_ratio(nu, x));
}

/// Threshold exterior ratios for a pure b/r^2 tail beyond r0:
/// 2 M r0 / (j + alpha - 1/2) at +M and -(j - beta + 1/2) / (2 M r0) at -M.
inline MatchRatio exterior_tail_ratio(HalfInteger j, Side side, double r0, double M, double b) {
  if (!j.positive()) fail(ErrorKind::invalid_argument, "exterior_tail_ratio: j must be positive");
  const double jj = j.value();
  if (side == Side::plus) {
    const double a2 = jj * jj - jj + 2.0 * M * b + 0.25;
    if (!(a2 > 0.0)) fail(ErrorKind::unsupported_regime, "alpha^2 <= 0: infinitely many bound states");
    const double alpha = std::sqrt(a2);
    return MatchRatio::from_components(2.0 * M * r0, jj + alpha - 0.5);
  }
  const double b2 = jj * jj + jj - 2.0 * M * b + 0.25;
  if (!(b2 > 0.0)) fail(ErrorKind::unsupported_regime, "beta^2 <= 0: infinitely many bound states");
  const double beta = std::sqrt(b2);
  return MatchRatio::from_components(-(jj - beta + 0.5), 2.0 * M * r0);
}

/// Where interior and exterior solutions are matched for this potential.
///  - no tail: r0
///  - n = 2 tail: far enough out that |b|/r^2 << M, so the b/r^2 Bessel forms are exact to ~1e-8
///  - n > 2 tail: the effective cutoff beyond which the tail is dropped
inline double match_radius(const PotentialModel& V, double M) {
  if (!V.has_tail()) return V.r0();
  const PowerTail& t = *V.tail();
  if (t.n < 2.0) fail(ErrorKind::unsupported_regime, "tails decaying slower than r^-2 are not supported");
  if (t.n == 2.0) return std::max(V.r0(), 1e4 * std::sqrt(std::abs(t.b) / M));
  return V.effective_cutoff();
}

/// Coefficient of 1/r^2 in lambda V beyond the match radius (zero unless the tail is n = 2).
inline double exterior_inverse_square(const ProblemSpec& spec) {
  const PotentialModel& V = spec.potential;
  if (!V.has_tail() || V.tail()->n != 2.0) return 0.0;
  return spec.lambda * V.tail()->b;
}

/// Exterior angle in (-pi/2, pi/2] at the match radius, for |E| <= M.
inline double exterior_angle(const ProblemSpec& spec, const Energy& E) {
  const double R = match_radius(spec.potential, spec.M);
  return exterior_power_ratio(spec.j, E, R, spec.M, exterior_inverse_square(spec)).centered_angle();
}

/// Angle of the decaying exterior solution at r <= match radius, integrated inward from the match
/// radius. Inward integration keeps the bound-state matching well conditioned when the match radius
/// is many decay lengths out. The result is continuous in E and lambda.
inline double exterior_angle_at(const ProblemSpec& spec, const Energy& E, double r, const SolverOptions& opts = {}) {
  namespace odeint = boost::numeric::odeint;
  const double R = match_radius(spec.potential, spec.M);
  double theta = exterior_angle(spec, E);
  if (r >= R) return theta;
  detail::require_positive_j(spec, "exterior_angle_at");
  const double j = spec.j.value();
  const double M = spec.M;
  const double lambda = spec.lambda;
  const PotentialModel& V = spec.potential;
  const auto rhs = [&](const std::array<double, 1>& y, std::array<double, 1>& dy, double t) {
    const double rr = std::exp(t);
    const double v = lambda == 0.0 ? 0.0 : lambda * V(rr);
    dy[0] = j * std::sin(2.0 * y[0]) - rr * (E.E - v) - rr * M * std::cos(2.0 * y[0]);
  };
  auto stepper =
      odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<std::array<double, 1>>());
  std::vector<double> stops = detail::cuts_between(V, r, R);
  std::reverse(stops.begin(), stops.end());
  stops.push_back(r);
  std::array<double, 1> y{theta};
  double from = R;
  long steps = 0;
  for (double stop : stops) {
    if (stop >= from) continue;
    const double t0 = std::log(from), t1 = std::log(stop);
    odeint::integrate_adaptive(stepper, rhs, y, t0, t1, -std::min(0.05, 0.1 * (t0 - t1)),
                               [&](const std::array<double, 1>& state, double) {
                                 if (++steps > opts.max_steps || !std::isfinite(state[0]))
                                   fail(ErrorKind::integration_failure, "inward exterior integration failed");
                               });
    from = stop;
  }
  return y[0];
}

}  // namespace levinson2d
