#pragma once

// Phase shifts for |E| > M. The exterior solution at the match radius R is expanded in a
// regular/irregular Bessel pair of order mu:
//   E >  M:  f = Z_mu(kr),                          g = k (-Z'_mu + (j-1/2) Z_mu / kr) / (E+M)
//   E < -M:  g = Z_mu(kr),                          f = k ( Z'_mu + (j+1/2) Z_mu / kr) / (E-M)
// with mu^2 = (j-+1/2)^2 + 2 E b for an inverse-square remainder b/r^2 (the product
// (E+M-V)(E-M-V) = k^2 - 2EV + V^2 carries 2E, which equals E+M and E-M only at the thresholds)
// (b = 0 without a tail, which reproduces J_{j-1/2}, J_{j+1/2} exactly). The common sqrt(r) is dropped.
// The interior angle theta is matched to  cos(delta) (F_J, G_J) - sin(delta) (F_N, G_N),
// so tan(delta) = num/den with
//   num = G_J sin(theta) - F_J cos(theta),   den = G_N sin(theta) - F_N cos(theta).
// eta differs from delta by (j - mu - 1/2) pi/2 above and (j - mu + 1/2) pi/2 below.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "levinson2d/errors.hpp"
#include "levinson2d/potentials.hpp"
#include "levinson2d/radial_solver.hpp"
#include "levinson2d/special_functions.hpp"

namespace levinson2d {

inline constexpr double kPi = std::numbers::pi;

/// Maps an angle into (-pi/2, pi/2].
inline double wrap_half(double a) {
  double w = std::remainder(a, kPi);
  if (w <= -kPi / 2) w += kPi;
  return w;
}

/// B(E) = sqrt((E+M)/(E-M)) above, -sqrt((|E|-M)/(|E|+M)) below.
inline double b_factor(const Energy& E) {
  if (!E.scattering()) fail(ErrorKind::domain_error, "b_factor: |E| must exceed M");
  return E.above() ? E.e_plus_m / E.k : E.k / E.e_minus_m;
}

inline double b_factor(double E, double M) { return b_factor(Energy::from_E(E, M)); }

/// tan(eta) from A at r0 without a tail, first line of the matching formula
///   (J1/N1) (A - B J0/J1) / (A - B N0/N1)
inline double tan_phase_shift_direct(HalfInteger j, const Energy& E, double A, double r0) {
  const double nu = j.value() - 0.5;
  const double x = E.k * r0;
  const double B = b_factor(E);
  const double J0 = special::bessel_j(nu, x), J1 = special::bessel_j(nu + 1.0, x);
  const double N0 = special::bessel_n(nu, x), N1 = special::bessel_n(nu + 1.0, x);
  return (J1 / N1) * (A - B * J0 / J1) / (A - B * N0 / N1);
}

/// Second line, in terms of 1/A:  (J0/N0) (1/A - J1/(B J0)) / (1/A - N1/(B N0)).
inline double tan_phase_shift_inverse(HalfInteger j, const Energy& E, double inv_A, double r0) {
  const double nu = j.value() - 0.5;
  const double x = E.k * r0;
  const double B = b_factor(E);
  const double J0 = special::bessel_j(nu, x), J1 = special::bessel_j(nu + 1.0, x);
  const double N0 = special::bessel_n(nu, x), N1 = special::bessel_n(nu + 1.0, x);
  return (J0 / N0) * (inv_A - J1 / (B * J0)) / (inv_A - N1 / (B * N0));
}

inline double tan_phase_shift(HalfInteger j, const Energy& E, const MatchRatio& A, double r0, double M) {
  (void)M;
  if (!j.positive()) fail(ErrorKind::invalid_argument, "tan_phase_shift: j must be positive");
  if (!E.scattering()) fail(ErrorKind::domain_error, "tan_phase_shift: |E| must exceed M");
  if (A.is_pole()) return tan_phase_shift_inverse(j, E, 0.0, r0);
  return tan_phase_shift_direct(j, E, A.value, r0);
}

/// Regular (J) and irregular (N) exterior solutions at radius R, see the header comment.
struct ExteriorBasis {
  double mu = 0.0;
  double offset = 0.0;  // eta - delta
  double fJ = 0.0, gJ = 0.0, fN = 0.0, gN = 0.0;

  [[nodiscard]] double wronskian() const { return fJ * gN - gJ * fN; }
  [[nodiscard]] double num(double theta) const { return gJ * std::sin(theta) - fJ * std::cos(theta); }
  [[nodiscard]] double den(double theta) const { return gN * std::sin(theta) - fN * std::cos(theta); }
  [[nodiscard]] double regular_angle() const { return std::atan2(fJ, gJ); }
  [[nodiscard]] double irregular_angle() const { return std::atan2(fN, gN); }
};

/// Order of the exterior Bessel functions for inverse-square coefficient b.
inline double exterior_order(HalfInteger j, const Energy& E, double b) {
  const double jj = j.value();
  const double mu_sq = E.E > 0.0 ? (jj - 0.5) * (jj - 0.5) + 2.0 * E.E * b : (jj + 0.5) * (jj + 0.5) + 2.0 * E.E * b;
  if (!(mu_sq > 0.0) && !(mu_sq == 0.0 && b == 0.0)) {
    fail(ErrorKind::unsupported_regime, "exterior Bessel order is not real and positive (inverse-square tail too strong)");
  }
  return std::sqrt(mu_sq);
}

/// Basis with a given Bessel order mu (mu = j -+ 1/2 is the cutoff case).
inline ExteriorBasis scattering_basis_of_order(HalfInteger j, const Energy& E, double R, double mu) {
  if (!j.positive()) fail(ErrorKind::invalid_argument, "scattering_basis: j must be positive");
  if (!E.scattering()) fail(ErrorKind::domain_error, "scattering_basis: |E| must exceed M");
  const double jj = j.value();
  const double x = E.k * R;
  ExteriorBasis out;
  out.mu = mu;
  const double J = special::bessel_j(mu, x), N = special::bessel_n(mu, x);
  if (E.above()) {
    // -Z' + (j-1/2) Z/x = Z_{mu+1} + (j-1/2-mu) Z/x
    const double c = (jj - 0.5 - mu) / x;
    const double s = E.k / E.e_plus_m;
    out.fJ = J;
    out.fN = N;
    out.gJ = s * (special::bessel_j(mu + 1.0, x) + c * J);
    out.gN = s * (special::bessel_n(mu + 1.0, x) + c * N);
    out.offset = mu == jj - 0.5 ? 0.0 : (jj - mu - 0.5) * kPi / 2;
  } else {
    // Z' + (j+1/2) Z/x = Z_{mu-1} + (j+1/2-mu) Z/x, or (mu+j+1/2) Z/x - Z_{mu+1} for mu < 1
    const double s = E.k / E.e_minus_m;
    double dJ = 0.0, dN = 0.0;
    if (mu >= 1.0) {
      const double c = (jj + 0.5 - mu) / x;
      dJ = special::bessel_j(mu - 1.0, x) + c * J;
      dN = special::bessel_n(mu - 1.0, x) + c * N;
    } else {
      const double c = (jj + 0.5 + mu) / x;
      dJ = c * J - special::bessel_j(mu + 1.0, x);
      dN = c * N - special::bessel_n(mu + 1.0, x);
    }
    out.gJ = J;
    out.gN = N;
    out.fJ = s * dJ;
    out.fN = s * dN;
    out.offset = mu == jj + 0.5 ? 0.0 : (jj - mu + 0.5) * kPi / 2;
  }
  return out;
}

inline ExteriorBasis scattering_basis(HalfInteger j, const Energy& E, double R, double b) {
  return scattering_basis_of_order(j, E, R, exterior_order(j, E, b));
}

/// Radius at which scattering solutions are matched. n = 2 tails are matched where |b|/r^2 is
/// negligible, but no further out than 1e5 wavelengths.
inline double scattering_radius(const ProblemSpec& spec, const Energy& E) {
  const double R = match_radius(spec.potential, spec.M);
  if (!spec.potential.has_tail() || spec.potential.tail()->n != 2.0) return R;
  return std::min(R, std::max(spec.potential.r0(), 1e5 / E.k));
}

struct PhaseShift {
  double eta = 0.0;
  double delta = 0.0;
  double tan_eta = 0.0;
  double mu = 0.0;
  double offset = 0.0;
  double theta = 0.0;      // interior angle at the match radius
  double theta_ref = 0.0;  // angle of the pure regular exterior solution, continued from the free interior
  double radius = 0.0;
};

namespace detail {

/// delta(theta): continuous, delta(theta_ref) = 0, advancing by s pi per pi of theta.
inline double lift_delta(const ExteriorBasis& basis, double theta, double theta_ref) {
  const double s = basis.wronskian() >= 0.0 ? 1.0 : -1.0;
  const double q = std::floor((theta - theta_ref) / kPi);
  const double reduced = theta - q * kPi;
  const double phi = std::atan2(basis.num(reduced), basis.den(reduced));
  const double phi_ref = std::atan2(basis.num(theta_ref), basis.den(theta_ref));
  double t = std::fmod(s * (phi - phi_ref), 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  if (t > 1.5 * kPi) t -= 2.0 * kPi;
  return s * (q * kPi + t);
}

/// Number of zeros of J_mu in (0, x).
inline long bessel_zero_count(double mu, double x) {
  long n = std::max(0L, static_cast<long>(std::floor((x - mu * kPi / 2 + kPi / 4) / kPi)));
  while (n > 0 && boost::math::cyl_bessel_j_zero(mu, static_cast<int>(n)) >= x) --n;
  while (boost::math::cyl_bessel_j_zero(mu, static_cast<int>(n + 1)) < x) ++n;
  return n;
}

/// Unwrapped angle at R of the solution that is the pure regular exterior form everywhere.
/// Started near pi/2 at the origin, it crosses f = 0 downwards (E > M) or g = 0 upwards (E < -M)
/// once per zero of J_mu in (0, kR), so the branch follows from the zero count.
inline double regular_exterior_angle(HalfInteger j, const Energy& E, double R, double b) {
  const ExteriorBasis basis = scattering_basis(j, E, R, b);
  const long n = bessel_zero_count(basis.mu, E.k * R);
  const double a = basis.regular_angle();
  // theta in (lo, lo + pi]: lo = -n pi above, pi/2 + n pi below.
  const double lo = E.above() ? -static_cast<double>(n) * kPi : kPi / 2 + static_cast<double>(n) * kPi;
  const double gap = lo + kPi - a;
  return lo + kPi - (gap - kPi * std::floor(gap / kPi));
}

/// Regular-solution angle for inverse-square coefficient b, on the branch of the free interior angle.
inline double continued_regular_angle(HalfInteger j, const Energy& E, double R, double b, double theta_free) {
  if (b == 0.0) return theta_free;
  const double free_form = regular_exterior_angle(j, E, R, 0.0);
  if (std::abs(free_form - theta_free) > 0.1) {
    std::ostringstream os;
    os << "free interior angle " << theta_free << " does not match the Bessel branch " << free_form;
    fail(ErrorKind::branch_ambiguity, os.str());
  }
  return regular_exterior_angle(j, E, R, b) + (theta_free - free_form);
}

}  // namespace detail

/// eta_j(E, lambda) on the branch fixed by eta = 0 at lambda = 0.
inline PhaseShift phase_shift(const ProblemSpec& spec, const Energy& E, const SolverOptions& opts = {}) {
  detail::require_positive_j(spec, "phase_shift");
  if (!E.scattering()) fail(ErrorKind::domain_error, "phase_shift: |E| must exceed M");
  PhaseShift out;
  out.radius = scattering_radius(spec, E);
  out.theta = interior_angle(spec, E, out.radius, opts);
  ProblemSpec free_spec = spec;
  free_spec.lambda = 0.0;
  const double theta_free = spec.lambda == 0.0 ? out.theta : interior_angle(free_spec, E, out.radius, opts);

  const double b = exterior_inverse_square(spec);
  const ExteriorBasis basis = scattering_basis(spec.j, E, out.radius, b);
  out.theta_ref = detail::continued_regular_angle(spec.j, E, out.radius, b, theta_free);
  out.mu = basis.mu;
  out.offset = basis.offset;
  out.delta = detail::lift_delta(basis, out.theta, out.theta_ref);
  out.eta = out.delta + out.offset;
  out.tan_eta = b == 0.0 ? basis.num(out.theta) / basis.den(out.theta) : std::tan(out.eta);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Threshold limits

/// Exterior exponent at E = +-M: alpha = sqrt((j-1/2)^2 + 2Mb), beta = sqrt((j+1/2)^2 - 2Mb).
inline double threshold_order(const ProblemSpec& spec, Side side) {
  const double jj = spec.j.value();
  const double b = exterior_inverse_square(spec);
  const double sq = side == Side::plus ? (jj - 0.5) * (jj - 0.5) + 2.0 * spec.M * b
                                       : (jj + 0.5) * (jj + 0.5) - 2.0 * spec.M * b;
  if (sq < 0.0) fail(ErrorKind::unsupported_regime, "threshold exponent squared is negative");
  return std::sqrt(sq);
}

/// eta - delta in the k -> 0 limit.
inline double threshold_offset(const ProblemSpec& spec, Side side) {
  if (exterior_inverse_square(spec) == 0.0) return 0.0;
  const double jj = spec.j.value();
  const double mu = threshold_order(spec, side);
  return side == Side::plus ? (jj - mu - 0.5) * kPi / 2 : (jj - mu + 0.5) * kPi / 2;
}

/// Smallest ladder momentum: Bessel magnitudes (x/2)^-(mu+2) Gamma(mu+1) max(1, 2MR) stay below ~1e250,
/// and k r0 <= 1e-3.
inline double threshold_k_min(const ProblemSpec& spec, Side side) {
  const double R = match_radius(spec.potential, spec.M);
  const double mu = std::max(threshold_order(spec, side), spec.j.value() + 0.5);
  const double budget = 250.0 - std::lgamma(mu + 1.0) / std::log(10.0) - std::log10(std::max(1.0, 2.0 * spec.M * R));
  const double x_min = 2.0 * std::pow(10.0, -budget / (mu + 2.0));
  return std::min(1e-3 / spec.potential.r0(), x_min / R);
}

struct ThresholdPhase {
  Side side = Side::plus;
  long multiple = 0;   // delta(k -> 0) / pi
  double eta = 0.0;    // multiple * pi + offset
  double offset = 0.0;
  bool critical = false;  // interior angle still between the den-zero angle and its limit at the smallest k
  double spread = 0.0;    // max |delta_i - multiple pi| over the ladder
  std::array<double, 4> k{};
  std::array<double, 4> delta{};
};

namespace detail {

/// True when c lies on the short arc (mod pi) from a to b.
inline bool on_arc(double a, double b, double c) {
  const double len = wrap_half(b - a);
  const double pos = wrap_half(c - a);
  if (len == 0.0) return pos == 0.0;
  return (len > 0.0) ? (pos >= 0.0 && pos <= len) : (pos <= 0.0 && pos >= len);
}

}  // namespace detail

/// eta_j(+-M, lambda): each ladder sample k_i = k_min 2^i (i = 0..3) is rounded to a multiple of pi.
inline ThresholdPhase threshold_phase(const ProblemSpec& spec, Side side, const SolverOptions& opts = {}) {
  detail::require_positive_j(spec, "threshold_phase");
  ThresholdPhase out;
  out.side = side;
  out.offset = threshold_offset(spec, side);
  const double k_min = threshold_k_min(spec, side);
  std::array<long, 4> n{};
  double theta0 = 0.0;
  ExteriorBasis basis0;
  for (int i = 0; i < 4; ++i) {
    out.k[i] = k_min * std::ldexp(1.0, i);
    const Energy E = Energy::from_k(out.k[i], spec.M, side);
    const PhaseShift ps = phase_shift(spec, E, opts);
    out.delta[i] = ps.delta;
    n[i] = std::lround(ps.delta / kPi);
    if (i == 0) {
      theta0 = ps.theta;
      basis0 = scattering_basis(spec.j, E, ps.radius, exterior_inverse_square(spec));
    }
  }
  const double limit_angle = exterior_angle(spec, Energy::threshold(side, spec.M));
  // Angles within the integration accuracy of the limit count as on the arc.
  out.critical = detail::on_arc(basis0.irregular_angle(), limit_angle, theta0) ||
                 std::abs(wrap_half(theta0 - limit_angle)) < 1e-9;
  out.multiple = n[0];
  for (int i = 0; i < 4; ++i) out.spread = std::max(out.spread, std::abs(out.delta[i] - n[0] * kPi));
  const bool agree = std::all_of(n.begin(), n.end(), [&](long v) { return v == n[0]; });
  if ((!agree || out.spread > 0.45 * kPi) && !out.critical) {
    std::ostringstream os;
    os << "threshold phase at " << to_string(side) << " did not settle: delta/pi =";
    for (double d : out.delta) os << ' ' << d / kPi;
    fail(ErrorKind::not_converged, os.str());
  }
  out.eta = static_cast<double>(out.multiple) * kPi + out.offset;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Sweeps along (lambda, E) paths

struct PathNode {
  double lambda = 0.0;
  double E = 0.0;
};

struct PhaseSample {
  double lambda = 0.0;
  double E = 0.0;
  double k = 0.0;
  double tan_eta = 0.0;
  double eta = 0.0;
};

struct PhaseShiftRecord {
  HalfInteger j{1};
  std::vector<PhaseSample> samples;
  std::optional<ThresholdPhase> at_plus_M;
  std::optional<ThresholdPhase> at_minus_M;
};

/// Walks the path, bisecting any segment over which eta moves by pi/2 or more.
inline PhaseShiftRecord phase_sweep(const ProblemSpec& base, const std::vector<PathNode>& path, double min_step = 1e-8,
                                    const SolverOptions& opts = {}) {
  detail::require_positive_j(base, "phase_sweep");
  if (path.empty()) fail(ErrorKind::invalid_argument, "phase_sweep: empty path");
  if (path.front().lambda != 0.0) fail(ErrorKind::invalid_argument, "phase_sweep: the path must start at lambda = 0");
  const double M = base.M;
  const auto sample_at = [&](const PathNode& node) {
    ProblemSpec s = base;
    s.lambda = node.lambda;
    const Energy E = Energy::from_E(node.E, M);
    if (!E.scattering()) fail(ErrorKind::domain_error, "phase_sweep: path energies must satisfy |E| > M");
    const PhaseShift ps = phase_shift(s, E, opts);
    return PhaseSample{node.lambda, node.E, E.k, ps.tan_eta, ps.eta};
  };
  const auto lerp = [](const PathNode& a, const PathNode& b) {
    return PathNode{0.5 * (a.lambda + b.lambda), 0.5 * (a.E + b.E)};
  };

  PhaseShiftRecord rec;
  rec.j = base.j;
  rec.samples.push_back(sample_at(path.front()));
  for (std::size_t i = 1; i < path.size(); ++i) {
    if ((path[i].E > M) != (path[i - 1].E > M)) {
      fail(ErrorKind::invalid_argument, "phase_sweep: a path segment may not cross the gap |E| <= M");
    }
    // Depth-first refinement of the segment [a, b], emitting samples in order.
    struct Segment {
      PathNode a, b;
      PhaseSample sa, sb;
    };
    std::vector<Segment> stack;
    stack.push_back({path[i - 1], path[i], rec.samples.back(), sample_at(path[i])});
    while (!stack.empty()) {
      Segment seg = stack.back();
      stack.pop_back();
      if (std::abs(seg.sb.eta - seg.sa.eta) < kPi / 2) {
        rec.samples.push_back(seg.sb);
        continue;
      }
      const double step = std::max(std::abs(seg.b.lambda - seg.a.lambda), std::abs(seg.b.E - seg.a.E) / M);
      if (step < min_step) {
        std::ostringstream os;
        os << "phase jumps by " << (seg.sb.eta - seg.sa.eta) / kPi << " pi between lambda = " << seg.a.lambda
           << " and " << seg.b.lambda << " at the minimum step";
        fail(ErrorKind::branch_ambiguity, os.str());
      }
      const PathNode mid = lerp(seg.a, seg.b);
      const PhaseSample sm = sample_at(mid);
      stack.push_back({mid, seg.b, sm, seg.sb});
      stack.push_back({seg.a, mid, seg.sa, sm});
    }
  }
  return rec;
}

/// Fills the threshold limits of a record at coupling lambda.
inline void attach_thresholds(PhaseShiftRecord& rec, const ProblemSpec& spec, const SolverOptions& opts = {}) {
  rec.at_plus_M = threshold_phase(spec, Side::plus, opts);
  rec.at_minus_M = threshold_phase(spec, Side::minus, opts);
}

// ---------------------------------------------------------------------------------------------
// Small-k forms

struct ThresholdFit {
  double c1_sq = 0.0;
  double c2_sq = 0.0;
};

struct SideFit {
  double A0 = 0.0;    // A at the threshold
  double slope = 0.0; // dA/d(k^2)
  double curvature = 0.0;
  double rel_residual = 0.0;
};

struct RatioSample {
  double k = 0.0;
  double A = 0.0;
};

/// Least-squares A = a0 + a1 k^2 + a2 k^4.
inline SideFit fit_threshold_side(const std::vector<RatioSample>& samples) {
  if (samples.size() < 4) fail(ErrorKind::invalid_argument, "threshold_fit: needs at least 4 samples");
  double k2_min = std::numeric_limits<double>::infinity(), k2_max = 0.0;
  double a_min = std::numeric_limits<double>::infinity(), a_max = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (!std::isfinite(s.A)) fail(ErrorKind::ill_conditioned, "threshold_fit: A is infinite at a sample");
    k2_min = std::min(k2_min, s.k * s.k);
    k2_max = std::max(k2_max, s.k * s.k);
    a_min = std::min(a_min, s.A);
    a_max = std::max(a_max, s.A);
  }
  if (!(k2_max >= 100.0 * k2_min)) fail(ErrorKind::invalid_argument, "threshold_fit: k^2 must span two decades");

  // Normal equations in u = k^2 / k2_max.
  std::array<std::array<double, 4>, 3> m{};
  for (const auto& s : samples) {
    const double u = s.k * s.k / k2_max;
    const std::array<double, 3> phi{1.0, u, u * u};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += phi[r] * phi[c];
      m[r][3] += phi[r] * s.A;
    }
  }
  for (int p = 0; p < 3; ++p) {
    int piv = p;
    for (int r = p + 1; r < 3; ++r) {
      if (std::abs(m[r][p]) > std::abs(m[piv][p])) piv = r;
    }
    std::swap(m[p], m[piv]);
    if (m[p][p] == 0.0) fail(ErrorKind::ill_conditioned, "threshold_fit: singular normal equations");
    for (int r = 0; r < 3; ++r) {
      if (r == p) continue;
      const double f = m[r][p] / m[p][p];
      for (int c = p; c < 4; ++c) m[r][c] -= f * m[p][c];
    }
  }
  const std::array<double, 3> coef{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};

  double ss = 0.0;
  for (const auto& s : samples) {
    const double u = s.k * s.k / k2_max;
    const double d = s.A - (coef[0] + coef[1] * u + coef[2] * u * u);
    ss += d * d;
  }
  SideFit out;
  out.A0 = coef[0];
  out.slope = coef[1] / k2_max;
  out.curvature = coef[2] / (k2_max * k2_max);
  const double variation = a_max - a_min;
  const double rms = std::sqrt(ss / static_cast<double>(samples.size()));
  out.rel_residual = variation > 0.0 ? rms / variation : 0.0;
  if (out.rel_residual > 0.01) {
    std::ostringstream os;
    os << "threshold_fit: residual is " << 100.0 * out.rel_residual << "% of the variation of A";
    fail(ErrorKind::ill_conditioned, os.str());
  }
  return out;
}

/// A(E) = A(M) - c1^2 k^2 above, A(-M) + c2^2 k^2 below.
inline ThresholdFit threshold_fit(const std::vector<RatioSample>& near_plus, const std::vector<RatioSample>& near_minus) {
  ThresholdFit out;
  out.c1_sq = -fit_threshold_side(near_plus).slope;
  out.c2_sq = fit_threshold_side(near_minus).slope;
  return out;
}

/// A_j(E, lambda) at r0- for k r0 spaced geometrically over [kr_lo, kr_hi].
inline std::vector<RatioSample> ratio_samples(const ProblemSpec& spec, Side side, int count = 9, double kr_lo = 3e-3,
                                              double kr_hi = 1e-1, const SolverOptions& opts = {}) {
  const double r0 = spec.potential.r0();
  std::vector<RatioSample> out;
  for (int i = 0; i < count; ++i) {
    const double kr = kr_lo * std::pow(kr_hi / kr_lo, static_cast<double>(i) / (count - 1));
    const Energy E = Energy::from_k(kr / r0, spec.M, side);
    out.push_back({E.k, integrate_interior(spec, E, opts).value});
  }
  return out;
}

struct AsymptoticTan {
  double value = 0.0;
  std::string_view branch;
};

/// Name of the small-k branch asymptotic_tan_eta uses for positive j on each side.
constexpr std::string_view asymptotic_branch(HalfInteger j, Side side) {
  if (side == Side::plus) return j.twice > 3 ? "j>3/2" : (j.twice == 3 ? "j=3/2" : "j=1/2");
  return j.twice >= 3 ? "j>=3/2" : "j=1/2";
}

/// Leading plus next-to-leading small-k form of tan(eta) given A at the threshold.
inline AsymptoticTan asymptotic_tan_eta(HalfInteger j, const Energy& E, double A_threshold, const ThresholdFit& fit,
                                        double r0, double M) {
  if (!j.positive()) fail(ErrorKind::invalid_argument, "asymptotic_tan_eta: j must be positive");
  if (!E.scattering()) fail(ErrorKind::domain_error, "asymptotic_tan_eta: |E| must exceed M");
  const double jj = j.value();
  const double k = E.k;
  const double x = k * r0;
  const double A = A_threshold;
  const double lead = -kPi * std::pow(x / 2.0, 2.0 * jj + 1.0) / (std::tgamma(jj + 1.5) * std::tgamma(jj + 0.5));
  if (E.above()) {
    if (j.twice > 3) {
      const double den = A - fit.c1_sq * k * k -
                         2.0 * M * r0 / (2.0 * jj - 1.0) * (1.0 + x * x / ((2.0 * jj - 1.0) * (2.0 * jj - 3.0)));
      return {lead * (A - 2.0 * M * (2.0 * jj + 1.0) / (k * k * r0)) / den, "j>3/2"};
    }
    if (j.twice == 3) {
      const double den = A - fit.c1_sq * k * k - M * r0 * (1.0 - x * x / 2.0 * std::log(x));
      return {-kPi / 2.0 * std::pow(x / 2.0, 4) * (A - 8.0 * M / (k * k * r0)) / den, "j=3/2"};
    }
    const double inv = std::isinf(A) ? 0.0 : 1.0 / A;
    const double lx = std::log(x);
    return {kPi / (2.0 * lx) * (inv + fit.c1_sq * k * k - k * k * r0 / (4.0 * M)) /
                (inv + fit.c1_sq * k * k + 1.0 / (2.0 * M * r0 * lx)),
            "j=1/2"};
  }
  if (j.twice >= 3) {
    const double den = A + fit.c2_sq * k * k + k * k * r0 / (2.0 * M * (2.0 * jj - 1.0));
    return {lead * (A + (2.0 * jj + 1.0) / (2.0 * M * r0)) / den, "j>=3/2"};
  }
  const double den = A + fit.c2_sq * k * k - k * k * r0 * std::log(x) / (2.0 * M);
  return {-kPi * (x / 2.0) * (x / 2.0) * (A + 1.0 / (M * r0)) / den, "j=1/2"};
}

/// Phase shift for a pure b/r^2 exterior starting at r0, from A at r0 (principal delta in (-pi/2, pi/2]
/// plus the offset). The Bessel order is fixed at the threshold exponent: alpha for E > M, beta for E < -M.
inline double tail_phase_shift(HalfInteger j, const Energy& E, const MatchRatio& A, double r0, double M, double b) {
  if (!j.positive()) fail(ErrorKind::invalid_argument, "tail_phase_shift: j must be positive");
  if (!E.scattering()) fail(ErrorKind::domain_error, "tail_phase_shift: |E| must exceed M");
  const double jj = j.value();
  const double sq = E.above() ? jj * jj - jj + 2.0 * M * b + 0.25 : jj * jj + jj - 2.0 * M * b + 0.25;
  if (!(sq > 0.0)) fail(ErrorKind::unsupported_regime, E.above() ? "alpha^2 <= 0" : "beta^2 <= 0");
  const ExteriorBasis basis = scattering_basis_of_order(j, E, r0, std::sqrt(sq));
  return std::atan(basis.num(A.theta) / basis.den(A.theta)) + basis.offset;
}

}  // namespace levinson2d
