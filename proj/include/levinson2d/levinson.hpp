#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "levinson2d/errors.hpp"
#include "levinson2d/potentials.hpp"
#include "levinson2d/radial_solver.hpp"
#include "levinson2d/scattering.hpp"
#include "levinson2d/spectrum.hpp"

namespace levinson2d {

enum class Classification { VERIFIED, VIOLATED, CRITICAL_AMBIGUOUS, UNSUPPORTED_REGIME };

constexpr std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::VERIFIED: return "VERIFIED";
    case Classification::VIOLATED: return "VIOLATED";
    case Classification::CRITICAL_AMBIGUOUS: return "CRITICAL_AMBIGUOUS";
    case Classification::UNSUPPORTED_REGIME: return "UNSUPPORTED_REGIME";
  }
  return "unknown";
}

struct TailExponents {
  double alpha = 0.0;
  double beta = 0.0;
};

/// alpha^2 = j^2 - j + 2Mb + 1/4, beta^2 = j^2 + j - 2Mb + 1/4, positive roots.
/// b = 0 is the cutoff case and always returns (|j - 1/2|, |j + 1/2|).
inline TailExponents tail_exponents(HalfInteger j, double M, double b) {
  const double jj = j.value();
  if (b == 0.0) return {std::abs(jj - 0.5), std::abs(jj + 0.5)};
  const double a2 = jj * jj - jj + 2.0 * M * b + 0.25;
  const double b2 = jj * jj + jj - 2.0 * M * b + 0.25;
  if (a2 < 0.0 || b2 < 0.0) fail(ErrorKind::infinite_spectrum, "negative exponent squared: infinitely many bound states");
  if (a2 == 0.0 || b2 == 0.0) fail(ErrorKind::excluded_case, "vanishing threshold exponent");
  return {std::sqrt(a2), std::sqrt(b2)};
}

/// The +pi of the half-bound branches: j = 3/2 or -1/2 at +M, j = 1/2 or -3/2 at -M.
inline int half_bound_correction(HalfInteger j, HalfBound h) {
  if (h == HalfBound::at_plus_M && (j.twice == 3 || j.twice == -1)) return 1;
  if (h == HalfBound::at_minus_M && (j.twice == 1 || j.twice == -3)) return 1;
  return 0;
}

struct VerifyOptions {
  SpectrumOptions spectrum;
  double residual_tol = 0.05 * kPi;
};

struct LevinsonReport {
  HalfInteger j{1};
  double lambda = 1.0;
  double eta_plus = 0.0;   // eta_j(M)
  double eta_minus = 0.0;  // eta_j(-M)
  double lhs = 0.0;
  long n_j = 0;
  HalfBound half_bound = HalfBound::none;
  int correction = 0;
  double tail_offset = 0.0;
  double residual = 0.0;
  Classification classification = Classification::VERIFIED;

  bool critical = false;
  double residual_n = 0.0;         // against n_j pi + tail_offset
  double residual_n_plus_1 = 0.0;  // against (n_j + 1) pi + tail_offset
  std::optional<TailExponents> exponents;
  double cutoff_radius = 0.0;  // r0, or the effective cutoff for tails beyond 1/r^2
  std::optional<ThresholdPhase> threshold_plus;
  std::optional<ThresholdPhase> threshold_minus;
  std::optional<SpectrumReport> spectrum;
  std::string note;
};

/// Spectrum of (-j, -lambda) from that of (j, lambda): E -> -E and the threshold sides swap.
inline SpectrumReport symmetry_map(SpectrumReport s) {
  s.j = -s.j;
  for (double& E : s.bound_energies) E = -E;
  std::reverse(s.bound_energies.begin(), s.bound_energies.end());
  if (s.half_bound == HalfBound::at_plus_M) s.half_bound = HalfBound::at_minus_M;
  else if (s.half_bound == HalfBound::at_minus_M) s.half_bound = HalfBound::at_plus_M;
  std::swap(s.critical_plus, s.critical_minus);
  std::swap(s.bound_at_plus_M, s.bound_at_minus_M);
  return s;
}

/// (j, lambda) -> (-j, -lambda): thresholds and half-bound sides swap, eta_{-j}(+-M) = eta_j(-+M).
inline LevinsonReport symmetry_map(LevinsonReport r) {
  r.j = -r.j;
  r.lambda = -r.lambda;
  std::swap(r.eta_plus, r.eta_minus);
  std::swap(r.threshold_plus, r.threshold_minus);
  if (r.threshold_plus) r.threshold_plus->side = Side::plus;
  if (r.threshold_minus) r.threshold_minus->side = Side::minus;
  if (r.half_bound == HalfBound::at_plus_M) r.half_bound = HalfBound::at_minus_M;
  else if (r.half_bound == HalfBound::at_minus_M) r.half_bound = HalfBound::at_plus_M;
  if (r.exponents) std::swap(r.exponents->alpha, r.exponents->beta);
  if (r.spectrum) r.spectrum = symmetry_map(std::move(*r.spectrum));
  return r;
}

namespace detail {

inline LevinsonReport unsupported(const ProblemSpec& spec, std::string why) {
  LevinsonReport r;
  r.j = spec.j;
  r.lambda = spec.lambda;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.eta_plus = r.eta_minus = r.lhs = r.residual = r.residual_n = r.residual_n_plus_1 = nan;
  r.classification = Classification::UNSUPPORTED_REGIME;
  r.note = std::move(why);
  return r;
}

inline LevinsonReport verify_positive(const ProblemSpec& spec, const VerifyOptions& opts) {
  const PotentialModel& V = spec.potential;
  LevinsonReport r;
  r.j = spec.j;
  r.lambda = spec.lambda;
  r.cutoff_radius = V.r0();

  const double b = exterior_inverse_square(spec);
  if (V.has_tail()) {
    if (V.tail()->n < 2.0) return unsupported(spec, "tails decaying slower than 1/r^2");
    if (V.tail()->n == 2.0) {
      try {
        r.exponents = tail_exponents(spec.j, spec.M, b);
      } catch (const SolverError& e) {
        return unsupported(spec, e.what());
      }
      r.tail_offset = (2.0 * spec.j.value() - r.exponents->alpha - r.exponents->beta) * kPi / 2;
    } else {
      r.cutoff_radius = V.effective_cutoff();
    }
  }

  const SolverOptions& ode = opts.spectrum.ode;
  r.spectrum = spectrum(spec, opts.spectrum);
  const SpectrumReport& s = *r.spectrum;
  r.n_j = s.n_j;
  r.half_bound = s.half_bound;

  if (b != 0.0) {
    const bool soft_plus = s.critical_plus && r.exponents->alpha <= 1.0;
    const bool soft_minus = s.critical_minus && r.exponents->beta <= 1.0;
    if (soft_plus || soft_minus) {
      LevinsonReport u = unsupported(spec, "critical tail case with a threshold exponent in (0, 1]");
      u.exponents = r.exponents;
      u.spectrum = r.spectrum;
      u.n_j = r.n_j;
      u.half_bound = r.half_bound;
      return u;
    }
  }

  r.threshold_plus = threshold_phase(spec, Side::plus, ode);
  r.threshold_minus = threshold_phase(spec, Side::minus, ode);
  r.eta_plus = r.threshold_plus->eta;
  r.eta_minus = r.threshold_minus->eta;
  r.lhs = r.eta_plus + r.eta_minus;
  r.correction = half_bound_correction(spec.j, r.half_bound);
  r.residual = r.lhs - (static_cast<double>(r.n_j + r.correction) * kPi + r.tail_offset);
  r.residual_n = r.lhs - (static_cast<double>(r.n_j) * kPi + r.tail_offset);
  r.residual_n_plus_1 = r.lhs - (static_cast<double>(r.n_j + 1) * kPi + r.tail_offset);
  r.critical = s.critical() || r.threshold_plus->critical || r.threshold_minus->critical;

  if (std::abs(r.residual) < opts.residual_tol) r.classification = Classification::VERIFIED;
  else if (r.critical) r.classification = Classification::CRITICAL_AMBIGUOUS;
  else r.classification = Classification::VIOLATED;

  if (!s.method_agreement.agree) r.note = "lambda sweep: " + (s.method_agreement.note.empty() ? std::string("disagrees")
                                                                                               : s.method_agreement.note);
  return r;
}

}  // namespace detail

/// eta_j(M) + eta_j(-M) against n_j pi, with the half-bound correction and the 1/r^2 tail offset.
/// Negative j goes through the symmetry map.
inline LevinsonReport verify(const ProblemSpec& spec, const VerifyOptions& opts = {}) {
  spec.validate();
  const IntegrabilityResult integrable = check_integrability(spec.potential);
  if (!integrable.ok) fail(ErrorKind::unsupported_origin, integrable.diagnostic);
  if (spec.j.positive()) return detail::verify_positive(spec, opts);
  return symmetry_map(detail::verify_positive(negate_and_reflect(spec), opts));
}

}  // namespace levinson2d
