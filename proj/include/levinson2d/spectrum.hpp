#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "levinson2d/errors.hpp"
#include "levinson2d/potentials.hpp"
#include "levinson2d/radial_solver.hpp"
#include "levinson2d/scattering.hpp"

namespace levinson2d {

enum class HalfBound { none, at_plus_M, at_minus_M };

constexpr std::string_view to_string(HalfBound h) {
  switch (h) {
    case HalfBound::none: return "none";
    case HalfBound::at_plus_M: return "at_plus_M";
    case HalfBound::at_minus_M: return "at_minus_M";
  }
  return "unknown";
}

struct SpectrumOptions {
  double tol_E = 1e-10;  // relative to M
  double tol_half = 1e-6;
  int grid_points = 256;
  int max_grid_points = 1 << 16;
  int sweep_nodes = 64;
  double min_lambda_step = 1e-8;
  unsigned threads = 1;
  SolverOptions ode;
};

namespace detail {

/// out[i] = f(i), spread over `threads` workers. The first exception (by index) is rethrown.
template <class F>
auto parallel_map(std::size_t n, unsigned threads, F f) -> std::vector<decltype(f(std::size_t{0}))> {
  using T = decltype(f(std::size_t{0}));
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < n; i += stride) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Bound-region energy on the node phi in [0, pi]: E = -M cos(phi), dense near both thresholds.
inline Energy node_energy(double phi, double M) {
  if (phi <= 0.0) return Energy::threshold(Side::minus, M);
  if (phi >= kPi) return Energy::threshold(Side::plus, M);
  return Energy::from_kappa(std::min(M, M * std::sin(phi)), M, phi < kPi / 2 ? Side::minus : Side::plus);
}

/// Interior minus exterior angle at r0. Strictly decreasing in E on [-M, M].
inline double mismatch(const ProblemSpec& spec, const Energy& E, const SolverOptions& ode) {
  const double r0 = spec.potential.r0();
  return interior_angle(spec, E, r0, ode) - exterior_angle_at(spec, E, r0, ode);
}

/// Largest |lambda V| over the inner region, where the parameters make it available.
inline double depth_scale(const ProblemSpec& spec) {
  const PotentialModel& V = spec.potential;
  const auto& p = V.params();
  double depth = 0.0;
  switch (V.kind()) {
    case PotentialKind::square_well: depth = std::abs(p.at(0)); break;
    case PotentialKind::piecewise_linear:
    case PotentialKind::sampled_table:
      for (std::size_t i = 1; i < p.size(); i += 2) depth = std::max(depth, std::abs(p[i]));
      break;
    case PotentialKind::custom_closure: break;
  }
  return std::abs(spec.lambda) * depth;
}

inline void check_spectrum_input(const ProblemSpec& spec) {
  spec.validate();
  require_positive_j(spec, "spectrum");
  if (spec.j.twice > 41) fail(ErrorKind::out_of_validated_range, "j above 41/2 is outside the validated range");
  if (depth_scale(spec) > 100.0 * spec.M)
    fail(ErrorKind::out_of_validated_range, "|V| above 100 M is outside the validated range");
}

}  // namespace detail

/// Interior and exterior data at one threshold, at the problem's own lambda.
struct ThresholdMatch {
  Side side = Side::plus;
  double interior = 0.0;  // unwrapped interior angle at r0
  double exterior = 0.0;  // exterior angle at r0, continued inward from the match radius
  MatchRatio A_interior;
  MatchRatio A_exterior;
  bool coincident = false;  // interior ratio equals the exterior threshold ratio within tol_half

  [[nodiscard]] double mismatch() const { return interior - exterior; }
};

inline ThresholdMatch threshold_match(const ProblemSpec& spec, Side side, double tol_half,
                                      const SolverOptions& ode = {}) {
  const Energy E = Energy::threshold(side, spec.M);
  const double r0 = spec.potential.r0();
  ThresholdMatch out;
  out.side = side;
  out.interior = interior_angle(spec, E, r0, ode);
  out.A_interior = MatchRatio::from_angle(out.interior);
  if (match_radius(spec.potential, spec.M) > r0) {
    out.exterior = exterior_angle_at(spec, E, r0, ode);
    out.A_exterior = MatchRatio::from_angle(out.exterior);
  } else {
    out.A_exterior = exterior_power_ratio(spec.j, E, r0, spec.M, 0.0);
    out.exterior = out.A_exterior.centered_angle();
  }
  if (out.A_exterior.is_pole()) {
    const double th = out.A_interior.theta;
    out.coincident = std::abs(std::cos(th) / std::sin(th)) < tol_half;
  } else if (!out.A_interior.is_pole()) {
    const double ref = out.A_exterior.value;
    out.coincident = std::abs(out.A_interior.value - ref) < tol_half * (1.0 + std::abs(ref));
  }
  return out;
}

/// A solution sitting exactly at E = +-M is square integrable (a true bound state) when the
/// exterior exponent exceeds 1: j > 3/2 at +M and j >= 3/2 at -M without a tail.
inline bool threshold_state_is_bound(const ProblemSpec& spec, Side side) {
  return threshold_order(spec, side) > 1.0;
}

struct BoundSearch {
  std::vector<double> energies;  // strictly inside (-M, M), ascending
  bool coincident_plus = false;
  bool coincident_minus = false;
  int grid_points = 0;
};

inline BoundSearch search_bound_states(const ProblemSpec& spec, const SpectrumOptions& opts = {}) {
  detail::check_spectrum_input(spec);
  const double M = spec.M;
  int n = std::max(opts.grid_points, 256);
  std::vector<double> phi, delta;
  for (;;) {
    phi.resize(n);
    for (int i = 0; i < n; ++i) phi[i] = kPi * i / (n - 1);
    delta = detail::parallel_map(static_cast<std::size_t>(n), opts.threads, [&](std::size_t i) {
      return detail::mismatch(spec, detail::node_energy(phi[i], M), opts.ode);
    });
    bool coarse = false;
    for (int i = 0; i + 1 < n; ++i) {
      if (delta[i + 1] > delta[i] + 1e-9) fail(ErrorKind::not_converged, "mismatch angle is not monotone in E");
      if (delta[i] - delta[i + 1] > kPi) coarse = true;
    }
    if (!coarse) break;
    if (2 * n > opts.max_grid_points) fail(ErrorKind::grid_insufficient, "two roots share a grid cell at the finest grid");
    n *= 2;
  }

  BoundSearch out;
  out.grid_points = n;
  out.coincident_plus = threshold_match(spec, Side::plus, opts.tol_half, opts.ode).coincident;
  out.coincident_minus = threshold_match(spec, Side::minus, opts.tol_half, opts.ode).coincident;

  const double lo = delta.back();   // E = +M
  const double hi = delta.front();  // E = -M
  const long m_first = static_cast<long>(std::floor(lo / kPi)) + 1;
  const long m_last = static_cast<long>(std::ceil(hi / kPi)) - 1;
  const long m_plus = std::lround(lo / kPi);
  const long m_minus = std::lround(hi / kPi);
  const double tol = opts.tol_E * M;

  for (long m = m_first; m <= m_last; ++m) {
    if (out.coincident_plus && m == m_plus) continue;
    if (out.coincident_minus && m == m_minus) continue;
    const double target = static_cast<double>(m) * kPi;
    std::size_t i = 0;
    while (i + 2 < delta.size() && delta[i + 1] > target) ++i;
    double a = phi[i], b = phi[i + 1];  // delta(a) > target >= delta(b)
    while (std::abs(std::cos(a) - std::cos(b)) * M > tol) {
      const double c = 0.5 * (a + b);
      if (c <= a || c >= b) break;
      if (detail::mismatch(spec, detail::node_energy(c, M), opts.ode) > target) a = c;
      else b = c;
    }
    const double E = -M * std::cos(0.5 * (a + b));
    if (M - E < tol) {
      out.coincident_plus = true;
    } else if (E + M < tol) {
      out.coincident_minus = true;
    } else {
      out.energies.push_back(E);
    }
  }
  std::sort(out.energies.begin(), out.energies.end());
  return out;
}

inline std::vector<double> find_bound_energies(const ProblemSpec& spec, const SpectrumOptions& opts = {}) {
  return search_bound_states(spec, opts).energies;
}

inline HalfBound detect_half_bound(const ProblemSpec& spec, const SpectrumOptions& opts = {}) {
  detail::require_positive_j(spec, "detect_half_bound");
  if (threshold_match(spec, Side::plus, opts.tol_half, opts.ode).coincident &&
      !threshold_state_is_bound(spec, Side::plus))
    return HalfBound::at_plus_M;
  if (threshold_match(spec, Side::minus, opts.tol_half, opts.ode).coincident &&
      !threshold_state_is_bound(spec, Side::minus))
    return HalfBound::at_minus_M;
  return HalfBound::none;
}

/// Signed crossing tally of the threshold mismatch angles as lambda runs from 0 to spec.lambda.
struct SweepTally {
  long count = 0;
  long plus_down = 0;   // A(M) decreasing through the exterior ratio: a state becomes bound
  long plus_up = 0;
  long minus_down = 0;  // A(-M) decreasing through the exterior ratio: a bound state leaves
  long minus_up = 0;
  std::size_t nodes = 0;
};

inline SweepTally lambda_sweep_count(const ProblemSpec& spec, const SpectrumOptions& opts = {}) {
  detail::check_spectrum_input(spec);
  struct Node {
    double t;
    double plus, minus;
  };
  const auto eval = [&](double t) {
    ProblemSpec s = spec;
    s.lambda = t * spec.lambda;
    return Node{t, threshold_match(s, Side::plus, opts.tol_half, opts.ode).mismatch(),
                threshold_match(s, Side::minus, opts.tol_half, opts.ode).mismatch()};
  };
  const int n0 = std::max(opts.sweep_nodes, 2);
  std::vector<Node> nodes = detail::parallel_map(static_cast<std::size_t>(n0) + 1, opts.threads,
                                                 [&](std::size_t i) { return eval(static_cast<double>(i) / n0); });

  // Refine until neighbouring nodes are within pi/4 on both sides, so each step is resolved.
  std::vector<Node> fine{nodes.front()};
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    std::vector<Node> stack{nodes[i]};
    while (!stack.empty()) {
      const Node& a = fine.back();
      const Node b = stack.back();
      if (std::abs(b.plus - a.plus) <= kPi / 4 && std::abs(b.minus - a.minus) <= kPi / 4) {
        fine.push_back(b);
        stack.pop_back();
        continue;
      }
      if ((b.t - a.t) * std::abs(spec.lambda) < opts.min_lambda_step)
        fail(ErrorKind::crossing_ambiguity, "threshold mismatch jumps at lambda = " + std::to_string(b.t * spec.lambda));
      stack.push_back(eval(0.5 * (a.t + b.t)));
    }
  }

  SweepTally out;
  out.nodes = fine.size();
  const auto multiples_at_or_below = [](double x) { return static_cast<long>(std::floor(x / kPi)); };
  for (std::size_t i = 1; i < fine.size(); ++i) {
    // Half-open bookkeeping: a crossing counts when the mismatch leaves m pi (>=) for the other side (<).
    const long dp = multiples_at_or_below(fine[i - 1].plus) - multiples_at_or_below(fine[i].plus);
    const long dm = multiples_at_or_below(fine[i - 1].minus) - multiples_at_or_below(fine[i].minus);
    (dp > 0 ? out.plus_down : out.plus_up) += std::abs(dp);
    (dm > 0 ? out.minus_down : out.minus_up) += std::abs(dm);
  }
  out.count = out.plus_down - out.plus_up - out.minus_down + out.minus_up;

  const Node& last = fine.back();
  const Node& prev = fine[fine.size() - 2];
  const auto near = [&](double d) { return std::abs(wrap_half(d)) < opts.tol_half; };
  if ((near(last.plus) && !near(prev.plus)) || (near(last.minus) && !near(prev.minus)))
    fail(ErrorKind::crossing_ambiguity, "a threshold crossing sits at the end of the sweep");
  return out;
}

struct MethodAgreement {
  long direct = 0;
  std::optional<long> sweep;
  bool agree = false;
  std::string note;
};

struct SpectrumReport {
  HalfInteger j{1};
  std::vector<double> bound_energies;
  long n_j = 0;
  HalfBound half_bound = HalfBound::none;
  bool critical_plus = false;   // a threshold coincidence at +M, half-bound or bound
  bool critical_minus = false;
  bool bound_at_plus_M = false;  // counted in n_j
  bool bound_at_minus_M = false;
  int grid_points = 0;
  MethodAgreement method_agreement;

  [[nodiscard]] bool critical() const { return critical_plus || critical_minus; }
};

inline SpectrumReport spectrum(const ProblemSpec& spec, const SpectrumOptions& opts = {}) {
  const BoundSearch search = search_bound_states(spec, opts);
  SpectrumReport out;
  out.j = spec.j;
  out.bound_energies = search.energies;
  out.grid_points = search.grid_points;
  out.critical_plus = search.coincident_plus;
  out.critical_minus = search.coincident_minus;
  out.bound_at_plus_M = search.coincident_plus && threshold_state_is_bound(spec, Side::plus);
  out.bound_at_minus_M = search.coincident_minus && threshold_state_is_bound(spec, Side::minus);
  if (search.coincident_plus && !out.bound_at_plus_M) out.half_bound = HalfBound::at_plus_M;
  else if (search.coincident_minus && !out.bound_at_minus_M) out.half_bound = HalfBound::at_minus_M;
  out.n_j = static_cast<long>(out.bound_energies.size()) + (out.bound_at_plus_M ? 1 : 0) +
            (out.bound_at_minus_M ? 1 : 0);

  MethodAgreement& agreement = out.method_agreement;
  agreement.direct = out.n_j;
  try {
    agreement.sweep = lambda_sweep_count(spec, opts).count;
    agreement.agree = *agreement.sweep == out.n_j;
    if (!agreement.agree) agreement.note = out.critical() ? "critical configuration" : "counts differ";
  } catch (const SolverError& e) {
    if (e.kind() != ErrorKind::crossing_ambiguity) throw;
    agreement.note = e.what();
  }
  return out;
}

}  // namespace levinson2d
