#pragma once

// The four CLI commands as library calls: each turns a RunConfig into a Table plus
// metadata and an exit status. Rows are computed in parallel and joined in config order.
//
// Units: energies and momenta are written as E/M and k/M, couplings b as b / (M r0^2),
// depths V0 as V0/M; phases in radians unless the column says _over_pi.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "levinson2d/config.hpp"
#include "levinson2d/errors.hpp"
#include "levinson2d/levinson.hpp"
#include "levinson2d/report.hpp"
#include "levinson2d/scattering.hpp"
#include "levinson2d/spectrum.hpp"

namespace levinson2d {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_config = 2, exit_unsupported = 3, exit_violated = 4 };

struct CommandResult {
  Table table;
  nlohmann::ordered_json metadata;
  int exit_code = exit_ok;
};

/// Error kinds that mean "outside what the theorem or the solver covers" rather than a failure.
inline bool is_unsupported(ErrorKind k) {
  switch (k) {
    case ErrorKind::unsupported_origin:
    case ErrorKind::unsupported_regime:
    case ErrorKind::infinite_spectrum:
    case ErrorKind::excluded_case:
    case ErrorKind::out_of_validated_range: return true;
    default: return false;
  }
}

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline nlohmann::ordered_json base_metadata(const RunConfig& c, const char* command) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["tool_version"] = kToolVersion;
  m["units"] = {{"energy", "M"}, {"length", "r0"}, {"M", c.M}, {"r0", c.r0}};
  m["endpoint_convention"] = "inclusive";
  m["tolerances"] = {{"tol_E", c.tol_E},
                     {"tol_half", c.tol_half},
                     {"residual_tol_over_pi", c.residual_tol},
                     {"ode_rel", c.ode_rel},
                     {"ode_abs", c.ode_abs}};
  m["seed"] = c.seed;
  m["threads"] = c.threads;
  auto branches = nlohmann::ordered_json::array();
  for (HalfInteger j : c.j_list) {
    // Negative j uses the branches of |j| with the thresholds exchanged.
    const Side plus = j.positive() ? Side::plus : Side::minus;
    const Side minus = j.positive() ? Side::minus : Side::plus;
    branches.push_back({{"j", j.str()},
                        {"plus_M", std::string(asymptotic_branch(j.abs(), plus))},
                        {"minus_M", std::string(asymptotic_branch(j.abs(), minus))}});
  }
  m["asymptotic_branches"] = std::move(branches);
  return m;
}

/// Threads for the row fan-out and for each row's own spectrum search.
inline std::pair<unsigned, unsigned> split_threads(unsigned threads, std::size_t rows) {
  if (rows > 1) return {threads, 1};
  return {1, threads};
}

inline double over_pi(double x) { return x / kPi; }

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// verify

inline CommandResult cmd_verify(const RunConfig& c) {
  CommandResult out;
  out.metadata = detail::base_metadata(c, "verify");
  out.table.columns = {"j",
                       "lambda",
                       "eta_plus_over_pi",
                       "eta_minus_over_pi",
                       "lhs_over_pi",
                       "n_j",
                       "half_bound",
                       "correction",
                       "tail_offset_over_pi",
                       "residual_over_pi",
                       "residual_n_over_pi",
                       "residual_n_plus_1_over_pi",
                       "critical",
                       "classification",
                       "sweep_count",
                       "alpha",
                       "beta",
                       "note"};

  const auto [outer, inner] = detail::split_threads(c.threads, c.j_list.size());
  VerifyOptions opts = c.verify_options();
  opts.spectrum.threads = inner;
  const auto reports = detail::parallel_map(c.j_list.size(), outer, [&](std::size_t i) {
    const ProblemSpec spec = c.problem(c.j_list[i]);
    try {
      return verify(spec, opts);
    } catch (const SolverError& e) {
      if (!is_unsupported(e.kind())) throw;
      return detail::unsupported(spec, e.what());
    }
  });

  bool violated = false, unsupported = false;
  for (const LevinsonReport& r : reports) {
    violated |= r.classification == Classification::VIOLATED;
    unsupported |= r.classification == Classification::UNSUPPORTED_REGIME;
    Cell sweep;
    if (r.spectrum && r.spectrum->method_agreement.sweep) sweep = *r.spectrum->method_agreement.sweep;
    out.table.rows.push_back({r.j.str(),
                              r.lambda,
                              detail::over_pi(r.eta_plus),
                              detail::over_pi(r.eta_minus),
                              detail::over_pi(r.lhs),
                              r.n_j,
                              std::string(to_string(r.half_bound)),
                              static_cast<long>(r.correction),
                              detail::over_pi(r.tail_offset),
                              detail::over_pi(r.residual),
                              detail::over_pi(r.residual_n),
                              detail::over_pi(r.residual_n_plus_1),
                              r.critical,
                              std::string(to_string(r.classification)),
                              sweep,
                              r.exponents ? r.exponents->alpha : detail::kNaN,
                              r.exponents ? r.exponents->beta : detail::kNaN,
                              r.note});
  }
  out.exit_code = violated ? exit_violated : (unsupported ? exit_unsupported : exit_ok);
  return out;
}

// ---------------------------------------------------------------------------------------------
// phase

/// eta along lambda in [0, lambda] at each configured E. Negative j runs the mapped problem at -E.
inline CommandResult cmd_phase(const RunConfig& c) {
  if (c.energies.empty()) throw ConfigError("phase.E", "the phase command needs at least one energy");
  CommandResult out;
  out.metadata = detail::base_metadata(c, "phase");
  out.metadata["lambda_steps"] = c.lambda_steps;
  out.table.columns = {"j", "lambda", "E", "k", "tan_eta", "eta"};

  const std::size_t n_E = c.energies.size();
  const SolverOptions ode = c.verify_options().spectrum.ode;
  const auto records = detail::parallel_map(c.j_list.size() * n_E, c.threads, [&](std::size_t i) {
    const HalfInteger j = c.j_list[i / n_E];
    const double E = c.energies[i % n_E];
    ProblemSpec spec = c.problem(j);
    spec.validate();
    if (const auto integrable = check_integrability(spec.potential); !integrable.ok)
      fail(ErrorKind::unsupported_origin, integrable.diagnostic);
    const double s = j.positive() ? 1.0 : -1.0;
    if (!j.positive()) spec = negate_and_reflect(spec);
    std::vector<PathNode> path;
    for (int step = 0; step <= c.lambda_steps; ++step)
      path.push_back({spec.lambda * step / c.lambda_steps, s * E});
    PhaseShiftRecord rec = phase_sweep(spec, path, 1e-8, ode);
    for (PhaseSample& p : rec.samples) {
      p.lambda *= s;
      p.E *= s;
    }
    rec.j = j;
    return rec;
  });

  for (const PhaseShiftRecord& rec : records)
    for (const PhaseSample& p : rec.samples)
      out.table.rows.push_back({rec.j.str(), p.lambda, p.E / c.M, p.k / c.M, p.tan_eta, p.eta});
  return out;
}

// ---------------------------------------------------------------------------------------------
// spectrum

inline SpectrumReport spectrum_any_j(const ProblemSpec& spec, const SpectrumOptions& opts) {
  spec.validate();
  if (spec.j.positive()) return spectrum(spec, opts);
  return symmetry_map(spectrum(negate_and_reflect(spec), opts));
}

inline CommandResult cmd_spectrum(const RunConfig& c) {
  CommandResult out;
  out.metadata = detail::base_metadata(c, "spectrum");
  out.table.columns = {"j",
                       "n_j",
                       "bound_energies",
                       "half_bound",
                       "critical_plus",
                       "critical_minus",
                       "bound_at_plus_M",
                       "bound_at_minus_M",
                       "direct_count",
                       "sweep_count",
                       "method_agreement",
                       "agreement_note",
                       "grid_points"};

  const auto [outer, inner] = detail::split_threads(c.threads, c.j_list.size());
  SpectrumOptions opts = c.verify_options().spectrum;
  opts.threads = inner;
  const auto reports = detail::parallel_map(c.j_list.size(), outer,
                                            [&](std::size_t i) { return spectrum_any_j(c.problem(c.j_list[i]), opts); });
  for (const SpectrumReport& r : reports) {
    std::vector<double> energies = r.bound_energies;
    for (double& E : energies) E /= c.M;
    Cell sweep;
    if (r.method_agreement.sweep) sweep = *r.method_agreement.sweep;
    out.table.rows.push_back({r.j.str(),
                              r.n_j,
                              std::move(energies),
                              std::string(to_string(r.half_bound)),
                              r.critical_plus,
                              r.critical_minus,
                              r.bound_at_plus_M,
                              r.bound_at_minus_M,
                              r.method_agreement.direct,
                              sweep,
                              r.method_agreement.agree,
                              r.method_agreement.note,
                              static_cast<long>(r.grid_points)});
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// sweep-family

/// Long format: one row per (value, j, series). A_plus and A_minus are the interior match
/// ratios at the thresholds; for negative j they belong to the mapped problem (-j, -lambda),
/// so A_plus is its ratio at -M.
inline CommandResult cmd_sweep_family(const RunConfig& c) {
  CommandResult out;
  out.metadata = detail::base_metadata(c, "sweep-family");
  out.metadata["sweep"] = {{"parameter", c.sweep.parameter},
                           {"from", c.sweep.from},
                           {"to", c.sweep.to},
                           {"steps", c.sweep.steps},
                           {"mode", c.sweep.random ? "random" : "grid"}};
  out.table.columns = {"parameter", "value", "j", "series", "y"};

  const std::vector<double> values = c.sweep.values(c.seed);
  const std::size_t n_j = c.j_list.size();
  const bool by_depth = c.sweep.parameter == "V0";
  VerifyOptions opts = c.verify_options();
  opts.spectrum.threads = 1;

  struct Point {
    LevinsonReport report;
    double A_plus = detail::kNaN;
    double A_minus = detail::kNaN;
  };
  const auto points = detail::parallel_map(values.size() * n_j, c.threads, [&](std::size_t i) {
    const double v = values[i / n_j];
    ProblemSpec spec = c.problem(c.j_list[i % n_j]);
    spec.potential = by_depth ? c.model(v, std::nullopt) : c.model(std::nullopt, v);
    Point p;
    try {
      p.report = verify(spec, opts);
    } catch (const SolverError& e) {
      if (!is_unsupported(e.kind())) throw;
      p.report = detail::unsupported(spec, e.what());
      return p;
    }
    const ProblemSpec pos = spec.j.positive() ? spec : negate_and_reflect(spec);
    const Side first = spec.j.positive() ? Side::plus : Side::minus;
    const Side second = spec.j.positive() ? Side::minus : Side::plus;
    p.A_plus = threshold_match(pos, first, opts.spectrum.tol_half, opts.spectrum.ode).A_interior.value;
    p.A_minus = threshold_match(pos, second, opts.spectrum.tol_half, opts.spectrum.ode).A_interior.value;
    return p;
  });

  // Scale x to the output units.
  const double x_scale = by_depth ? 1.0 / c.M : 1.0 / (c.M * c.r0 * c.r0);
  bool unsupported = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    const LevinsonReport& r = p.report;
    unsupported |= r.classification == Classification::UNSUPPORTED_REGIME;
    const double x = values[i / n_j] * x_scale;
    const std::string j = r.j.str();
    const double n = r.classification == Classification::UNSUPPORTED_REGIME && !r.spectrum
                         ? detail::kNaN
                         : static_cast<double>(r.n_j);
    const std::pair<const char*, double> series[] = {{"n_j", n},
                                                     {"eta_plus_over_pi", detail::over_pi(r.eta_plus)},
                                                     {"eta_minus_over_pi", detail::over_pi(r.eta_minus)},
                                                     {"A_plus", p.A_plus},
                                                     {"A_minus", p.A_minus}};
    for (const auto& [name, y] : series) out.table.rows.push_back({c.sweep.parameter, x, j, std::string(name), y});
  }
  out.exit_code = unsupported ? exit_unsupported : exit_ok;
  return out;
}

}  // namespace levinson2d
