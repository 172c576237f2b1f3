#pragma once

// Run configuration read from an INI file:
//
//   [potential]   kind = square_well | piecewise_linear | sampled_table
//                 V0 (square_well), r and V as comma lists (the other two), r0,
//                 tail_b and tail_n for a b r^-n tail beyond r0
//   [physics]     M, j (comma list of half-integers such as 1/2, -3/2 or 2.5), lambda
//   [phase]       E (comma list, |E| > M), lambda_steps
//   [sweep]       parameter = V0 | b, from, to, steps, mode = grid | random
//   [tolerances]  tol_E, tol_half, residual_tol (in units of pi), ode_rel, ode_abs
//   [output]      format = csv | json, path
//   [run]         seed, threads

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "levinson2d/levinson.hpp"
#include "levinson2d/potentials.hpp"

namespace levinson2d {

/// A bad or missing configuration value. `field()` is "section.key".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct SweepRange {
  std::string parameter = "V0";
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  bool random = false;

  /// Inclusive grid of `steps` values, or `steps` sorted uniform draws when random.
  [[nodiscard]] std::vector<double> values(unsigned seed) const {
    std::vector<double> out;
    if (steps <= 0) return out;
    if (random) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(std::min(from, to), std::max(from, to));
      for (int i = 0; i < steps; ++i) out.push_back(u(rng));
      std::sort(out.begin(), out.end());
      if (to < from) std::reverse(out.begin(), out.end());
      return out;
    }
    if (steps == 1) return {from};
    for (int i = 0; i < steps; ++i) out.push_back(from + (to - from) * i / (steps - 1));
    return out;
  }
};

struct RunConfig {
  PotentialKind kind = PotentialKind::square_well;
  double V0 = 0.0;
  std::vector<double> knots_r, knots_V;
  double r0 = 1.0;
  std::optional<PowerTail> tail;

  double M = 1.0;
  std::vector<HalfInteger> j_list{HalfInteger{1}};
  double lambda = 1.0;

  std::vector<double> energies;
  int lambda_steps = 16;

  SweepRange sweep;

  double tol_E = 1e-10;
  double tol_half = 1e-6;
  double residual_tol = 0.05;  // units of pi
  double ode_rel = 1e-12;
  double ode_abs = 1e-14;

  std::string format = "csv";
  std::string out_path;
  unsigned seed = 0;
  unsigned threads = 1;

  boost::property_tree::ptree raw;

  [[nodiscard]] PotentialModel model(std::optional<double> V0_override = std::nullopt,
                                     std::optional<double> b_override = std::nullopt) const {
    PotentialModel m = [&] {
      switch (kind) {
        case PotentialKind::piecewise_linear: {
          std::vector<std::pair<double, double>> knots;
          for (std::size_t i = 0; i < knots_r.size(); ++i) knots.emplace_back(knots_r[i], knots_V[i]);
          return PotentialModel::piecewise_linear(knots, r0);
        }
        case PotentialKind::sampled_table: return PotentialModel::sampled_table(knots_r, knots_V, r0);
        case PotentialKind::custom_closure: throw ConfigError("potential.kind", "custom_closure is library-only");
        case PotentialKind::square_well: break;
      }
      return PotentialModel::square_well(V0_override.value_or(V0), r0);
    }();
    std::optional<PowerTail> t = tail;
    if (b_override) t = PowerTail{*b_override, tail ? tail->n : 2.0};
    if (t) m = m.with_tail(*t);
    return m;
  }

  [[nodiscard]] ProblemSpec problem(HalfInteger j) const {
    ProblemSpec s;
    s.potential = model();
    s.M = M;
    s.j = j;
    s.lambda = lambda;
    return s;
  }

  [[nodiscard]] VerifyOptions verify_options() const {
    VerifyOptions v;
    v.spectrum.tol_E = tol_E;
    v.spectrum.tol_half = tol_half;
    v.spectrum.threads = threads;
    v.spectrum.ode.rel_tol = ode_rel;
    v.spectrum.ode.abs_tol = ode_abs;
    v.residual_tol = residual_tol * kPi;
    return v;
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

inline double parse_number(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) throw ConfigError(field, "'" + t + "' is not a number");
  if (!std::isfinite(v)) throw ConfigError(field, "value must be finite");
  return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// "1/2", "-3/2", "0.5" or "-1.5".
inline HalfInteger parse_half_integer(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    if (trim(t.substr(slash + 1)) != "2") throw ConfigError(field, "'" + t + "' is not a half-integer");
    value = parse_number(field, t.substr(0, slash)) / 2.0;
  } else {
    value = parse_number(field, t);
  }
  const double twice = 2.0 * value;
  if (twice != std::round(twice) || static_cast<long>(std::round(twice)) % 2 == 0)
    throw ConfigError(field, "'" + t + "' is not a half-integer (j = n + 1/2)");
  return HalfInteger{static_cast<int>(std::lround(twice))};
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  RunConfig c;
  try {
    pt::read_ini(in, c.raw);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  const pt::ptree& p = c.raw;
  const auto text = [&](const std::string& key) { return p.get_optional<std::string>(pt::ptree::path_type(key, '.')); };
  const auto number = [&](const std::string& key, double& target) {
    if (auto v = text(key)) target = detail::parse_number(key, *v);
  };
  const auto list = [&](const std::string& key) {
    std::vector<double> out;
    if (auto v = text(key))
      for (const auto& item : detail::split_list(*v)) out.push_back(detail::parse_number(key, item));
    return out;
  };
  const auto positive = [](const std::string& key, double v) {
    if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
  };
  const auto integer = [&](const std::string& key, int& target, int min) {
    if (auto v = text(key)) {
      const double x = detail::parse_number(key, *v);
      if (x != std::round(x) || x < min) throw ConfigError(key, "must be an integer >= " + std::to_string(min));
      target = static_cast<int>(x);
    }
  };

  if (auto kind = text("potential.kind")) {
    const std::string k = detail::trim(*kind);
    if (k == "square_well") c.kind = PotentialKind::square_well;
    else if (k == "piecewise_linear") c.kind = PotentialKind::piecewise_linear;
    else if (k == "sampled_table") c.kind = PotentialKind::sampled_table;
    else throw ConfigError("potential.kind", "unknown kind '" + k + "'");
  }
  number("potential.V0", c.V0);
  number("potential.r0", c.r0);
  positive("potential.r0", c.r0);
  c.knots_r = list("potential.r");
  c.knots_V = list("potential.V");
  if (c.kind != PotentialKind::square_well) {
    if (c.knots_r.empty()) throw ConfigError("potential.r", "required for " + std::string(to_string(c.kind)));
    if (c.knots_r.size() != c.knots_V.size()) throw ConfigError("potential.V", "must have as many entries as potential.r");
  }
  if (text("potential.tail_b")) {
    PowerTail t;
    number("potential.tail_b", t.b);
    number("potential.tail_n", t.n);
    c.tail = t;
  }

  number("physics.M", c.M);
  positive("physics.M", c.M);
  if (auto js = text("physics.j")) {
    c.j_list.clear();
    for (const auto& item : detail::split_list(*js)) c.j_list.push_back(detail::parse_half_integer("physics.j", item));
    if (c.j_list.empty()) throw ConfigError("physics.j", "list is empty");
  }
  number("physics.lambda", c.lambda);

  c.energies = list("phase.E");
  for (double E : c.energies)
    if (!(std::abs(E) > c.M)) throw ConfigError("phase.E", "energies must satisfy |E| > M");
  integer("phase.lambda_steps", c.lambda_steps, 1);

  if (auto param = text("sweep.parameter")) {
    c.sweep.parameter = detail::trim(*param);
    if (c.sweep.parameter != "V0" && c.sweep.parameter != "b")
      throw ConfigError("sweep.parameter", "must be V0 or b");
  }
  if (c.sweep.parameter == "V0" && c.kind != PotentialKind::square_well && text("sweep.steps"))
    throw ConfigError("sweep.parameter", "V0 sweeps need a square_well potential");
  number("sweep.from", c.sweep.from);
  number("sweep.to", c.sweep.to);
  integer("sweep.steps", c.sweep.steps, 0);
  if (auto mode = text("sweep.mode")) {
    const std::string m = detail::trim(*mode);
    if (m != "grid" && m != "random") throw ConfigError("sweep.mode", "must be grid or random");
    c.sweep.random = m == "random";
  }

  const std::pair<const char*, double*> tolerances[] = {{"tolerances.tol_E", &c.tol_E},
                                                       {"tolerances.tol_half", &c.tol_half},
                                                       {"tolerances.residual_tol", &c.residual_tol},
                                                       {"tolerances.ode_rel", &c.ode_rel},
                                                       {"tolerances.ode_abs", &c.ode_abs}};
  for (const auto& [key, target] : tolerances) {
    number(key, *target);
    positive(key, *target);
  }

  if (auto f = text("output.format")) c.format = detail::trim(*f);
  if (c.format != "csv" && c.format != "json") throw ConfigError("output.format", "must be csv or json");
  if (auto path = text("output.path")) c.out_path = detail::trim(*path);
  int seed = 0, threads = 1;
  integer("run.seed", seed, 0);
  integer("run.threads", threads, 1);
  c.seed = static_cast<unsigned>(seed);
  c.threads = static_cast<unsigned>(threads);

  // Building the model runs the potential's own validation.
  try {
    (void)c.model();
  } catch (const SolverError& e) {
    throw ConfigError("potential", e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in);
}

}  // namespace levinson2d
