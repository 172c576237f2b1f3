#pragma once

// Radial potentials V(r, lambda) = lambda V(r): an inner shape on (0, r0) and
// either nothing or a power tail b r^-n beyond r0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <math.h>  // Boost 1.74's pchip calls unqualified isnan

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levinson2d/errors.hpp"

namespace levinson2d {

/// Half-integer stored as twice its value, so j = 3/2 is `HalfInteger{3}`.
struct HalfInteger {
  int twice = 1;

  [[nodiscard]] static HalfInteger from_double(double j) {
    const double t = 2.0 * j;
    const double rounded = std::round(t);
    if (!std::isfinite(t) || std::abs(t - rounded) > 1e-9 || std::abs(static_cast<long>(rounded)) % 2 != 1) {
      fail(ErrorKind::invalid_argument, "j must be a half-integer (2j odd), got " + std::to_string(j));
    }
    return HalfInteger{static_cast<int>(rounded)};
  }

  /// Accepts "3/2", "-1/2" or a decimal such as "1.5".
  [[nodiscard]] static HalfInteger parse(std::string_view text) {
    std::string s(text);
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    if (s.empty()) fail(ErrorKind::invalid_argument, "empty j value");
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      char* end = nullptr;
      const long num = std::strtol(s.c_str(), &end, 10);
      if (end != s.c_str() + slash || s.substr(slash + 1) != "2") {
        fail(ErrorKind::invalid_argument, "j must look like 'k/2' with k odd, got '" + s + "'");
      }
      if (num % 2 == 0) fail(ErrorKind::invalid_argument, "j numerator must be odd, got '" + s + "'");
      return HalfInteger{static_cast<int>(num)};
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) fail(ErrorKind::invalid_argument, "cannot parse j from '" + s + "'");
    return from_double(v);
  }

  [[nodiscard]] constexpr double value() const { return 0.5 * twice; }
  [[nodiscard]] constexpr bool positive() const { return twice > 0; }
  [[nodiscard]] constexpr HalfInteger operator-() const { return HalfInteger{-twice}; }
  [[nodiscard]] constexpr HalfInteger abs() const { return HalfInteger{twice < 0 ? -twice : twice}; }
  constexpr bool operator==(const HalfInteger&) const = default;

  [[nodiscard]] std::string str() const { return std::to_string(twice) + "/2"; }
};

enum class PotentialKind { square_well, piecewise_linear, sampled_table, custom_closure };

constexpr std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::square_well: return "square_well";
    case PotentialKind::piecewise_linear: return "piecewise_linear";
    case PotentialKind::sampled_table: return "sampled_table";
    case PotentialKind::custom_closure: return "custom_closure";
  }
  return "unknown";
}

/// V(r) = b r^-n for r >= r0.
struct PowerTail {
  double b = 0.0;
  double n = 2.0;
};

class PotentialModel {
 public:
  using Shape = std::function<double(double)>;

  [[nodiscard]] static PotentialModel free(double r0 = 1.0) { return square_well(0.0, r0); }

  [[nodiscard]] static PotentialModel square_well(double V0, double r0 = 1.0) {
    require_finite(V0, "square_well depth");
    PotentialModel m(PotentialKind::square_well, {V0}, r0);
    m.shape_ = std::make_shared<const Shape>([V0](double) { return V0; });
    return m;
  }

  /// Knots (r_i, V_i) with 0 < r_1 < ... < r_n <= r0; constant before the first knot and after the last.
  [[nodiscard]] static PotentialModel piecewise_linear(std::vector<std::pair<double, double>> knots, double r0 = 1.0) {
    if (knots.empty()) fail(ErrorKind::invalid_argument, "piecewise_linear needs at least one knot");
    std::vector<double> params;
    for (std::size_t i = 0; i < knots.size(); ++i) {
      const auto [r, v] = knots[i];
      require_finite(v, "piecewise_linear value");
      if (!(r > 0.0) || r > r0 || (i > 0 && !(r > knots[i - 1].first))) {
        fail(ErrorKind::invalid_argument, "piecewise_linear knots must be increasing within (0, r0]");
      }
      params.push_back(r);
      params.push_back(v);
    }
    PotentialModel m(PotentialKind::piecewise_linear, params, r0);
    for (const auto& k : knots) m.breakpoints_.push_back(k.first);
    m.shape_ = std::make_shared<const Shape>([knots = std::move(knots)](double r) {
      if (r <= knots.front().first) return knots.front().second;
      if (r >= knots.back().first) return knots.back().second;
      const auto hi = std::upper_bound(knots.begin(), knots.end(), r,
                                       [](double x, const auto& k) { return x < k.first; });
      const auto lo = hi - 1;
      const double w = (r - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    });
    return m;
  }

  /// Monotone cubic (PCHIP) through at least four samples; the last value continues to r0.
  [[nodiscard]] static PotentialModel sampled_table(std::vector<double> r, std::vector<double> v, double r0 = 1.0) {
    if (r.size() != v.size() || r.size() < 4) {
      fail(ErrorKind::invalid_argument, "sampled_table needs matching r/V arrays with at least 4 samples");
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
      require_finite(v[i], "sampled_table value");
      if (!(r[i] > 0.0) || r[i] > r0 || (i > 0 && !(r[i] > r[i - 1]))) {
        fail(ErrorKind::invalid_argument, "sampled_table radii must be increasing within (0, r0]");
      }
    }
    std::vector<double> params;
    for (std::size_t i = 0; i < r.size(); ++i) {
      params.push_back(r[i]);
      params.push_back(v[i]);
    }
    PotentialModel m(PotentialKind::sampled_table, params, r0);
    m.breakpoints_ = {r.front(), r.back()};
    const double r_first = r.front(), r_last = r.back(), v_first = v.front(), v_last = v.back();
    auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(r), std::move(v));
    m.shape_ = std::make_shared<const Shape>([=](double x) {
      if (x <= r_first) return v_first;
      if (x >= r_last) return v_last;
      return (*spline)(x);
    });
    return m;
  }

  /// Arbitrary inner shape. `breakpoints` lists radii in (0, r0) where V or V' jumps.
  [[nodiscard]] static PotentialModel custom(Shape shape, double r0 = 1.0, std::vector<double> breakpoints = {}) {
    if (!shape) fail(ErrorKind::invalid_argument, "custom potential needs a callable");
    PotentialModel m(PotentialKind::custom_closure, {}, r0);
    std::sort(breakpoints.begin(), breakpoints.end());
    for (double b : breakpoints) {
      if (b > 0.0 && b < r0) m.breakpoints_.push_back(b);
    }
    m.shape_ = std::make_shared<const Shape>(std::move(shape));
    return m;
  }

  [[nodiscard]] PotentialModel with_tail(PowerTail tail) const {
    require_finite(tail.b, "tail strength b");
    if (!(tail.n > 0.0) || !std::isfinite(tail.n)) fail(ErrorKind::invalid_argument, "tail exponent n must be > 0");
    PotentialModel m = *this;
    m.tail_ = tail;
    return m;
  }

  /// Moves the matching radius used for n > 2 tails; ignored otherwise.
  [[nodiscard]] PotentialModel with_effective_cutoff(double r_eff) const {
    if (!(r_eff >= r0_)) fail(ErrorKind::invalid_argument, "effective cutoff must be >= r0");
    PotentialModel m = *this;
    m.cutoff_override_ = r_eff;
    return m;
  }

  /// V -> -V, used by the negative-j symmetry.
  [[nodiscard]] PotentialModel negated() const {
    PotentialModel m = *this;
    for (std::size_t i = 0; i < m.params_.size(); ++i) {
      const bool is_value = m.kind_ == PotentialKind::square_well || (i % 2 == 1);
      if (is_value) m.params_[i] = -m.params_[i];
    }
    if (m.tail_) m.tail_->b = -m.tail_->b;
    auto inner = shape_;
    m.shape_ = std::make_shared<const Shape>([inner](double r) { return -(*inner)(r); });
    return m;
  }

  /// V(r) at lambda = 1.
  [[nodiscard]] double operator()(double r) const {
    if (!(r > 0.0)) fail(ErrorKind::domain_error, "potential evaluated at r <= 0");
    if (r < r0_) return (*shape_)(r);
    if (!tail_) return 0.0;
    return tail_->b * std::pow(r, -tail_->n);
  }

  [[nodiscard]] PotentialKind kind() const { return kind_; }
  [[nodiscard]] const std::vector<double>& params() const { return params_; }
  [[nodiscard]] double r0() const { return r0_; }
  [[nodiscard]] const std::optional<PowerTail>& tail() const { return tail_; }
  [[nodiscard]] bool has_tail() const { return tail_.has_value() && tail_->b != 0.0; }

  /// Radii in (0, r0) where the integrator must stop and restart.
  [[nodiscard]] const std::vector<double>& breakpoints() const { return breakpoints_; }

  /// Matching radius for an n > 2 tail: the integral of |b| r^-n beyond it is below 1e-9.
  [[nodiscard]] double effective_cutoff() const {
    if (cutoff_override_) return *cutoff_override_;
    if (!has_tail() || tail_->n <= 2.0) return r0_;
    const double n = tail_->n;
    return std::max(r0_, std::pow(std::abs(tail_->b) / ((n - 1.0) * 1e-9), 1.0 / (n - 1.0)));
  }

  /// (2 / r^2) * integral_0^r s V(s) ds: the r-weighted mean of V near the origin.
  [[nodiscard]] double origin_average(double r) const {
    const auto integrand = [this](double u) {
      const double s = std::exp(u);
      return s * s * (*this)(s);
    };
    const double top = std::log(r);
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, top - 40.0, top, 10, 1e-12);
    return 2.0 * value / (r * r);
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "(r0=" << r0_;
    if (kind_ == PotentialKind::square_well) os << ", V0=" << params_.at(0);
    if (tail_) os << ", tail b=" << tail_->b << " n=" << tail_->n;
    os << ")";
    return os.str();
  }

 private:
  PotentialModel(PotentialKind kind, std::vector<double> params, double r0)
      : kind_(kind), params_(std::move(params)), r0_(r0) {
    if (!(r0 > 0.0) || !std::isfinite(r0)) fail(ErrorKind::invalid_argument, "r0 must be > 0");
  }

  static void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, std::string(what) + " must be finite");
  }

  PotentialKind kind_;
  std::vector<double> params_;
  double r0_;
  std::shared_ptr<const Shape> shape_;
  std::vector<double> breakpoints_;
  std::optional<PowerTail> tail_;
  std::optional<double> cutoff_override_;
};

/// lambda V(r); zero beyond r0 unless the model has a tail.
[[nodiscard]] inline double evaluate(const PotentialModel& V, double r, double lambda) {
  if (!(r > 0.0)) fail(ErrorKind::domain_error, "evaluate: r must be > 0");
  return lambda * V(r);
}

struct ProblemSpec {
  PotentialModel potential = PotentialModel::free();
  double M = 1.0;
  HalfInteger j{1};
  double lambda = 1.0;

  void validate() const {
    if (!(M > 0.0) || !std::isfinite(M)) fail(ErrorKind::invalid_argument, "M must be > 0");
    if (j.twice % 2 == 0) fail(ErrorKind::invalid_argument, "2j must be odd");
    if (!std::isfinite(lambda)) fail(ErrorKind::invalid_argument, "lambda must be finite");
  }
};

/// (j, lambda) -> (-j, -lambda). Combined with f <-> g and E -> -E this maps negative-j problems to positive j.
[[nodiscard]] inline ProblemSpec negate_and_reflect(ProblemSpec spec) {
  spec.j = -spec.j;
  spec.lambda = -spec.lambda;
  return spec;
}

struct IntegrabilityResult {
  bool ok = true;
  std::array<double, 3> integrals{};  // at eps = 1e-4, 1e-6, 1e-8 (in units of r0)
  std::string diagnostic;
};

/// Integral of r|V| over [eps r0, r0] for shrinking eps; more than 10% growth per decade means divergence.
[[nodiscard]] inline IntegrabilityResult check_integrability(const PotentialModel& V) {
  const double r0 = V.r0();
  std::vector<double> cuts{std::log(r0)};
  for (double b : V.breakpoints()) cuts.push_back(std::log(b));
  std::sort(cuts.begin(), cuts.end());

  const auto piece = [&V](double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&V](double u) {
          const double r = std::exp(u);
          return r * r * std::abs(V(r));
        },
        a, b, 15, 1e-10);
  };
  const auto integral_from = [&](double eps) {
    double lo = std::log(eps * r0);
    double total = 0.0;
    for (double c : cuts) {
      if (c <= lo) continue;
      total += piece(lo, c);
      lo = c;
    }
    return total;
  };

  IntegrabilityResult out;
  const std::array<double, 3> eps{1e-4, 1e-6, 1e-8};
  for (std::size_t i = 0; i < eps.size(); ++i) out.integrals[i] = integral_from(eps[i]);
  for (std::size_t i = 1; i < eps.size(); ++i) {
    const double prev = out.integrals[i - 1];
    const double growth = out.integrals[i] - prev;
    if (!std::isfinite(out.integrals[i]) || (prev > 0.0 && growth / prev > 0.1 * 2.0)) {
      std::ostringstream os;
      os << "integral of r|V| grows from " << prev << " to " << out.integrals[i] << " between eps=" << eps[i - 1]
         << " and eps=" << eps[i] << "; V is too singular at the origin";
      out.ok = false;
      out.diagnostic = os.str();
      break;
    }
  }
  return out;
}

}  // namespace levinson2d
