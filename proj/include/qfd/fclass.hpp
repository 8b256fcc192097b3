#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qfd/errors.hpp"
#include "qfd/quadrature.hpp"

namespace qfd {

// Scalar functions of the kind this library admits on the positive axis:
// every f here is either operator monotone or operator anti-monotone and
// carries a canonical integral representation
//
//   monotone:       f(x) = a + b x + int ( lambda/(lambda^2+1) - 1/(lambda+x) ) dnu
//   anti-monotone:  f(x) = a + b x + int ( 1/(lambda+x) - lambda/(lambda^2+1) ) dnu
//
// with nu a positive measure on (0, inf) that may have a Lebesgue density
// and/or point masses.  "Regular" means nu has a density that dominates
// Lebesgue measure on compact subsets of (0, inf); c_bound(S, T) returns a
// constant c with dlambda <= c dnu on [S, T].

enum class f_kind { monotone, anti_monotone };

struct measure_atom {
  double location;
  double mass;
};

class f_function {
 public:
  const std::string& name() const { return name_; }
  f_kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  bool regular() const { return regular_; }
  bool has_density() const { return static_cast<bool>(density_); }
  const std::vector<measure_atom>& atoms() const { return atoms_; }

  double density(double lambda) const {
    if (!density_) return 0.0;
    return density_(lambda);
  }

  // Direct scalar evaluation on (0, inf).
  double eval(double x) const {
    if (!(x > 0.0)) throw domain_error("f is defined on (0, inf)");
    return eval_(x);
  }
  double operator()(double x) const { return eval(x); }

  // The representation kernel, signed so that
  //   f(x) = a + b x + int kernel(lambda, x) dnu(lambda)
  // holds for this function's kind.  The fraction is kept combined: the
  // naive difference 1/(lambda+x) - lambda/(lambda^2+1) cancels
  // catastrophically for large lambda.
  double kernel(double lambda, double x) const {
    const double anti = (1.0 - lambda * x) /
                        ((lambda + x) * (lambda * lambda + 1.0));
    return kind_ == f_kind::anti_monotone ? anti : -anti;
  }

  // Evaluate f(x) through its integral representation (a cross-check of
  // the stored constants and measure, not the fast path).
  double representation_value(double x, const quad_options& opt = {
                                            1e-10, 1e-10, 4000, true}) const {
    if (!(x > 0.0)) throw domain_error("f is defined on (0, inf)");
    double acc = a_ + b_ * x;
    for (const auto& atom : atoms_) acc += atom.mass * kernel(atom.location, x);
    if (density_) {
      acc += integrate_log_axis(
          [this, x](double lam) { return kernel(lam, x) * density_(lam); },
          opt);
    }
    return acc;
  }

  // int h dnu for a user-supplied profile h (density part plus atoms).
  double integrate_against_measure(
      const std::function<double(double)>& h,
      const quad_options& opt = {1e-10, 1e-10, 4000, true}) const {
    double acc = 0.0;
    for (const auto& atom : atoms_) acc += atom.mass * h(atom.location);
    if (density_) {
      acc += integrate_log_axis(
          [this, &h](double lam) { return h(lam) * density_(lam); }, opt);
    }
    return acc;
  }

  // Domination constant: dlambda <= c_bound(S, T) dnu on [S, T].
  double c_bound(double s_lo, double t_hi) const {
    if (!regular_)
      throw not_regular("measure of '" + name_ +
                        "' does not dominate Lebesgue measure");
    if (!(s_lo >= 0.0) || !(t_hi > s_lo))
      throw param_out_of_range("need 0 <= S < T in c_bound");
    return c_bound_(s_lo, t_hi);
  }

  // Closed-form dispatch metadata: when eval is (plus or minus) a pure power
  // x^p this returns p, otherwise NaN; negated() distinguishes the -x^p case.
  double power_exponent() const { return power_exponent_; }
  bool negated() const { return negated_; }
  f_function&& tag_power(double exponent, bool negated) && {
    power_exponent_ = exponent;
    negated_ = negated;
    return std::move(*this);
  }

  static f_function make(std::string name, f_kind kind, double a, double b,
                         std::function<double(double)> density,
                         std::vector<measure_atom> atoms, bool regular,
                         std::function<double(double)> eval,
                         std::function<double(double, double)> c_bound) {
    f_function f;
    f.name_ = std::move(name);
    f.kind_ = kind;
    f.a_ = a;
    f.b_ = b;
    f.density_ = std::move(density);
    f.atoms_ = std::move(atoms);
    f.regular_ = regular;
    f.eval_ = std::move(eval);
    f.c_bound_ = std::move(c_bound);
    return f;
  }

 private:
  f_function() = default;
  std::string name_;
  f_kind kind_ = f_kind::anti_monotone;
  double a_ = 0.0;
  double b_ = 0.0;
  std::function<double(double)> density_;
  std::vector<measure_atom> atoms_;
  bool regular_ = false;
  std::function<double(double)> eval_;
  std::function<double(double, double)> c_bound_;
  double power_exponent_ = std::numeric_limits<double>::quiet_NaN();
  bool negated_ = false;
};

namespace detail {

inline std::string fmt_param(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace detail

// f(x) = -ln x.  Anti-monotone; nu is Lebesgue measure, so c(S, T) = 1.
inline f_function make_neg_log() {
  return f_function::make(
      "neg_log", f_kind::anti_monotone, 0.0, 0.0,
      [](double) { return 1.0; }, {}, true,
      [](double x) { return -std::log(x); },
      [](double, double) { return 1.0; });
}

// f(x) = x^s for s in (-1, 0) u (0, 1).  For s in (0, 1) the function is
// operator monotone with density (sin(pi s)/pi) lambda^s and constant
// a = cos(pi s / 2); for s in (-1, 0) it is anti-monotone with density
// (sin(pi|s|)/pi) lambda^s and a = cos(pi |s| / 2).
inline f_function make_power(double s) {
  if (!(s > -1.0 && s < 1.0) || s == 0.0)
    throw out_of_range("power exponent must lie in (-1,0) or (0,1)");
  const double as = std::abs(s);
  const double scale = std::sin(M_PI * as) / M_PI;
  const double a = std::cos(M_PI * as / 2.0);
  auto density = [scale, s](double lam) { return scale * std::pow(lam, s); };
  auto eval = [s](double x) { return std::pow(x, s); };
  std::function<double(double, double)> cb;
  if (s > 0.0) {
    // density decreases toward S; requires S > 0
    cb = [s](double s_lo, double) {
      if (!(s_lo > 0.0))
        throw param_out_of_range("c bound for increasing powers needs S > 0");
      return (M_PI / std::sin(M_PI * s)) * std::pow(s_lo, -s);
    };
  } else {
    cb = [as](double, double t_hi) {
      if (!std::isfinite(t_hi))
        throw param_out_of_range("c bound for decreasing powers needs T < inf");
      return (M_PI / std::sin(M_PI * as)) * std::pow(t_hi, as);
    };
  }
  return f_function::make(
             "power(" + detail::fmt_param(s) + ")",
             s > 0.0 ? f_kind::monotone : f_kind::anti_monotone, a, 0.0,
             std::move(density), {}, true, std::move(eval), std::move(cb))
      .tag_power(s, false);
}

// f(x) = -x^g for g in (0, 1): anti-monotone with the same density as x^g
// and a = -cos(pi g / 2).
inline f_function make_negated_power(double g) {
  if (!(g > 0.0 && g < 1.0))
    throw out_of_range("negated power exponent must lie in (0, 1)");
  const double scale = std::sin(M_PI * g) / M_PI;
  return f_function::make(
      "neg_power(" + detail::fmt_param(g) + ")", f_kind::anti_monotone,
      -std::cos(M_PI * g / 2.0), 0.0,
      [scale, g](double lam) { return scale * std::pow(lam, g); }, {}, true,
      [g](double x) { return -std::pow(x, g); },
             [g](double s_lo, double) {
               if (!(s_lo > 0.0))
                 throw param_out_of_range(
                     "c bound for negated powers needs S > 0");
               return (M_PI / std::sin(M_PI * g)) * std::pow(s_lo, -g);
             })
      .tag_power(g, true);
}

// f(x) = 1/(lambda0 + x) for lambda0 >= 0: a single point mass at lambda0.
// Not regular, so no c bound is available.
inline f_function make_inverse_shift(double lambda0) {
  if (lambda0 < 0.0)
    throw negative_lambda("shift must be nonnegative, got " +
                          detail::fmt_param(lambda0));
  const double a = lambda0 / (lambda0 * lambda0 + 1.0);
  return f_function::make(
      "inverse_shift(" + detail::fmt_param(lambda0) + ")",
      f_kind::anti_monotone, a, 0.0, nullptr,
      {measure_atom{lambda0, 1.0}}, false,
      [lambda0](double x) { return 1.0 / (lambda0 + x); },
      [](double, double) -> double {
        throw not_regular("inverse shift has an atomic measure");
      });
}

// f(x) = -x: anti-monotone with b = -1 and empty measure.
inline f_function make_negative_identity() {
  return f_function::make(
             "neg_identity", f_kind::anti_monotone, 0.0, -1.0, nullptr, {},
             false, [](double x) { return -x; },
             [](double, double) -> double {
               throw not_regular("the empty measure dominates nothing");
             })
      .tag_power(1.0, true);
}

inline double c_bound(const f_function& f, double s_lo, double t_hi) {
  return f.c_bound(s_lo, t_hi);
}

}  // namespace qfd
