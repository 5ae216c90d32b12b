#pragma once

// Integrands supported in [0,1]^d with known integrals, their declared
// mixed-smoothness classes, and the predicted worst-case rates for those
// classes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/config.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "frolov/eft.hpp"
#include "frolov/errors.hpp"

#if defined(FROLOV_FLOAT128) && defined(BOOST_HAS_FLOAT128)
#include <boost/multiprecision/float128.hpp>
#endif

namespace frolov {

/// Scalar for one-dimensional reference quadratures.
#if defined(FROLOV_FLOAT128) && defined(BOOST_HAS_FLOAT128)
using quadrature_real = boost::multiprecision::float128;
inline extended_real to_extended(quadrature_real x) { return x.backend().value(); }
#else
using quadrature_real = long double;
inline extended_real to_extended(quadrature_real x) { return static_cast<extended_real>(x); }
#endif

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class smoothness_scale { besov, triebel_lizorkin };

inline std::string_view to_string(smoothness_scale s) { return s == smoothness_scale::besov ? "B" : "F"; }

inline smoothness_scale parse_scale(std::string_view s) {
  if (s == "B" || s == "b") return smoothness_scale::besov;
  if (s == "F" || s == "f") return smoothness_scale::triebel_lizorkin;
  throw domain_error("unknown smoothness scale '" + std::string(s) + "' (expected B|F)");
}

/// Parameters (s, p, theta) of B^s_{p,theta} or F^s_{p,theta}; p and theta may be infinite.
struct smoothness_class {
  double s = 0;
  double p = 1;
  double theta = infinity;
  smoothness_scale scale = smoothness_scale::besov;

  double inv_p() const { return 1.0 / p; }
  double inv_theta() const { return 1.0 / theta; }
  /// max{0, 1/p - 1}
  double sigma_p() const { return std::max(0.0, 1.0 / p - 1.0); }

  void validate() const {
    if (!(p > 0) || !(theta > 0) || !std::isfinite(s))
      throw domain_error("smoothness class needs finite s and p, theta in (0, inf]");
  }

  friend bool operator==(smoothness_class const&, smoothness_class const&) = default;
};

enum class rate_regime {
  standard,
  small_smoothness,
  /// small smoothness at s = 1/theta: an extra (log log n)^{1-s} factor
  small_smoothness_limiting,
  /// p < 1: the main rate drops to s - 1/p + 1
  quasi_banach,
  /// s = 1/p with the embedding into continuous functions
  limiting,
};

inline std::string_view to_string(rate_regime r) {
  switch (r) {
    case rate_regime::standard: return "standard";
    case rate_regime::small_smoothness: return "small-smoothness";
    case rate_regime::small_smoothness_limiting: return "small-smoothness-limiting";
    case rate_regime::quasi_banach: return "quasi-banach";
    case rate_regime::limiting: return "limiting";
  }
  return "?";
}

/// Worst-case error shape n^{-main_rate} (log n)^{log_exponent} (log log n)^{loglog_exponent}.
struct rate_prediction {
  double main_rate = 0;
  double log_exponent = 0;
  double loglog_exponent = 0;
  rate_regime regime = rate_regime::standard;
  /// true for two-sided (asymptotically sharp) results, false for upper bounds only
  bool sharp = true;

  friend bool operator==(rate_prediction const&, rate_prediction const&) = default;
};

/// Predicted worst-case error order of the Frolov rule on functions of the
/// class supported in the unit cube.
inline rate_prediction predict_rate(smoothness_class c, std::size_t d) {
  c.validate();
  if (d < 1) throw domain_error("dimension must be >= 1");
  // B^s_{p,p} = F^s_{p,p}
  if (c.scale == smoothness_scale::triebel_lizorkin && c.p == c.theta) c.scale = smoothness_scale::besov;

  double const dm1 = static_cast<double>(d) - 1.0;
  double const s = c.s;
  double const ip = c.inv_p();
  double const it = c.inv_theta();
  auto const positive = [](double x) { return std::max(0.0, x); };

  if (c.scale == smoothness_scale::besov) {
    if (s > ip) {
      if (c.p >= 1 && c.theta >= 1) return {s, dm1 * (1 - it), 0, rate_regime::standard, true};
      if (c.p >= 1) return {s, 0, 0, rate_regime::standard, true};
      return {s - ip + 1, dm1 * positive(1 - it), 0, rate_regime::quasi_banach, true};
    }
    if (s == ip && c.theta <= 1) return {1.0 / std::max(c.p, 1.0), 0, 0, rate_regime::limiting, true};
    throw unsupported_class("B-scale class (s=" + std::to_string(s) + ", p=" + std::to_string(c.p) + ", theta=" +
                            std::to_string(c.theta) +
                            ") is not covered; nearest covered regimes: s > 1/p (any p, theta), or s = 1/p with "
                            "theta <= 1");
  }

  if (!std::isfinite(c.p)) throw unsupported_class("F-scale class needs p < infinity");
  if (s > ip) {
    if (c.p >= 1 && c.theta >= 1) {
      if (s > it) return {s, dm1 * (1 - it), 0, rate_regime::standard, true};
      if (s < it) return {s, dm1 * (1 - s), 0, rate_regime::small_smoothness, false};
      return {s, dm1 * (1 - s), 1 - s, rate_regime::small_smoothness_limiting, false};
    }
    if (c.p >= 1) {
      if (s >= 1) return {s, 0, 0, rate_regime::standard, true};
      return {s, dm1 * (1 - s), 0, rate_regime::small_smoothness, false};
    }
    return {s - ip + 1, 0, 0, rate_regime::quasi_banach, true};
  }
  if (s == ip && c.p < 1) return {1, 0, 0, rate_regime::limiting, true};
  throw unsupported_class("F-scale class (s=" + std::to_string(s) + ", p=" + std::to_string(c.p) + ", theta=" +
                          std::to_string(c.theta) +
                          ") is not covered; nearest covered regimes: s > 1/p with p < infinity, or s = 1/p with "
                          "p < 1");
}

enum class function_structure { tensor_product, atom_sum };

/// An integrand on R^d that vanishes outside [0,1]^d.
struct test_function {
  std::string name;
  std::size_t arity = 0;
  std::function<double(std::span<double const>)> evaluate;
  /// The same function in extended precision (empty if not available).
  std::function<extended_real(std::span<extended_real const>)> evaluate_extended;
  /// Univariate factor for tensor products (empty otherwise).
  std::function<double(double)> factor;
  double reference_integral = 0;
  /// Bound on |reference_integral - exact integral|.
  double reference_error = 0;
  /// reference_integral before rounding to binary64, and its error bound.
  extended_real reference_extended = 0;
  double reference_extended_error = 0;
  std::optional<smoothness_class> declared_class;
  function_structure structure = function_structure::tensor_product;

  double operator()(std::span<double const> x) const { return evaluate(x); }
};

namespace detail {

template <class Real>
bool in_closed_unit_cube(std::span<Real const> x) {
  return std::all_of(x.begin(), x.end(), [](Real v) { return v >= 0 && v <= 1; });
}

template <class Real, class Factor>
Real tensor_product(Factor const& factor, std::span<Real const> x, std::size_t d) {
  if (x.size() != d) throw domain_error("test function called with wrong arity");
  if (!in_closed_unit_cube(x)) return 0;
  Real prod = 1;
  for (Real v : x) prod *= factor(v);
  return prod;
}

inline extended_real extended_pow(extended_real x, std::size_t k) {
  extended_real r = 1;
  for (std::size_t i = 0; i < k; ++i) r *= x;
  return r;
}

/// factor must be callable with double and with extended_real.
template <class Factor>
test_function tensor_function(std::string name, std::size_t d, Factor factor, extended_real integral_1d,
                              double error_1d) {
  if (d < 1) throw domain_error("dimension must be >= 1");
  test_function f;
  f.name = std::move(name);
  f.arity = d;
  f.factor = [factor](double t) { return factor(t); };
  f.evaluate = [factor, d](std::span<double const> x) { return tensor_product<double>(factor, x, d); };
  f.evaluate_extended = [factor, d](std::span<extended_real const> x) {
    return tensor_product<extended_real>(factor, x, d);
  };
  f.reference_extended = extended_pow(integral_1d, d);
  double const i1 = static_cast<double>(integral_1d);
  double const dd = static_cast<double>(d);
  double const propagated = dd * std::pow(std::fabs(i1) + error_1d, dd - 1) * error_1d;
  f.reference_extended_error = propagated;
  f.reference_integral = static_cast<double>(f.reference_extended);
  f.reference_error = propagated + unit_roundoff * std::fabs(f.reference_integral);
  return f;
}

}  // namespace detail

/// exp(4 - 1/(t(1-t))) on (0,1), zero elsewhere; peak value 1 at t = 1/2.
inline double bump_profile(double t) {
  if (!(t > 0.0 && t < 1.0)) return 0.0;
  return std::exp(4.0 - 1.0 / (t * (1.0 - t)));
}

inline extended_real bump_profile(extended_real t) {
  if (!(t > 0 && t < 1)) return 0;
  return extended_exp(4 - 1 / (t * (1 - t)));
}

struct quadrature_value {
  extended_real value;
  /// max of the Gauss-Kronrod error estimate and the distance to a tanh-sinh value
  double error;
};

/// Integral of the bump profile over [0,1], by adaptive Gauss-Kronrod
/// (61 points) cross-checked against tanh-sinh.
inline quadrature_value bump_profile_integral() {
  static quadrature_value const cached = [] {
    auto const g = [](quadrature_real t) -> quadrature_real {
      if (!(t > 0 && t < 1)) return 0;
      using std::exp;
      return exp(4 - 1 / (t * (1 - t)));
    };
    quadrature_real const tol = std::numeric_limits<quadrature_real>::epsilon() * 1000;
    quadrature_real gk_err = 0;
    quadrature_real const gk = boost::math::quadrature::gauss_kronrod<quadrature_real, 61>::integrate(
        g, quadrature_real(0), quadrature_real(1), 30, tol, &gk_err);
    boost::math::quadrature::tanh_sinh<quadrature_real> ts;
    quadrature_real const th = ts.integrate(g, quadrature_real(0), quadrature_real(1), tol);
    using std::fabs;
    quadrature_real const gap = fabs(gk - th);
    double const err = static_cast<double>(gk_err > gap ? gk_err : gap);
    return quadrature_value{to_extended(gk), std::max(err, 1e-300)};
  }();
  return cached;
}

inline test_function make_bump(std::size_t d) {
  auto const q = bump_profile_integral();
  return detail::tensor_function("bump", d, [](auto t) { return bump_profile(t); }, q.value, q.error);
}

/// min(t, 1 - t) on [0,1].
template <class Real>
Real hat_profile(Real t) {
  if (!(t >= 0 && t <= 1)) return 0;
  return std::min<Real>(t, 1 - t);
}

inline test_function make_hat(std::size_t d) {
  auto f = detail::tensor_function("hat", d, [](auto t) { return hat_profile(t); }, extended_ratio(1, 4), 0.0);
  f.declared_class = smoothness_class{2, 1, infinity, smoothness_scale::besov};
  return f;
}

/// Cardinal B-spline of order k (degree k - 1), supported on [0, k].
template <class Real>
Real cardinal_bspline(int k, Real x) {
  if (k < 1) throw domain_error("B-spline order must be >= 1");
  if (!(x >= 0 && x < k)) return 0;
  // Cox-de Boor on integer knots: values[i] = N_j(x - i) for the few
  // shifts that can be nonzero at this x.
  int const cell = static_cast<int>(static_cast<double>(x));
  std::vector<Real> values(static_cast<std::size_t>(k), Real(0));
  values[static_cast<std::size_t>(cell)] = 1;  // N_1(x - i) = [i <= x < i + 1]
  for (int j = 2; j <= k; ++j) {
    for (int i = 0; i + j <= k; ++i) {
      Real const t = x - i;
      Real const left = values[static_cast<std::size_t>(i)];
      Real const right = i + 1 < k ? values[static_cast<std::size_t>(i + 1)] : Real(0);
      values[static_cast<std::size_t>(i)] = (t * left + (j - t) * right) / (j - 1);
    }
  }
  return values[0];
}

/// t -> N_k(k t) on [0,1]: unit-mass B-spline squeezed onto the unit interval.
inline test_function make_spline_kink(std::size_t d, int k) {
  if (k < 2) throw domain_error("spline order must be >= 2, got " + std::to_string(k));
  auto factor = [k](auto t) -> decltype(t) {
    using Real = decltype(t);
    if (!(t >= 0 && t <= 1)) return Real(0);
    return cardinal_bspline<Real>(k, k * t);
  };
  auto f = detail::tensor_function("spline:k=" + std::to_string(k), d, factor, extended_ratio(1, k), 0.0);
  f.declared_class = smoothness_class{static_cast<double>(k), 1, infinity, smoothness_scale::besov};
  return f;
}

inline test_function make_zero(std::size_t d) {
  return detail::tensor_function("zero", d, [](auto t) { return decltype(t)(0); }, 0, 0.0);
}

/// Names accepted by make_function.
inline std::vector<std::string> list_functions() {
  return {"hat", "bump", "spline:k=K", "zero"};
}

/// Builds a function from "hat", "bump", "zero" or "spline:k=K".
inline test_function make_function(std::string_view spec, std::size_t d) {
  if (spec == "hat") return make_hat(d);
  if (spec == "bump") return make_bump(d);
  if (spec == "zero") return make_zero(d);
  constexpr std::string_view spline_prefix = "spline:k=";
  if (spec.starts_with(spline_prefix)) {
    auto const digits = spec.substr(spline_prefix.size());
    int k = 0;
    if (digits.empty() || digits.size() > 3 ||
        !std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
      throw domain_error("malformed spline order in '" + std::string(spec) + "'");
    for (char ch : digits) k = 10 * k + (ch - '0');
    return make_spline_kink(d, k);
  }
  throw domain_error("unknown function '" + std::string(spec) + "' (try hat, bump, spline:k=3)");
}

}  // namespace frolov
