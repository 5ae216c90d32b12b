#pragma once

// Error-free transformations and the compensated kernels built on them:
// Neumaier summation, Dot2, compensated products and compensated Horner
// evaluation with a running a posteriori error bound.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#if defined(__SIZEOF_FLOAT128__) && !defined(FROLOV_NO_FLOAT128)
#define FROLOV_FLOAT128 1
#include <quadmath.h>
#endif

namespace frolov {

/// Wider-than-binary64 scalar used where cancellation cannot be avoided
/// (dual lattice images far out in elongated shells, error sums).
#ifdef FROLOV_FLOAT128
using extended_real = __float128;
#else
using extended_real = long double;
#endif

#ifdef FROLOV_FLOAT128
inline extended_real extended_exp(extended_real x) { return expq(x); }
inline extended_real extended_pow(extended_real x, extended_real y) { return powq(x, y); }
#else
inline extended_real extended_exp(extended_real x) { return std::exp(x); }
inline extended_real extended_pow(extended_real x, extended_real y) { return std::pow(x, y); }
#endif

/// Nearest extended_real to the rational a / b.
inline extended_real extended_ratio(std::int64_t a, std::int64_t b) {
  return static_cast<extended_real>(a) / static_cast<extended_real>(b);
}

inline constexpr double unit_roundoff = std::numeric_limits<double>::epsilon() / 2;
#ifdef FROLOV_FLOAT128
inline constexpr double extended_unit_roundoff = 0x1p-113;
#else
inline constexpr double extended_unit_roundoff = std::numeric_limits<long double>::epsilon() / 2;
#endif

struct sum_with_error {
  double value;
  double error;
};

/// a + b = value + error exactly (Knuth).
constexpr sum_with_error two_sum(double a, double b) noexcept {
  double const s = a + b;
  double const bb = s - a;
  double const e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

/// a * b = value + error exactly, via fused multiply-add.
inline sum_with_error two_prod(double a, double b) noexcept {
  double const p = a * b;
  return {p, std::fma(a, b, -p)};
}

/// Neumaier's variant of Kahan summation; robust when an addend exceeds
/// the running sum in magnitude.
class compensated_sum {
 public:
  constexpr compensated_sum() = default;
  constexpr explicit compensated_sum(double initial) : sum_(initial) {}

  constexpr compensated_sum& operator+=(double x) noexcept {
    auto const [s, e] = two_sum(sum_, x);
    sum_ = s;
    compensation_ += e;
    return *this;
  }

  constexpr compensated_sum& operator+=(compensated_sum const& other) noexcept {
    *this += other.sum_;
    compensation_ += other.compensation_;
    return *this;
  }

  constexpr double value() const noexcept { return sum_ + compensation_; }
  constexpr double head() const noexcept { return sum_; }
  constexpr double tail() const noexcept { return compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Dot product of a real row with an integer vector, as if computed in
/// twice the working precision (Ogita, Rump, Oishi).  Integer entries must
/// be exactly representable in binary64.
inline double dot2(std::span<double const> row, std::span<std::int64_t const> v) noexcept {
  double s = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    auto const [p, pe] = two_prod(row[i], static_cast<double>(v[i]));
    auto const [t, te] = two_sum(s, p);
    s = t;
    c += pe + te;
  }
  return s + c;
}

/// Product of the magnitudes with the rounding error of every partial
/// product tracked and folded back in at the end.
inline double compensated_abs_product(std::span<double const> xs) noexcept {
  if (xs.empty()) return 1.0;
  double p = std::fabs(xs[0]);
  double e = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    double const a = std::fabs(xs[i]);
    auto const [q, qe] = two_prod(p, a);
    e = std::fma(e, a, qe);
    p = q;
  }
  return p + e;
}

struct horner_result {
  double value;
  /// Rigorous bound on |value - p(x)| (Graillat, Langlois, Louvet).
  double error_bound;
  /// Derivative by plain Horner; only used as a Newton step.
  double derivative;
};

/// Compensated Horner evaluation of sum_k coeffs[k] x^k.  Coefficients must
/// be exact binary64 values.
inline horner_result compensated_horner(std::span<double const> coeffs, double x) noexcept {
  std::size_t const n = coeffs.size();
  if (n == 0) return {0.0, 0.0, 0.0};
  double s = coeffs[n - 1];
  double r = 0.0;
  double bound = 0.0;
  double deriv = 0.0;
  double const ax = std::fabs(x);
  for (std::size_t i = n - 1; i-- > 0;) {
    deriv = deriv * x + (s + r);
    auto const [p, pe] = two_prod(s, x);
    auto const [t, te] = two_sum(p, coeffs[i]);
    s = t;
    r = r * x + (pe + te);
    bound = bound * ax + (std::fabs(pe) + std::fabs(te));
  }
  double const res = s + r;
  double const u = unit_roundoff;
  double const k = 4.0 * static_cast<double>(n) + 2.0;
  double const gamma = k * u / (1.0 - k * u);
  double const err = (u * std::fabs(res) + (gamma * bound + 2.0 * u * u * std::fabs(res))) / (1.0 - 2.0 * u);
  return {res, err * (1.0 + 4.0 * u), deriv};
}

template <class Real>
Real horner(std::span<double const> coeffs, Real x) {
  Real acc = 0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + Real(coeffs[i]);
  return acc;
}

template <class Real>
Real horner_derivative(std::span<double const> coeffs, Real x) {
  Real acc = 0;
  for (std::size_t i = coeffs.size(); i-- > 1;) acc = acc * x + Real(coeffs[i]) * Real(static_cast<double>(i));
  return acc;
}

template <class Real>
constexpr Real abs_value(Real x) noexcept {
  return x < Real(0) ? -x : x;
}

}  // namespace frolov
