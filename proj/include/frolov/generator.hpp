#pragma once

// Generator polynomials with certified real roots, and the scaled
// Vandermonde lattice built from them.
//
// The lattice nodes are the images primal_basis * l, l in Z^d, where
// primal_basis = (n det V)^{-1/d} V and V(i, j) = root_i^j.  The dual
// lattice is generated by dual_basis = primal_basis^{-T}.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "frolov/eft.hpp"
#include "frolov/errors.hpp"
#include "frolov/matrix.hpp"

namespace frolov {

enum class generator_kind {
  standard,   ///< prod_{j=1}^d (t - 2j + 1) - 1
  chebyshev,  ///< 2 cos(d arccos(t/2)), d a power of two
  /// Caller-supplied roots.  Carries no admissibility guarantee; exists only
  /// for side-by-side comparisons in the dual analysis.
  unsafe_custom,
};

inline std::string_view to_string(generator_kind kind) {
  switch (kind) {
    case generator_kind::standard: return "standard";
    case generator_kind::chebyshev: return "chebyshev";
    case generator_kind::unsafe_custom: return "unsafe_custom";
  }
  return "?";
}

inline generator_kind parse_generator_kind(std::string_view s) {
  if (s == "standard") return generator_kind::standard;
  if (s == "chebyshev") return generator_kind::chebyshev;
  throw domain_error("unknown generator kind '" + std::string(s) + "' (expected standard|chebyshev)");
}

/// Largest dimension whose standard generator has binary64-exact coefficients.
inline constexpr std::size_t max_standard_dimension = 12;
inline constexpr std::size_t max_chebyshev_dimension = 32;

/// Closed-form root convention used for the Chebyshev-type generator.
inline constexpr std::string_view chebyshev_root_convention =
    "xi_i = 2 cos(pi (2i - 1) / 2^(l+1)), i = 1..d, d = 2^l";

struct generator_spec {
  std::size_t dimension = 1;
  generator_kind kind = generator_kind::standard;
  std::vector<double> custom_roots;

  static generator_spec unsafe_custom(std::vector<double> roots) {
    return {roots.size(), generator_kind::unsafe_custom, std::move(roots)};
  }

  void validate() const {
    if (dimension < 1) throw domain_error("generator dimension must be >= 1");
    switch (kind) {
      case generator_kind::standard:
        if (dimension > max_standard_dimension)
          throw domain_error("standard generator supports d <= " + std::to_string(max_standard_dimension));
        break;
      case generator_kind::chebyshev:
        if (!std::has_single_bit(dimension))
          throw domain_error("chebyshev generator requires d to be a power of two, got d=" + std::to_string(dimension));
        if (dimension > max_chebyshev_dimension)
          throw domain_error("chebyshev generator supports d <= " + std::to_string(max_chebyshev_dimension));
        break;
      case generator_kind::unsafe_custom:
        if (custom_roots.size() != dimension) throw domain_error("custom root count must equal the dimension");
        break;
    }
  }
};

/// A real root together with a bracketing interval on which the polynomial
/// changes sign (or collapses to an exact root).
struct certified_root {
  double value = 0;
  double lower = 0;
  double upper = 0;
  /// |P(value)| by compensated Horner.
  double residual = 0;
  /// Rigorous bound on |P(value)|.
  double residual_bound = 0;
  /// residual / sum_k |c_k| |value|^k: the relative backward error.
  double scaled_residual = 0;
};

class generator_polynomial {
 public:
  generator_spec const& spec() const noexcept { return spec_; }
  std::size_t degree() const noexcept { return spec_.dimension; }
  generator_kind kind() const noexcept { return spec_.kind; }

  /// c_0 ... c_d, monic.  Empty for unsafe_custom.
  std::vector<std::int64_t> const& coefficients() const noexcept { return coefficients_; }
  std::vector<certified_root> const& roots() const noexcept { return roots_; }
  std::vector<double> root_values() const {
    std::vector<double> v;
    for (auto const& r : roots_) v.push_back(r.value);
    return v;
  }
  /// Roots refined past binary64 by Newton steps on the exact polynomial.
  std::vector<extended_real> const& extended_roots() const noexcept { return extended_roots_; }
  /// Lower bound on min_{i != j} |root_i - root_j|.
  double root_separation() const noexcept { return root_separation_; }
  /// False only for unsafe_custom.
  bool admissible() const noexcept { return spec_.kind != generator_kind::unsafe_custom; }

 private:
  friend generator_polynomial build_polynomial(generator_spec const& spec);

  generator_spec spec_;
  std::vector<std::int64_t> coefficients_;
  std::vector<certified_root> roots_;
  std::vector<extended_real> extended_roots_;
  double root_separation_ = 0;
};

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw domain_error("generator coefficient overflow");
  return r;
}

inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw domain_error("generator coefficient overflow");
  return r;
}

/// Multiply p(t) by (t - a).
inline std::vector<std::int64_t> times_linear(std::vector<std::int64_t> const& p, std::int64_t a) {
  std::vector<std::int64_t> out(p.size() + 1, 0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k + 1] += p[k];
    out[k] = checked_sub(out[k], checked_mul(a, p[k]));
  }
  return out;
}

inline std::vector<std::int64_t> standard_coefficients(std::size_t d) {
  std::vector<std::int64_t> p{1};
  for (std::size_t j = 1; j <= d; ++j) p = times_linear(p, static_cast<std::int64_t>(2 * j - 1));
  p[0] -= 1;
  return p;
}

/// 2 T_d(t/2) via C_0 = 2, C_1 = t, C_{k+1} = t C_k - C_{k-1}.
inline std::vector<std::int64_t> chebyshev_coefficients(std::size_t d) {
  std::vector<std::int64_t> prev{2};
  std::vector<std::int64_t> cur{0, 1};
  if (d == 0) return prev;
  for (std::size_t k = 1; k < d; ++k) {
    std::vector<std::int64_t> next(cur.size() + 1, 0);
    for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
    for (std::size_t i = 0; i < prev.size(); ++i) next[i] = checked_sub(next[i], prev[i]);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// Exact sign of 2^d P(h / 2) for integer h.
inline int sign_at_half_integer(std::vector<std::int64_t> const& c, std::int64_t h) {
  __int128 acc = 0;
  std::size_t const d = c.size() - 1;
  for (std::size_t k = c.size(); k-- > 0;) {
    __int128 const term = static_cast<__int128>(c[k]) * (static_cast<__int128>(1) << (d - k));
    acc = acc * h + term;
  }
  return (acc > 0) - (acc < 0);
}

/// Certified sign by compensated Horner; 0 when the error bound straddles zero.
inline int certified_sign(std::span<double const> c, double t) {
  auto const r = compensated_horner(c, t);
  if (r.value > r.error_bound) return 1;
  if (r.value < -r.error_bound) return -1;
  return 0;
}

inline double newton_polish(std::span<double const> c, double x, double lo, double hi) {
  for (int it = 0; it < 8; ++it) {
    auto const r = compensated_horner(c, x);
    if (r.value == 0 || r.derivative == 0) break;
    double const next = x - r.value / r.derivative;
    if (!(next >= lo && next <= hi) || next == x) break;
    x = next;
  }
  return x;
}

inline certified_root finish_root(std::span<double const> c, double x, double lo, double hi) {
  certified_root root;
  root.value = x;
  root.lower = lo;
  root.upper = hi;
  auto const r = compensated_horner(c, x);
  root.residual = std::fabs(r.value);
  root.residual_bound = std::fabs(r.value) + r.error_bound;
  double magnitude = 0;
  for (std::size_t k = c.size(); k-- > 0;) magnitude = magnitude * std::fabs(x) + std::fabs(c[k]);
  root.scaled_residual = magnitude > 0 ? root.residual / magnitude : 0.0;
  return root;
}

/// Bisect a bracket with exactly known endpoint signs down to adjacent doubles.
inline certified_root bisect_bracket(std::span<double const> c, double lo, double hi, int sign_lo) {
  for (int it = 0; it < 200; ++it) {
    double const mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    int const s = certified_sign(c, mid);
    if (s == 0) {
      auto const r = compensated_horner(c, mid);
      if (r.value == 0 && r.error_bound == 0) return finish_root(c, mid, mid, mid);
      break;
    }
    if (s == sign_lo) lo = mid;
    else hi = mid;
  }
  double const x = newton_polish(c, lo + (hi - lo) / 2, lo, hi);
  return finish_root(c, x, lo, hi);
}

/// Grow a bracket around an approximate root until both ends carry opposite
/// certified signs.
inline certified_root bracket_around(std::span<double const> c, double x) {
  auto const r0 = compensated_horner(c, x);
  if (r0.value == 0 && r0.error_bound == 0) return finish_root(c, x, x, x);
  double step = std::max(std::fabs(x), 1.0) * unit_roundoff;
  for (int it = 0; it < 60; ++it, step *= 2) {
    double const lo = x - step;
    double const hi = x + step;
    int const sl = certified_sign(c, lo);
    int const sh = certified_sign(c, hi);
    if (sl != 0 && sh != 0 && sl != sh) return bisect_bracket(c, lo, hi, sl);
  }
  throw certification_failure("could not bracket root near " + std::to_string(x));
}

template <class Real>
Real newton_extended(std::span<double const> c, double start) {
  Real x = start;
  for (int it = 0; it < 4; ++it) {
    Real const d = horner_derivative<Real>(c, x);
    if (d == Real(0)) break;
    x -= horner<Real>(c, x) / d;
  }
  return x;
}

}  // namespace detail

/// Expands the generator polynomial exactly and certifies its d real roots.
inline generator_polynomial build_polynomial(generator_spec const& spec) {
  spec.validate();
  generator_polynomial poly;
  poly.spec_ = spec;
  std::size_t const d = spec.dimension;

  if (spec.kind == generator_kind::unsafe_custom) {
    auto sorted = spec.custom_roots;
    std::sort(sorted.begin(), sorted.end());
    for (double r : sorted) {
      if (!std::isfinite(r)) throw domain_error("custom roots must be finite");
      poly.roots_.push_back({r, r, r, 0.0, 0.0});
      poly.extended_roots_.push_back(extended_real(r));
    }
  } else {
    poly.coefficients_ = spec.kind == generator_kind::standard ? detail::standard_coefficients(d)
                                                               : detail::chebyshev_coefficients(d);
    std::vector<double> c;
    for (auto v : poly.coefficients_) {
      if (std::abs(v) > (std::int64_t{1} << 53)) throw domain_error("generator coefficient not exact in binary64");
      c.push_back(static_cast<double>(v));
    }

    if (spec.kind == generator_kind::standard) {
      // P(2j - 1) = -1, so each root sits within a unit of an odd integer;
      // a half-integer grid over [-1, 2d + 1] separates them.
      auto const h_hi = static_cast<std::int64_t>(4 * d + 2);
      int prev_sign = 0;
      std::int64_t prev_h = 0;
      for (std::int64_t h = -2; h <= h_hi; ++h) {
        int const s = detail::sign_at_half_integer(poly.coefficients_, h);
        double const t = static_cast<double>(h) / 2;
        if (s == 0) {
          poly.roots_.push_back(detail::finish_root(c, t, t, t));
        } else if (prev_sign != 0 && s != prev_sign) {
          poly.roots_.push_back(detail::bisect_bracket(c, static_cast<double>(prev_h) / 2, t, prev_sign));
        }
        prev_sign = s;
        prev_h = h;
      }
    } else {
      std::size_t const ell = static_cast<std::size_t>(std::countr_zero(d));
      double const denom = std::ldexp(1.0, static_cast<int>(ell) + 1);
      std::vector<double> approx;
      for (std::size_t i = 1; i <= d; ++i)
        approx.push_back(2 * std::cos(std::numbers::pi * static_cast<double>(2 * i - 1) / denom));
      std::sort(approx.begin(), approx.end());
      for (double x : approx) {
        double const polished = detail::newton_polish(c, x, x - 0.5, x + 0.5);
        poly.roots_.push_back(detail::bracket_around(c, polished));
      }
    }

    if (poly.roots_.size() != d)
      throw certification_failure("isolated " + std::to_string(poly.roots_.size()) + " roots, expected " +
                                  std::to_string(d));
    for (auto const& r : poly.roots_) {
      if (r.scaled_residual > 1e-14)
        throw certification_failure("root " + std::to_string(r.value) + " residual above tolerance");
      if (r.upper - r.lower > 1e-13) throw certification_failure("root bracket wider than 1e-13");
      poly.extended_roots_.push_back(detail::newton_extended<extended_real>(c, r.value));
    }
  }

  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < poly.roots_.size(); ++i)
    sep = std::min(sep, poly.roots_[i].lower - poly.roots_[i - 1].upper);
  if (!(sep > 0)) throw certification_failure("roots are not separated");
  poly.root_separation_ = sep;
  return poly;
}

/// Exact integer evaluation of the expanded polynomial.
inline __int128 evaluate_exact(std::vector<std::int64_t> const& coefficients, std::int64_t t) {
  __int128 acc = 0;
  for (std::size_t k = coefficients.size(); k-- > 0;) acc = acc * t + coefficients[k];
  return acc;
}

/// prod_{i<j} (x_j - x_i) with compensated product accumulation.
inline double vandermonde_determinant(std::span<double const> nodes) {
  std::vector<double> diffs;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) diffs.push_back(nodes[j] - nodes[i]);
  double const mag = compensated_abs_product(diffs);
  auto const negatives = std::count_if(diffs.begin(), diffs.end(), [](double v) { return v < 0; });
  return negatives % 2 ? -mag : mag;
}

/// Inverse of V(i, j) = x_i^j from the Lagrange basis: column i of the
/// inverse holds the monomial coefficients of L_i.
template <class Real>
square_matrix<Real> vandermonde_inverse(std::span<Real const> x) {
  std::size_t const d = x.size();
  square_matrix<Real> inv(d);
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<Real> poly{Real(1)};
    Real denom = 1;
    for (std::size_t k = 0; k < d; ++k) {
      if (k == i) continue;
      std::vector<Real> next(poly.size() + 1, Real(0));
      for (std::size_t m = 0; m < poly.size(); ++m) {
        next[m + 1] += poly[m];
        next[m] -= x[k] * poly[m];
      }
      poly = std::move(next);
      denom *= x[i] - x[k];
    }
    for (std::size_t j = 0; j < d; ++j) inv(j, i) = poly[j] / denom;
  }
  return inv;
}

/// Determinant by Gaussian elimination with partial pivoting.
inline double lu_determinant(square_matrix<double> a) {
  std::size_t const d = a.dim();
  double det = 1;
  for (std::size_t k = 0; k < d; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < d; ++i)
      if (std::fabs(a(i, k)) > std::fabs(a(piv, k))) piv = i;
    if (a(piv, k) == 0) return 0;
    if (piv != k) {
      for (std::size_t j = 0; j < d; ++j) std::swap(a(k, j), a(piv, j));
      det = -det;
    }
    det *= a(k, k);
    for (std::size_t i = k + 1; i < d; ++i) {
      double const f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < d; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

/// The scaled Frolov lattice and its dual.  Immutable once assembled.
struct frolov_lattice {
  std::size_t dim = 0;
  /// Real scale; the node count is approximately n.
  double n = 1;
  generator_kind kind = generator_kind::standard;
  std::vector<double> roots;
  /// V(i, j) = roots_i^j.
  square_matrix<double> vandermonde;
  double vandermonde_det = 1;
  /// (n det V)^{-1/d}
  double scale = 1;
  /// Nodes are primal_basis * l.
  square_matrix<double> primal_basis;
  /// primal_basis in extended precision (same scale, extended roots).
  square_matrix<extended_real> primal_basis_extended;
  /// primal_basis^{-T}.
  square_matrix<double> dual_basis;
  /// dual_basis carried in extended precision for far-out dual images.
  square_matrix<extended_real> dual_basis_extended;

  /// n / det V: the admissibility certificate for nonzero dual points.
  double norm_product_bound() const { return n / vandermonde_det; }
};

inline frolov_lattice assemble_lattice(generator_polynomial const& poly, double n) {
  if (!(n >= 1) || !std::isfinite(n)) throw domain_error("lattice scale n must be >= 1, got " + std::to_string(n));
  std::size_t const d = poly.degree();
  frolov_lattice lat;
  lat.dim = d;
  lat.n = n;
  lat.kind = poly.kind();
  lat.roots = poly.root_values();
  lat.vandermonde = square_matrix<double>(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) lat.vandermonde(i, j) = std::pow(lat.roots[i], static_cast<double>(j));
  lat.vandermonde_det = vandermonde_determinant(lat.roots);
  if (!(lat.vandermonde_det > 0)) throw certification_failure("vandermonde determinant is not positive");
  // The scale is formed in extended precision: a binary64 scale alone
  // perturbs det(primal_basis) by ~1e-16 relative, which biases Q_n(f).
  auto const& xr = poly.extended_roots();
  extended_real det_x = 1;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) det_x *= xr[j] - xr[i];
  extended_real const scale_x =
      extended_pow(static_cast<extended_real>(n) * det_x, -1 / static_cast<extended_real>(d));
  lat.scale = static_cast<double>(scale_x);
  lat.primal_basis = square_matrix<double>(d);
  lat.primal_basis_extended = square_matrix<extended_real>(d);
  for (std::size_t i = 0; i < d; ++i) {
    extended_real power = 1;
    for (std::size_t j = 0; j < d; ++j) {
      lat.primal_basis_extended(i, j) = scale_x * power;
      lat.primal_basis(i, j) = static_cast<double>(scale_x * power);
      power *= xr[i];
    }
  }
  auto const inv = vandermonde_inverse<extended_real>(xr);
  lat.dual_basis_extended = square_matrix<extended_real>(d);
  lat.dual_basis = square_matrix<double>(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      lat.dual_basis_extended(i, j) = inv(j, i) / scale_x;
      lat.dual_basis(i, j) = static_cast<double>(lat.dual_basis_extended(i, j));
    }
  return lat;
}

inline frolov_lattice make_lattice(generator_spec const& spec, double n) {
  return assemble_lattice(build_polynomial(spec), n);
}

struct lattice_residuals {
  /// |n det(primal) - 1|, determinant by LU.
  double primal_det = 0;
  /// |det(dual) / n - 1|, determinant by LU.
  double dual_det = 0;
  /// ||primal^T dual - I||_max / ||dual||_max.
  double biorthogonality = 0;
};

inline lattice_residuals check_lattice(frolov_lattice const& lat) {
  lattice_residuals r;
  r.primal_det = std::fabs(lat.n * lu_determinant(lat.primal_basis) - 1);
  r.dual_det = std::fabs(lu_determinant(lat.dual_basis) / lat.n - 1);
  auto const prod = lat.primal_basis.transposed() * lat.dual_basis;
  double dev = 0;
  double bmax = 0;
  for (std::size_t i = 0; i < lat.dim; ++i)
    for (std::size_t j = 0; j < lat.dim; ++j) {
      dev = std::max(dev, std::fabs(prod(i, j) - (i == j ? 1.0 : 0.0)));
      bmax = std::max(bmax, std::fabs(lat.dual_basis(i, j)));
    }
  r.biorthogonality = dev / bmax;
  return r;
}

}  // namespace frolov
