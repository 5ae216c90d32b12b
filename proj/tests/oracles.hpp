#pragma once

// Independent reference computations used only by the tests.  None of
// these call the routine they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "frolov/frolov.hpp"

namespace oracle {

/// Coefficients (c_0 first) of prod_{j=1..d}(t - (2j - 1)) - 1 via
/// elementary symmetric polynomials summed over all subsets of the roots.
inline std::vector<__int128> standard_polynomial(std::size_t d) {
  std::vector<__int128> e(d + 1, 0);  // e[k] = k-th elementary symmetric polynomial
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    __int128 prod = 1;
    int bits = 0;
    for (std::size_t j = 0; j < d; ++j)
      if (mask >> j & 1) {
        prod *= static_cast<__int128>(2 * j + 1);
        ++bits;
      }
    e[static_cast<std::size_t>(bits)] += prod;
  }
  std::vector<__int128> c(d + 1, 0);
  for (std::size_t k = 0; k <= d; ++k) {
    // coefficient of t^k is (-1)^(d-k) e_{d-k}
    __int128 const v = e[d - k];
    c[k] = ((d - k) % 2 == 0) ? v : -v;
  }
  c[0] -= 1;
  return c;
}

inline __int128 binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  __int128 r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// 2 T_d(t/2) from the explicit sum d/(d-k) C(d-k, k) (-1)^k t^(d-2k).
inline std::vector<__int128> chebyshev_polynomial(int d) {
  std::vector<__int128> c(static_cast<std::size_t>(d) + 1, 0);
  for (int k = 0; 2 * k <= d; ++k) {
    __int128 const mag = binomial(d - k, k) * d / (d - k);
    c[static_cast<std::size_t>(d - 2 * k)] = (k % 2 == 0) ? mag : -mag;
  }
  return c;
}

inline double eigen_determinant(frolov::square_matrix<double> const& m) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m.dim()), static_cast<Eigen::Index>(m.dim()));
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return a.partialPivLu().determinant();
}

/// Every l in the integer bounding box of primal_basis^{-1}[0,1]^d whose
/// image lies in [0,1)^d.  No interval tightening, no reduction.
inline std::set<std::vector<std::int64_t>> brute_force_points(frolov::frolov_lattice const& lat) {
  std::size_t const d = lat.dim;
  // primal_basis^{-1} = dual_basis^T
  std::vector<std::int64_t> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    double mn = 0, mx = 0;
    for (std::size_t j = 0; j < d; ++j) {
      double const v = lat.dual_basis(j, i);
      (v < 0 ? mn : mx) += v;
    }
    lo[i] = static_cast<std::int64_t>(std::floor(mn)) - 1;
    hi[i] = static_cast<std::int64_t>(std::ceil(mx)) + 1;
  }
  std::set<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> l = lo;
  std::vector<double> x(d);
  while (true) {
    frolov::primal_image(lat, l, x);
    if (std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0 && v < 1.0; })) out.insert(l);
    std::size_t i = 0;
    while (i < d && l[i] == hi[i]) {
      l[i] = lo[i];
      ++i;
    }
    if (i == d) break;
    ++l[i];
  }
  return out;
}

/// Every nonzero k with |(B k)_j| <= radius, by scanning the bounding box of
/// the preimage of the cube.  Calls visit(z).
template <class Visit>
void brute_force_dual(frolov::frolov_lattice const& lat, double radius, Visit&& visit) {
  std::size_t const d = lat.dim;
  // k = B^{-1} z = T^T z
  std::vector<std::int64_t> bound(d);
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) s += std::fabs(lat.primal_basis(j, i));
    bound[i] = static_cast<std::int64_t>(std::ceil(s * radius)) + 1;
  }
  std::vector<std::int64_t> k(d);
  for (std::size_t i = 0; i < d; ++i) k[i] = -bound[i];
  std::vector<double> z(d);
  while (true) {
    if (!std::all_of(k.begin(), k.end(), [](std::int64_t v) { return v == 0; })) {
      frolov::dual_image(lat, k, z);
      if (std::all_of(z.begin(), z.end(), [&](double v) { return std::fabs(v) <= radius; })) visit(z);
    }
    std::size_t i = 0;
    while (i < d && k[i] == bound[i]) {
      k[i] = -bound[i];
      ++i;
    }
    if (i == d) break;
    ++k[i];
  }
}

/// Cardinal B-spline of order k from the truncated-power formula
/// N_k(x) = 1/(k-1)! sum_i (-1)^i C(k, i) (x - i)_+^(k-1).
inline long double truncated_power_bspline(int k, long double x) {
  if (x < 0 || x >= k) return 0;
  long double sum = 0;
  long double fact = 1;
  for (int i = 2; i < k; ++i) fact *= i;
  for (int i = 0; i <= k; ++i) {
    long double const t = x - i;
    if (t < 0) continue;  // right-continuous: (0)_+^0 = 1
    long double const term = static_cast<long double>(binomial(k, i)) * std::pow(t, static_cast<long double>(k - 1));
    sum += (i % 2 == 0) ? term : -term;
  }
  return sum / fact;
}

/// Q_n(hat) - 1/4^d from the Poisson summation formula on the dual
/// lattice, truncated to ||z||_inf <= radius.  The 1-D transform of
/// min(t, 1 - t) on [0,1] is e^{-i pi xi} (1/4) sinc^2(xi / 2).
inline double hat_error_poisson(frolov::frolov_lattice const& lat, double radius) {
  long double sum = 0;
  brute_force_dual(lat, radius, [&](std::vector<double> const& z) {
    long double amp = 1, phase = 0;
    for (double zj : z) {
      long double const u = std::numbers::pi_v<long double> * zj / 2;
      long double const sinc = u == 0 ? 1 : std::sin(u) / u;
      amp *= sinc * sinc / 4;
      phase += zj;
    }
    sum += amp * std::cos(std::numbers::pi_v<long double> * phase);
  });
  return static_cast<double>(sum);
}

/// Integral of exp(4 - 1/(t(1-t))) over [0,1], 38 digits (mpmath quad at 50 digits).
inline constexpr long double bump_integral = 0.38381726399583431051246447706750632144L;

}  // namespace oracle
