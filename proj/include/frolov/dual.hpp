#pragma once

// Measurements on the dual lattice dual_basis(Z^d): the smallest product of
// coordinate magnitudes over a search box, and counts of dual points in the
// dyadic shells I_m = {z : C1 floor(2^{m_j - 1}) <= |z_j| < C2 2^{m_j}}.
//
// Everything here is a restricted search: reports carry the searched region
// and claim nothing about dual points outside it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frolov/eft.hpp"
#include "frolov/enumeration.hpp"
#include "frolov/errors.hpp"
#include "frolov/generator.hpp"

namespace frolov {

/// Image of an integer vector under the dual basis, accumulated in extended
/// precision and rounded once to binary64.
inline void dual_image(frolov_lattice const& lat, std::span<std::int64_t const> k, std::span<double> z) {
  for (std::size_t i = 0; i < lat.dim; ++i) {
    extended_real acc = 0;
    for (std::size_t j = 0; j < lat.dim; ++j)
      acc += lat.dual_basis_extended(i, j) * static_cast<extended_real>(k[j]);
    z[i] = static_cast<double>(acc);
  }
}

inline bool is_zero(std::span<std::int64_t const> k) {
  return std::all_of(k.begin(), k.end(), [](std::int64_t v) { return v == 0; });
}

struct dyadic_box {
  std::vector<int> m;
  double c1 = 1;
  double c2 = 1;

  void validate() const {
    if (m.empty()) throw domain_error("dyadic box needs at least one level");
    if (!(c1 > 0) || !(c2 >= c1)) throw domain_error("dyadic box needs 0 < C1 <= C2");
    for (int v : m)
      if (v < 0 || v > 60) throw domain_error("dyadic level out of range [0, 60]");
  }

  int level_sum() const {
    int s = 0;
    for (int v : m) s += v;
    return s;
  }

  double lower(std::size_t j) const { return m[j] == 0 ? 0.0 : c1 * std::ldexp(1.0, m[j] - 1); }
  double upper(std::size_t j) const { return c2 * std::ldexp(1.0, m[j]); }

  bool contains(std::span<double const> z) const {
    for (std::size_t j = 0; j < m.size(); ++j) {
      double const a = std::fabs(z[j]);
      if (!(a >= lower(j) && a < upper(j))) return false;
    }
    return true;
  }
};

/// Calls visit(k, z) for every nonzero dual point with |z_j| <= half_width_j.
template <class Visitor>
void for_each_dual_point(frolov_lattice const& lat, std::span<double const> half_width,
                         enumeration_options const& options, Visitor&& visit) {
  std::vector<slab> box;
  for (double w : half_width) box.push_back({-w, w, true});
  auto const inverse = lat.primal_basis.transposed();
  std::vector<double> z(lat.dim);
  enumerate_box_candidates(lat.dual_basis, inverse, box, options, "dual search, " + lattice_context(lat),
                           [&](std::span<std::int64_t const> k) {
                             if (is_zero(k)) return;
                             dual_image(lat, k, z);
                             for (std::size_t i = 0; i < lat.dim; ++i)
                               if (!(std::fabs(z[i]) <= half_width[i])) return;
                             visit(k, std::span<double const>(z));
                           });
}

/// Calls visit(k, z) for every nonzero dual point in the shell I_m.
template <class Visitor>
void for_each_shell_point(frolov_lattice const& lat, dyadic_box const& box, enumeration_options const& options,
                          Visitor&& visit) {
  box.validate();
  if (box.m.size() != lat.dim) throw domain_error("dyadic box dimension does not match the lattice");
  std::vector<double> half_width;
  for (std::size_t j = 0; j < lat.dim; ++j) half_width.push_back(box.upper(j));
  for_each_dual_point(lat, half_width, options, [&](std::span<std::int64_t const> k, std::span<double const> z) {
    if (box.contains(z)) visit(k, z);
  });
}

struct norm_product_result {
  double min = std::numeric_limits<double>::infinity();
  std::vector<double> argmin;
  std::vector<std::int64_t> argmin_preimage;
  double radius = 0;
  std::uint64_t points_searched = 0;

  void offer(std::span<std::int64_t const> k, std::span<double const> z) {
    ++points_searched;
    double const p = compensated_abs_product(z);
    if (p < min) {
      min = p;
      argmin.assign(z.begin(), z.end());
      argmin_preimage.assign(k.begin(), k.end());
    }
  }
};

/// Smallest prod_j |z_j| over nonzero dual points with ||z||_inf <= radius.
/// An upper bound on the lattice-wide infimum.
inline norm_product_result min_norm_product(frolov_lattice const& lat, double radius,
                                            enumeration_options const& options = {}) {
  if (!(radius > 0) || !std::isfinite(radius)) throw domain_error("search radius must be positive and finite");
  norm_product_result r;
  r.radius = radius;
  std::vector<double> const half_width(lat.dim, radius);
  for_each_dual_point(lat, half_width, options, [&](auto k, auto z) { r.offer(k, z); });
  if (r.points_searched == 0)
    throw radius_too_small("no nonzero dual point with ||z||_inf <= " + std::to_string(radius) + " (" +
                           lattice_context(lat) + ")");
  return r;
}

/// Z_n(m): nonzero dual points in the shell I_m.
inline std::uint64_t count_dyadic(frolov_lattice const& lat, dyadic_box const& box,
                                  enumeration_options const& options = {}) {
  std::uint64_t count = 0;
  for_each_shell_point(lat, box, options, [&](auto, auto) { ++count; });
  return count;
}

/// All level vectors m in N_0^d with |m|_1 <= m_max, ordered by |m|_1 and
/// then lexicographically.
inline std::vector<std::vector<int>> levels_up_to(std::size_t d, int m_max) {
  std::vector<std::vector<int>> out;
  std::vector<int> m(d, 0);
  for (int total = 0; total <= m_max; ++total) {
    // compositions of `total` into d nonnegative parts, lexicographically descending first part
    auto rec = [&](auto&& self, std::size_t j, int remaining) -> void {
      if (j + 1 == d) {
        m[j] = remaining;
        out.push_back(m);
        return;
      }
      for (int v = 0; v <= remaining; ++v) {
        m[j] = v;
        self(self, j + 1, remaining - v);
      }
    };
    if (d > 0) rec(rec, 0, total);
  }
  return out;
}

struct shell_count {
  std::vector<int> m;
  std::uint64_t count = 0;
};

struct dual_spectrum_report {
  double n = 0;
  std::size_t dim = 0;
  generator_kind kind = generator_kind::standard;
  double norm_product_bound = 0;  ///< n / det V
  double min_norm_product = 0;
  std::vector<double> argmin_point;
  std::vector<std::int64_t> argmin_preimage;
  double search_radius = 0;
  int m_max = 0;
  double c1 = 1;
  double c2 = 1;
  std::vector<shell_count> z_counts;
  /// Smallest |m|_1 with Z_n(m) > 0 inside the searched range, if any.
  std::optional<int> first_occupied_level;
  /// Z_n(m) = 0 whenever |m|_1 <= log2(n) - fitted_c (over the searched range).
  double fitted_c = 0;
  /// max over nonempty shells of Z_n(m) n / 2^{|m|_1}; 0 if none.
  double max_density_ratio = 0;
};

inline dual_spectrum_report spectrum_report(frolov_lattice const& lat, int m_max, double radius, double c1 = 1,
                                            double c2 = 1, enumeration_options const& options = {}) {
  if (m_max < 0) throw domain_error("m_max must be >= 0");
  dual_spectrum_report rep;
  rep.n = lat.n;
  rep.dim = lat.dim;
  rep.kind = lat.kind;
  rep.norm_product_bound = lat.norm_product_bound();
  rep.search_radius = radius;
  rep.m_max = m_max;
  rep.c1 = c1;
  rep.c2 = c2;

  norm_product_result best = min_norm_product(lat, radius, options);
  for (auto& m : levels_up_to(lat.dim, m_max)) {
    dyadic_box const box{m, c1, c2};
    std::uint64_t count = 0;
    for_each_shell_point(lat, box, options, [&](auto k, auto z) {
      ++count;
      best.offer(k, z);
    });
    int const level = box.level_sum();
    if (count > 0) {
      if (!rep.first_occupied_level || level < *rep.first_occupied_level) rep.first_occupied_level = level;
      rep.max_density_ratio =
          std::max(rep.max_density_ratio, static_cast<double>(count) * lat.n / std::ldexp(1.0, level));
    }
    rep.z_counts.push_back({std::move(m), count});
  }
  rep.min_norm_product = best.min;
  rep.argmin_point = best.argmin;
  rep.argmin_preimage = best.argmin_preimage;
  double const log_n = std::log2(lat.n);
  rep.fitted_c = rep.first_occupied_level ? log_n - *rep.first_occupied_level + 1 : log_n - m_max;
  return rep;
}

}  // namespace frolov
