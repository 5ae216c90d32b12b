#pragma once

// Integer points of a lattice that land in an axis-parallel box.
//
// The preimage of the box under the basis is a parallelepiped.  The search
// walks its integer bounding box one coordinate at a time; after each
// coordinate is fixed, the intervals of the remaining coordinates are
// tightened against every slab constraint (interval propagation), so the
// visited candidates stay close to the parallelepiped.  Candidates are a
// superset of the solutions; membership is always decided by the caller's
// exact test on the computed image.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "frolov/eft.hpp"
#include "frolov/errors.hpp"
#include "frolov/generator.hpp"
#include "frolov/lll.hpp"
#include "frolov/matrix.hpp"

namespace frolov {

inline constexpr std::uint64_t default_enumeration_budget = 1'000'000'000;

struct enumeration_options {
  /// Upper limit on candidates, estimated up front and enforced while walking.
  std::uint64_t budget = default_enumeration_budget;
  /// Worker threads for materializing point sets (1 = inline).
  unsigned threads = 1;
};

/// lower <= y < upper, or lower <= y <= upper when upper_closed.
struct slab {
  double lower = 0;
  double upper = 0;
  bool upper_closed = false;
};

struct integer_range {
  std::int64_t lo = 0;
  std::int64_t hi = -1;
  bool empty() const noexcept { return lo > hi; }
  std::uint64_t size() const noexcept { return empty() ? 0 : static_cast<std::uint64_t>(hi - lo) + 1; }
};

namespace detail {

inline std::int64_t floor_to_int(double x) {
  constexpr double limit = 4e18;
  return static_cast<std::int64_t>(std::floor(std::clamp(x, -limit, limit)));
}
inline std::int64_t ceil_to_int(double x) {
  constexpr double limit = 4e18;
  return static_cast<std::int64_t>(std::ceil(std::clamp(x, -limit, limit)));
}

// Relative slack on every floating bound; candidates only need to form a
// superset, so being generous costs a few extra membership tests at most.
inline constexpr double bound_slack = 1e-9;

class box_walker {
 public:
  box_walker(square_matrix<double> const& basis, square_matrix<double> const& inverse, std::span<slab const> box,
             std::uint64_t budget, std::string context)
      : basis_(basis), box_(box.begin(), box.end()), budget_(budget), context_(std::move(context)) {
    std::size_t const d = basis.dim();
    root_.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      double lo = 0, hi = 0, mag = 0;
      for (std::size_t i = 0; i < d; ++i) {
        double const a = inverse(j, i) * box_[i].lower;
        double const b = inverse(j, i) * box_[i].upper;
        lo += std::min(a, b);
        hi += std::max(a, b);
        mag += std::max(std::fabs(a), std::fabs(b));
      }
      double const slack = bound_slack * mag + 1e-9;
      root_[j] = {floor_to_int(lo - slack), ceil_to_int(hi + slack)};
    }
  }

  std::vector<integer_range> const& bounding_box() const noexcept { return root_; }

  /// Volume of the parallelepiped plus the outer extent.
  double estimated_candidates() const {
    double box_volume = 1;
    for (auto const& s : box_) box_volume *= std::max(0.0, s.upper - s.lower);
    double const volume = box_volume / std::fabs(lu_determinant(basis_));
    double extent = 0;
    for (auto const& r : root_) extent += static_cast<double>(r.size());
    return volume + extent;
  }

  void check_estimate() const {
    if (estimated_candidates() > static_cast<double>(budget_))
      throw budget_exceeded("enumeration budget exceeded: ~" + std::to_string(estimated_candidates()) +
                            " candidates > budget " + std::to_string(budget_) + " (" + context_ + ")");
  }

  /// Visit candidates whose first coordinate lies in `outer`.
  template <class Visitor>
  void walk(integer_range outer, Visitor&& visit) {
    std::size_t const d = basis_.dim();
    std::vector<integer_range> ranges = root_;
    ranges[0].lo = std::max(ranges[0].lo, outer.lo);
    ranges[0].hi = std::min(ranges[0].hi, outer.hi);
    std::vector<std::int64_t> v(d, 0);
    std::vector<double> partial(d, 0.0);
    visited_ = 0;
    descend(0, ranges, v, partial, visit);
  }

 private:
  /// Tighten ranges[k..d) against every slab given the partial sums of the
  /// fixed prefix.  Returns false when some range becomes empty.
  bool tighten(std::size_t k, std::vector<integer_range>& ranges, std::vector<double> const& partial) const {
    std::size_t const d = basis_.dim();
    for (int pass = 0; pass < 3; ++pass) {
      bool changed = false;
      for (std::size_t i = 0; i < d; ++i) {
        double rest_lo = 0, rest_hi = 0, mag = std::fabs(partial[i]);
        for (std::size_t j = k; j < d; ++j) {
          double const a = basis_(i, j) * static_cast<double>(ranges[j].lo);
          double const b = basis_(i, j) * static_cast<double>(ranges[j].hi);
          rest_lo += std::min(a, b);
          rest_hi += std::max(a, b);
          mag += std::max(std::fabs(a), std::fabs(b));
        }
        mag += std::fabs(box_[i].lower) + std::fabs(box_[i].upper);
        double const slack = bound_slack * mag + 1e-300;
        for (std::size_t j = k; j < d; ++j) {
          double const aij = basis_(i, j);
          if (aij == 0) continue;
          double const a = aij * static_cast<double>(ranges[j].lo);
          double const b = aij * static_cast<double>(ranges[j].hi);
          double const others_lo = rest_lo - std::min(a, b);
          double const others_hi = rest_hi - std::max(a, b);
          double const t_lo = box_[i].lower - partial[i] - others_hi - slack;
          double const t_hi = box_[i].upper - partial[i] - others_lo + slack;
          double const q1 = t_lo / aij;
          double const q2 = t_hi / aij;
          std::int64_t const nlo = ceil_to_int(std::min(q1, q2));
          std::int64_t const nhi = floor_to_int(std::max(q1, q2));
          if (nlo > ranges[j].lo) {
            ranges[j].lo = nlo;
            changed = true;
          }
          if (nhi < ranges[j].hi) {
            ranges[j].hi = nhi;
            changed = true;
          }
          if (ranges[j].empty()) return false;
        }
      }
      if (!changed) break;
    }
    return true;
  }

  template <class Visitor>
  void descend(std::size_t k, std::vector<integer_range> ranges, std::vector<std::int64_t>& v,
               std::vector<double>& partial, Visitor& visit) {
    std::size_t const d = basis_.dim();
    if (!tighten(k, ranges, partial)) return;
    std::vector<double> const base = partial;
    for (std::int64_t x = ranges[k].lo; x <= ranges[k].hi; ++x) {
      v[k] = x;
      for (std::size_t i = 0; i < d; ++i) partial[i] = base[i] + basis_(i, k) * static_cast<double>(x);
      if (k + 1 == d) {
        if (++visited_ > budget_)
          throw budget_exceeded("enumeration budget exceeded: more than " + std::to_string(budget_) +
                                " candidates visited (" + context_ + ")");
        visit(std::span<std::int64_t const>(v));
      } else {
        descend(k + 1, ranges, v, partial, visit);
      }
    }
    partial = base;
  }

  square_matrix<double> basis_;
  std::vector<slab> box_;
  std::uint64_t budget_;
  std::string context_;
  std::vector<integer_range> root_;
  std::uint64_t visited_ = 0;
};

}  // namespace detail

/// Candidate search over a box after an LLL change of basis.  The box is
/// first normalized to a unit cube, the scaled basis is reduced, and the
/// walk runs over coefficients w of the reduced basis; each candidate is
/// reported as v = U w in the caller's coordinates.
class box_enumerator {
 public:
  box_enumerator(square_matrix<double> const& basis, square_matrix<double> const& inverse, std::span<slab const> box,
                 enumeration_options const& options, std::string context)
      : box_(box.begin(), box.end()) {
    std::size_t const d = basis.dim();
    square_matrix<double> scaled(d);
    for (std::size_t i = 0; i < d; ++i) {
      double const width = box_[i].upper - box_[i].lower;
      if (!(width > 0)) throw domain_error("enumeration box must have positive width");
      for (std::size_t j = 0; j < d; ++j) scaled(i, j) = basis(i, j) / width;
    }
    auto lll = lll_reduce(scaled);
    transform_ = std::move(lll.transform);
    reduced_ = basis * transform_.map<double>([](std::int64_t x) { return static_cast<double>(x); });
    reduced_inverse_ =
        inverse_transform_map(lll.inverse_transform) * inverse;
    walker_.emplace(reduced_, reduced_inverse_, box_, options.budget, std::move(context));
  }

  std::size_t dim() const noexcept { return reduced_.dim(); }
  integer_range outer_range() const { return walker_->bounding_box()[0]; }
  double estimated_candidates() const { return walker_->estimated_candidates(); }
  void check_estimate() const { walker_->check_estimate(); }

  /// visit(v) for every candidate whose first reduced coefficient is in outer.
  template <class Visitor>
  void walk(integer_range outer, Visitor&& visit) {
    std::size_t const d = dim();
    std::vector<std::int64_t> v(d);
    walker_->walk(outer, [&](std::span<std::int64_t const> w) {
      for (std::size_t i = 0; i < d; ++i) {
        std::int64_t acc = 0;
        for (std::size_t j = 0; j < d; ++j) acc += transform_(i, j) * w[j];
        v[i] = acc;
      }
      visit(std::span<std::int64_t const>(v));
    });
  }

  template <class Visitor>
  void walk(Visitor&& visit) {
    walk(outer_range(), std::forward<Visitor>(visit));
  }

 private:
  static square_matrix<double> inverse_transform_map(square_matrix<std::int64_t> const& m) {
    return m.map<double>([](std::int64_t x) { return static_cast<double>(x); });
  }

  std::vector<slab> box_;
  square_matrix<std::int64_t> transform_;
  square_matrix<double> reduced_;
  square_matrix<double> reduced_inverse_;
  std::optional<detail::box_walker> walker_;
};

/// Calls visit(v) for a superset of the integers v with basis * v in the
/// box.  `inverse` must be basis^{-1}.  Visit order is deterministic but
/// not lexicographic in v.
template <class Visitor>
void enumerate_box_candidates(square_matrix<double> const& basis, square_matrix<double> const& inverse,
                              std::span<slab const> box, enumeration_options const& options,
                              std::string const& context, Visitor&& visit) {
  box_enumerator e(basis, inverse, box, options, context);
  e.check_estimate();
  e.walk(visit);
}

/// Nodes of the cubature rule: the image of an integer vector under the
/// primal basis, computed with a compensated dot product.
inline void primal_image(frolov_lattice const& lat, std::span<std::int64_t const> l, std::span<double> x) {
  for (std::size_t i = 0; i < lat.dim; ++i) x[i] = dot2(lat.primal_basis.row(i), l);
}

/// The node primal_basis * l without the final rounding to binary64.
inline void primal_image_extended(frolov_lattice const& lat, std::span<std::int64_t const> l,
                                  std::span<extended_real> x) {
  for (std::size_t i = 0; i < lat.dim; ++i) {
    extended_real acc = 0;
    for (std::size_t j = 0; j < lat.dim; ++j)
      acc += lat.primal_basis_extended(i, j) * static_cast<extended_real>(l[j]);
    x[i] = acc;
  }
}

/// Half-open membership with exact comparisons on the binary64 coordinates.
inline bool in_unit_cube(std::span<double const> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0 && v < 1.0; });
}

inline std::vector<slab> unit_cube_box(std::size_t d) { return std::vector<slab>(d, slab{0.0, 1.0, false}); }

inline std::string lattice_context(frolov_lattice const& lat) {
  return "n=" + std::to_string(lat.n) + ", d=" + std::to_string(lat.dim);
}

/// The nodes X_n = primal_basis(Z^d) intersected with [0,1)^d, ordered
/// lexicographically by integer preimage.
class lattice_point_set {
 public:
  lattice_point_set() = default;
  lattice_point_set(frolov_lattice lattice, std::vector<std::int64_t> preimages, std::vector<double> points)
      : lattice_(std::move(lattice)), preimages_(std::move(preimages)), points_(std::move(points)) {}

  frolov_lattice const& lattice() const noexcept { return lattice_; }
  std::size_t dim() const noexcept { return lattice_.dim; }
  std::size_t count() const noexcept { return dim() ? points_.size() / dim() : 0; }

  std::span<double const> point(std::size_t i) const noexcept { return {points_.data() + i * dim(), dim()}; }
  std::span<std::int64_t const> preimage(std::size_t i) const noexcept {
    return {preimages_.data() + i * dim(), dim()};
  }
  std::vector<double> const& flat_points() const noexcept { return points_; }
  std::vector<std::int64_t> const& flat_preimages() const noexcept { return preimages_; }

 private:
  frolov_lattice lattice_;
  std::vector<std::int64_t> preimages_;
  std::vector<double> points_;
};

/// Streams the nodes without storing them.  The order is the deterministic
/// walk order of the reduced basis, not lexicographic; use enumerate_points
/// for the sorted set.
template <class Visitor>
void for_each_point(frolov_lattice const& lat, enumeration_options const& options, Visitor&& visit) {
  auto const inverse = lat.dual_basis.transposed();
  auto const box = unit_cube_box(lat.dim);
  std::vector<double> x(lat.dim);
  enumerate_box_candidates(lat.primal_basis, inverse, box, options, lattice_context(lat),
                           [&](std::span<std::int64_t const> l) {
                             primal_image(lat, l, x);
                             if (in_unit_cube(x)) visit(l, std::span<double const>(x));
                           });
}

inline lattice_point_set enumerate_points(frolov_lattice const& lat, enumeration_options const& options = {}) {
  auto const inverse = lat.dual_basis.transposed();
  auto const box = unit_cube_box(lat.dim);
  std::size_t const d = lat.dim;
  box_enumerator const probe(lat.primal_basis, inverse, box, options, lattice_context(lat));
  probe.check_estimate();

  integer_range const outer = probe.outer_range();
  unsigned const workers =
      static_cast<unsigned>(std::clamp<std::uint64_t>(options.threads, 1, std::max<std::uint64_t>(outer.size(), 1)));

  std::vector<std::vector<std::int64_t>> found(workers);
  auto run = [&](unsigned w) {
    std::uint64_t const total = outer.size();
    std::int64_t const lo = outer.lo + static_cast<std::int64_t>(total * w / workers);
    std::int64_t const hi = outer.lo + static_cast<std::int64_t>(total * (w + 1) / workers) - 1;
    box_enumerator e = probe;
    std::vector<double> x(d);
    e.walk({lo, hi}, [&](std::span<std::int64_t const> l) {
      primal_image(lat, l, x);
      if (in_unit_cube(x)) found[w].insert(found[w].end(), l.begin(), l.end());
    });
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }

  std::vector<std::int64_t> all;
  for (auto& f : found) all.insert(all.end(), f.begin(), f.end());
  std::size_t const count = d ? all.size() / d : 0;
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(all.begin() + a * d, all.begin() + (a + 1) * d, all.begin() + b * d,
                                        all.begin() + (b + 1) * d);
  });

  std::vector<std::int64_t> pre(count * d);
  std::vector<double> pts(count * d);
  for (std::size_t i = 0; i < count; ++i) {
    std::copy_n(all.begin() + order[i] * d, d, pre.begin() + i * d);
    primal_image(lat, std::span<std::int64_t const>(pre.data() + i * d, d), std::span<double>(pts.data() + i * d, d));
  }
  return lattice_point_set(lat, std::move(pre), std::move(pts));
}

struct point_count_entry {
  double n = 0;
  std::uint64_t count = 0;
  /// count - n
  double discrepancy = 0;
};

/// Node counts across a list of scales; counting only, nothing is stored.
inline std::vector<point_count_entry> point_count_profile(generator_spec const& spec, std::span<double const> n_list,
                                                          enumeration_options const& options = {}) {
  std::vector<point_count_entry> out;
  if (n_list.empty()) return out;
  auto const poly = build_polynomial(spec);
  for (double n : n_list) {
    auto const lat = assemble_lattice(poly, n);
    std::uint64_t count = 0;
    for_each_point(lat, options, [&](auto, auto) { ++count; });
    out.push_back({n, count, static_cast<double>(count) - n});
  }
  return out;
}

}  // namespace frolov
