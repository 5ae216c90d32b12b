#pragma once

// Fooling functions: finite sums of dyadic bump atoms placed in cells that
// contain no node, so every rule using those nodes returns exactly 0 while
// the integral stays at the lower-bound rate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frolov/cubature.hpp"
#include "frolov/eft.hpp"
#include "frolov/enumeration.hpp"
#include "frolov/errors.hpp"
#include "frolov/generator.hpp"
#include "frolov/testfns.hpp"

namespace frolov {

enum class fooling_variant { g1, g2, g3, g4 };

inline std::string_view to_string(fooling_variant v) {
  switch (v) {
    case fooling_variant::g1: return "g1";
    case fooling_variant::g2: return "g2";
    case fooling_variant::g3: return "g3";
    case fooling_variant::g4: return "g4";
  }
  return "?";
}

inline fooling_variant parse_fooling_variant(std::string_view s) {
  if (s == "g1" || s == "G1") return fooling_variant::g1;
  if (s == "g2" || s == "G2") return fooling_variant::g2;
  if (s == "g3" || s == "G3") return fooling_variant::g3;
  if (s == "g4" || s == "G4") return fooling_variant::g4;
  throw domain_error("unknown fooling variant '" + std::string(s) + "' (expected g1|g2|g3|g4)");
}

/// a_{j,k}(x) = prod_i phi(2^{j_i} x_i - k_i) with the bump profile phi.
struct atom {
  std::vector<int> j;
  std::vector<std::int64_t> k;

  double operator()(std::span<double const> x) const {
    double prod = 1;
    for (std::size_t i = 0; i < j.size(); ++i) {
      prod *= bump_profile(std::ldexp(x[i], j[i]) - static_cast<double>(k[i]));
      if (prod == 0) return 0;
    }
    return prod;
  }

  /// integral over R^d: 2^{-|j|_1} (int phi)^d
  extended_real integral() const {
    extended_real v = 1;
    for (int ji : j) v *= bump_profile_integral().value / detail::extended_pow(2, static_cast<std::size_t>(ji));
    return v;
  }
};

/// Cell index floor(2^j x) of x, or nothing if it is not in D_{j_1} x ... x D_{j_d},
/// D_l = {1, ..., 2^l - 1} (the cells touching x_i = 0 are never admissible).
inline std::optional<std::vector<std::int64_t>> admissible_cell(std::span<double const> x, std::span<int const> j) {
  std::vector<std::int64_t> k(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    double const t = std::floor(std::ldexp(x[i], j[i]));
    if (!(t >= 1 && t <= std::ldexp(1.0, j[i]) - 1)) return std::nullopt;
    k[i] = static_cast<std::int64_t>(t);
  }
  return k;
}

namespace detail {

inline std::uint64_t admissible_cell_count(std::span<int const> j) {
  std::uint64_t total = 1;
  for (int ji : j) {
    if (ji < 0 || ji > 62) throw domain_error("dyadic level out of range [0, 62]");
    std::uint64_t const per_axis = (std::uint64_t{1} << ji) - 1;
    if (per_axis == 0) return 0;
    if (total > std::numeric_limits<std::uint64_t>::max() / per_axis)
      return std::numeric_limits<std::uint64_t>::max();
    total *= per_axis;
  }
  return total;
}

/// Row-major linear index over D_{j_1} x ... x D_{j_d} (k_i - 1 per axis).
inline std::uint64_t linear_cell(std::span<std::int64_t const> k, std::span<int const> j) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < j.size(); ++i)
    idx = idx * ((std::uint64_t{1} << j[i]) - 1) + static_cast<std::uint64_t>(k[i] - 1);
  return idx;
}

inline std::vector<std::int64_t> cell_from_linear(std::uint64_t idx, std::span<int const> j) {
  std::vector<std::int64_t> k(j.size());
  for (std::size_t i = j.size(); i-- > 0;) {
    std::uint64_t const base = (std::uint64_t{1} << j[i]) - 1;
    k[i] = static_cast<std::int64_t>(idx % base) + 1;
    idx /= base;
  }
  return k;
}

}  // namespace detail

/// Admissible cells k in D_{j_1} x ... x D_{j_d}, D_l = {1, ..., 2^l - 1},
/// containing none of the nodes (flat, d coordinates per node).  Cell
/// membership is floor(2^{j_i} x_i) = k_i.  Sorted lexicographically.
inline std::vector<std::vector<std::int64_t>> empty_cells(std::span<double const> nodes, std::size_t d,
                                                          std::span<int const> j,
                                                          std::uint64_t budget = default_enumeration_budget) {
  if (j.size() != d) throw domain_error("level vector length does not match the dimension");
  if (d == 0 || nodes.size() % d != 0) throw domain_error("node list is not a multiple of the dimension");
  std::uint64_t const total = detail::admissible_cell_count(j);
  if (total > budget)
    throw budget_exceeded("level j has " + std::to_string(total) + " admissible cells, over the budget of " +
                          std::to_string(budget));
  std::vector<bool> hit(total, false);
  for (std::size_t i = 0; i < nodes.size(); i += d) {
    auto const k = admissible_cell(nodes.subspan(i, d), j);
    if (k) hit[detail::linear_cell(*k, j)] = true;
  }
  std::vector<std::vector<std::int64_t>> out;
  for (std::uint64_t idx = 0; idx < total; ++idx)
    if (!hit[idx]) out.push_back(detail::cell_from_linear(idx, j));
  return out;
}

/// All atoms at one level j share one coefficient.
struct atom_level {
  std::vector<int> j;
  double coefficient = 0;
  /// sorted linear cell indices (see empty_cells for the ordering)
  std::vector<std::uint64_t> cells;
};

class fooling_function {
 public:
  fooling_variant variant = fooling_variant::g1;
  int m = 0;
  smoothness_class cls;
  std::size_t dim = 0;
  std::size_t node_count = 0;
  std::vector<atom_level> levels;

  std::size_t atom_count() const {
    std::size_t c = 0;
    for (auto const& l : levels) c += l.cells.size();
    return c;
  }

  /// Every (atom, coefficient) pair, level by level.
  template <class Visitor>
  void for_each_atom(Visitor&& visit) const {
    for (auto const& l : levels)
      for (auto idx : l.cells) visit(atom{l.j, detail::cell_from_linear(idx, l.j)}, l.coefficient);
  }

  double operator()(std::span<double const> x) const {
    if (x.size() != dim) throw domain_error("fooling function called with wrong arity");
    double sum = 0;
    for (auto const& l : levels) {
      auto const k = admissible_cell(x, l.j);
      if (!k) continue;
      if (!std::binary_search(l.cells.begin(), l.cells.end(), detail::linear_cell(*k, l.j))) continue;
      sum += l.coefficient * atom{l.j, *k}(x);
    }
    return sum;
  }

  /// sum of coefficient * 2^{-|j|_1} (int phi)^d over all atoms
  extended_real integral_extended() const {
    extended_real const ip = bump_profile_integral().value;
    extended_real total = 0;
    for (auto const& l : levels) {
      int level = 0;
      for (int ji : l.j) level += ji;
      total += static_cast<extended_real>(l.coefficient) * static_cast<extended_real>(l.cells.size()) *
               detail::extended_pow(ip, dim) / detail::extended_pow(2, static_cast<std::size_t>(level));
    }
    return total;
  }
  double integral() const { return static_cast<double>(integral_extended()); }

  /// (sum_j 2^{|j|(s-1/p) theta} [sum_k |lambda_{j,k}|^p]^{theta/p})^{1/theta}, the
  /// atomic-decomposition bound on the norm up to its unknown constant.
  double norm_surrogate() const {
    double const s = cls.s, p = cls.p, theta = cls.theta;
    std::vector<double> terms;
    for (auto const& l : levels) {
      if (l.cells.empty()) continue;
      int level = 0;
      for (int ji : l.j) level += ji;
      double const lp = std::isinf(p) ? std::fabs(l.coefficient)
                                      : std::pow(static_cast<double>(l.cells.size()), 1 / p) * std::fabs(l.coefficient);
      terms.push_back(std::exp2(level * (s - 1 / p)) * lp);
    }
    if (terms.empty()) return 0;
    if (std::isinf(theta)) return *std::max_element(terms.begin(), terms.end());
    double acc = 0;
    for (double t : terms) acc += std::pow(t, theta);
    return std::pow(acc, 1 / theta);
  }

  test_function as_test_function() const {
    test_function f;
    f.name = "fooling:" + std::string(to_string(variant));
    f.arity = dim;
    auto self = std::make_shared<fooling_function const>(*this);
    f.evaluate = [self](std::span<double const> x) { return (*self)(x); };
    f.reference_extended = integral_extended();
    f.reference_integral = static_cast<double>(f.reference_extended);
    f.reference_extended_error = 4 * bump_profile_integral().error * static_cast<double>(dim) * f.reference_integral;
    f.reference_error = f.reference_extended_error + unit_roundoff * f.reference_integral;
    f.declared_class = cls;
    f.structure = function_structure::atom_sum;
    return f;
  }
};

/// Level vectors j in N^d (all j_i >= 1) with |j|_1 = total, lexicographic.
inline std::vector<std::vector<int>> positive_levels(std::size_t d, int total) {
  std::vector<std::vector<int>> out;
  if (d == 0 || total < static_cast<int>(d)) return out;
  std::vector<int> j(d, 1);
  auto rec = [&](auto&& self, std::size_t i, int remaining) -> void {
    if (i + 1 == d) {
      j[i] = remaining;
      out.push_back(j);
      return;
    }
    for (int v = 1; remaining - v >= static_cast<int>(d - i - 1); ++v) {
      j[i] = v;
      self(self, i + 1, remaining - v);
    }
  };
  rec(rec, 0, total);
  return out;
}

/// The most nearly equal j in N^d with |j|_1 = total; larger parts first.
inline std::vector<int> balanced_level(std::size_t d, int total) {
  std::vector<int> j(d, total / static_cast<int>(d));
  for (int r = 0; r < total % static_cast<int>(d); ++r) ++j[static_cast<std::size_t>(r)];
  return j;
}

inline void check_variant(smoothness_class const& c, fooling_variant v) {
  c.validate();
  if (!(c.s > c.sigma_p()))
    throw domain_error("fooling functions need s > sigma_p = max(0, 1/p - 1); got s=" + std::to_string(c.s) +
                       ", sigma_p=" + std::to_string(c.sigma_p()));
  bool const p_ge_1 = c.p >= 1, theta_ge_1 = c.theta >= 1;
  bool ok = false;
  switch (v) {
    case fooling_variant::g1: ok = p_ge_1 && theta_ge_1; break;
    case fooling_variant::g2: ok = p_ge_1 && !theta_ge_1; break;
    case fooling_variant::g3: ok = !p_ge_1 && theta_ge_1; break;
    case fooling_variant::g4: ok = !p_ge_1 && !theta_ge_1; break;
  }
  if (!ok)
    throw domain_error("variant " + std::string(to_string(v)) +
                       " does not match the class (g1: p,theta >= 1; g2: p >= 1 > theta; g3: theta >= 1 > p; g4: "
                       "p,theta < 1)");
}

/// Builds the fooling function of the given variant against the nodes (flat,
/// d coordinates each) at level m, with the normalizing constant set to 1.
inline fooling_function build_fooling(std::span<double const> nodes, std::size_t d, smoothness_class const& cls,
                                      fooling_variant variant, int m,
                                      std::uint64_t budget = default_enumeration_budget) {
  check_variant(cls, variant);
  if (d < 1) throw domain_error("dimension must be >= 1");
  if (nodes.size() % d != 0) throw domain_error("node list is not a multiple of the dimension");
  std::size_t const count = nodes.size() / d;
  if (m < 1 || m + 1 < static_cast<int>(d))
    throw domain_error("level m must be >= max(1, d - 1), got m=" + std::to_string(m));
  // level m + 1 must have more cells than there are nodes
  if (m > 60 || std::ldexp(2.0, m) <= static_cast<double>(count))
    throw domain_error("level m=" + std::to_string(m) + " needs 2^(m+1) > #nodes = " + std::to_string(count));

  fooling_function g;
  g.variant = variant;
  g.m = m;
  g.cls = cls;
  g.dim = d;
  g.node_count = count;

  double const md = static_cast<double>(m);
  double const dm1 = static_cast<double>(d) - 1;
  double const base = std::exp2(-cls.s * md);
  double const log_factor = std::isinf(cls.theta) ? 1.0 : std::pow(md, -dm1 / cls.theta);
  double const p_factor = std::isinf(cls.p) ? 1.0 : std::exp2(md / cls.p);

  auto add_level = [&](std::vector<int> const& j, double coefficient, bool all_cells) {
    auto cells = empty_cells(nodes, d, j, budget);
    if (cells.empty()) return;
    atom_level l{j, coefficient, {}};
    if (all_cells) {
      for (auto const& k : cells) l.cells.push_back(detail::linear_cell(k, j));
    } else {
      l.cells.push_back(detail::linear_cell(cells.front(), j));
    }
    g.levels.push_back(std::move(l));
  };

  switch (variant) {
    case fooling_variant::g1:
      for (auto const& j : positive_levels(d, m + 1)) add_level(j, base * log_factor, true);
      break;
    case fooling_variant::g2: add_level(balanced_level(d, m + 1), base, true); break;
    case fooling_variant::g3:
      for (auto const& j : positive_levels(d, m + 1)) add_level(j, base * log_factor * p_factor, false);
      break;
    case fooling_variant::g4: add_level(balanced_level(d, m + 1), base * p_factor, false); break;
  }
  if (g.atom_count() == 0)
    throw domain_error("no empty admissible cell at level m=" + std::to_string(m) + "; increase m");
  return g;
}

/// Smallest m >= max(1, d - 1) with 2^m >= n, n the rule's scale.
inline int fooling_level(double n, std::size_t d) {
  int m = std::max(1, static_cast<int>(d) - 1);
  while (std::ldexp(1.0, m) < n) ++m;
  return m;
}

struct fooling_demo_row {
  double n = 0;
  std::uint64_t count = 0;
  int m = 0;
  std::size_t atoms = 0;
  /// Q_n(g), expected to be exactly 0
  double quadrature = 0;
  double integral = 0;
  double norm_surrogate = 0;
  /// 2^{-m (s - (1/p - 1)_+)} m^{(d-1)(1-1/theta)_+}
  double predicted_shape = 0;
};

struct fooling_demo {
  fooling_variant variant = fooling_variant::g1;
  smoothness_class cls;
  std::size_t dim = 0;
  generator_kind kind = generator_kind::standard;
  std::vector<fooling_demo_row> rows;
  /// fit of log integral against n (same model as convergence studies)
  std::optional<rate_fit> fit;
  /// predicted main rate s - (1/p - 1)_+ and log exponent (d-1)(1-1/theta)_+
  double predicted_rate = 0;
  double predicted_log_exponent = 0;
  bool all_zero = true;
};

inline fooling_demo lower_bound_demo(generator_spec const& spec, smoothness_class const& cls, fooling_variant variant,
                                     std::span<double const> schedule, enumeration_options const& options = {}) {
  spec.validate();
  check_variant(cls, variant);
  check_schedule(schedule);
  std::size_t const d = spec.dimension;
  fooling_demo demo;
  demo.variant = variant;
  demo.cls = cls;
  demo.dim = d;
  demo.kind = spec.kind;
  double const dm1 = static_cast<double>(d) - 1;
  demo.predicted_rate = cls.s - std::max(0.0, 1 / cls.p - 1);
  demo.predicted_log_exponent = dm1 * std::max(0.0, 1 - 1 / cls.theta);

  auto const poly = build_polynomial(spec);
  std::vector<double> ns, integrals;
  for (double n : schedule) {
    auto const nodes = enumerate_points(assemble_lattice(poly, n), options);
    int const m = fooling_level(n, d);
    auto const g = build_fooling(nodes.flat_points(), d, cls, variant, m, options.budget);
    auto const q = integrate(nodes, g.as_test_function(), options.threads);

    fooling_demo_row row;
    row.n = n;
    row.count = nodes.count();
    row.m = m;
    row.atoms = g.atom_count();
    row.quadrature = q.value;
    row.integral = g.integral();
    row.norm_surrogate = g.norm_surrogate();
    row.predicted_shape =
        std::exp2(-m * demo.predicted_rate) * std::pow(static_cast<double>(m), demo.predicted_log_exponent);
    if (row.quadrature != 0) demo.all_zero = false;
    demo.rows.push_back(row);
    ns.push_back(n);
    integrals.push_back(row.integral);
  }
  demo.fit = fit_rate(ns, integrals);
  return demo;
}

}  // namespace frolov
