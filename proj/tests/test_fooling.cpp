#include <gtest/gtest.h>

#include <cmath>

#include "frolov/frolov.hpp"
#include "oracles.hpp"

using namespace frolov;

namespace {

lattice_point_set nodes(double n, std::size_t d = 2) {
  return enumerate_points(make_lattice({d, generator_kind::standard, {}}, n));
}

std::uint64_t cell_total(std::vector<int> const& j) {
  std::uint64_t t = 1;
  for (int v : j) t *= (std::uint64_t{1} << v) - 1;
  return t;
}

long double atom_integral_oracle(std::vector<int> const& j) {
  long double v = 1;
  for (int ji : j) v *= oracle::bump_integral / std::ldexp(1.0L, ji);
  return v;
}

}  // namespace

TEST(EmptyCells, NoNodes) {
  std::vector<double> const none;
  std::vector<int> const j{1, 1};
  auto const cells = empty_cells(none, 2, j);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0], (std::vector<std::int64_t>{1, 1}));
}

TEST(EmptyCells, OneNodeRemovesItsCell) {
  std::vector<double> const one{0.3, 0.6};
  std::vector<int> const j{2, 2};
  auto const cells = empty_cells(one, 2, j);
  EXPECT_EQ(cells.size(), 8u);  // 3 x 3 admissible cells, node in (1, 2)
  for (auto const& k : cells) EXPECT_NE(k, (std::vector<std::int64_t>{1, 2}));
}

TEST(EmptyCells, PigeonholeBound) {
  auto const pts = nodes(64);
  std::uint64_t total_empty = 0;
  for (auto const& j : positive_levels(2, 7)) {
    auto const cells = empty_cells(pts.flat_points(), 2, j);
    EXPECT_GE(static_cast<double>(cells.size()), static_cast<double>(cell_total(j)) - pts.count());
    total_empty += cells.size();
  }
  EXPECT_GE(total_empty, 64u);
  EXPECT_EQ(total_empty, 256u);  // independent count from the exported nodes
}

TEST(Fooling, VanishesAtEveryNode) {
  auto const pts = nodes(1024);
  struct variant_case {
    fooling_variant v;
    smoothness_class c;
  };
  for (auto [v, c] : {variant_case{fooling_variant::g1, {2, 1, infinity, smoothness_scale::besov}},
                      variant_case{fooling_variant::g2, {2, 2, 0.5, smoothness_scale::besov}},
                      variant_case{fooling_variant::g3, {3, 0.5, 2, smoothness_scale::besov}},
                      variant_case{fooling_variant::g4, {3, 0.5, 0.5, smoothness_scale::besov}}}) {
    auto const g = build_fooling(pts.flat_points(), 2, c, v, fooling_level(1024, 2));
    EXPECT_GT(g.atom_count(), 0u);
    EXPECT_GT(g.integral(), 0.0);
    for (std::size_t i = 0; i < pts.count(); ++i) ASSERT_EQ(g(pts.point(i)), 0.0) << to_string(v);
    g.for_each_atom([&](atom const& a, double) {
      for (std::size_t i = 0; i < pts.count(); i += 7) ASSERT_EQ(a(pts.point(i)), 0.0);
    });
    EXPECT_EQ(integrate(pts, g.as_test_function()).value, 0.0);
  }
}

TEST(Fooling, G1UniformCoefficientAndIntegral) {
  auto const pts = nodes(256);
  smoothness_class const c{2, 1, infinity, smoothness_scale::besov};
  int const m = 8;
  auto const g = build_fooling(pts.flat_points(), 2, c, fooling_variant::g1, m);
  long double expect = 0;
  for (auto const& l : g.levels) {
    EXPECT_DOUBLE_EQ(l.coefficient, std::exp2(-2.0 * m));
    int total = 0;
    for (int v : l.j) total += v;
    EXPECT_EQ(total, m + 1);
    expect += l.coefficient * static_cast<long double>(l.cells.size()) * atom_integral_oracle(l.j);
  }
  EXPECT_NEAR(g.integral(), static_cast<double>(expect), 1e-12 * static_cast<double>(expect));
}

TEST(Fooling, G2ClosedForm) {
  auto const pts = nodes(256);
  smoothness_class const c{1.5, 2, 0.5, smoothness_scale::besov};
  int const m = 8;
  auto const g = build_fooling(pts.flat_points(), 2, c, fooling_variant::g2, m);
  ASSERT_EQ(g.levels.size(), 1u);
  auto const& l = g.levels[0];
  long double const ip = oracle::bump_integral;
  long double const expect =
      std::exp2(-1.5L * m) * static_cast<long double>(l.cells.size()) * std::ldexp(1.0L, -(m + 1)) * ip * ip;
  EXPECT_NEAR(g.integral(), static_cast<double>(expect), 1e-12 * static_cast<double>(expect));
}

TEST(Fooling, G4SingleAtom) {
  auto const pts = nodes(256);
  smoothness_class const c{3, 0.5, 0.5, smoothness_scale::besov};
  int const m = 8;
  auto const g = build_fooling(pts.flat_points(), 2, c, fooling_variant::g4, m);
  EXPECT_EQ(g.atom_count(), 1u);
  long double const ip = oracle::bump_integral;
  long double const expect = std::exp2((-3.0L + 2.0L) * m) * std::ldexp(1.0L, -(m + 1)) * ip * ip;
  EXPECT_NEAR(g.integral(), static_cast<double>(expect), 1e-12 * static_cast<double>(expect));
}

TEST(Fooling, DomainErrors) {
  auto const pts = nodes(256);
  // s <= sigma_p = 1/p - 1 = 1
  EXPECT_THROW(build_fooling(pts.flat_points(), 2, {1, 0.5, 2, smoothness_scale::besov}, fooling_variant::g3, 8),
               domain_error);
  EXPECT_THROW(build_fooling(pts.flat_points(), 2, {2, 1, infinity, smoothness_scale::besov}, fooling_variant::g2, 8),
               domain_error);
  // 2^(m+1) must exceed the node count
  EXPECT_THROW(build_fooling(pts.flat_points(), 2, {2, 1, infinity, smoothness_scale::besov}, fooling_variant::g1, 6),
               domain_error);
  EXPECT_THROW(parse_fooling_variant("g5"), domain_error);
}

TEST(Fooling, DemoRows) {
  auto const sched = geometric_schedule(64, 1024, 2);
  auto const demo = lower_bound_demo({2, generator_kind::standard, {}}, {2, 1, infinity, smoothness_scale::besov},
                                     fooling_variant::g1, sched);
  EXPECT_TRUE(demo.all_zero);
  ASSERT_EQ(demo.rows.size(), 5u);
  EXPECT_EQ(demo.rows[0].count, 66u);
  EXPECT_EQ(demo.rows[0].atoms, 256u);
  EXPECT_NEAR(demo.rows[0].integral, 7.1931490303343728e-05, 1e-17);
  EXPECT_EQ(demo.predicted_rate, 2);
  EXPECT_EQ(demo.predicted_log_exponent, 1);
  for (std::size_t i = 1; i < demo.rows.size(); ++i) EXPECT_LT(demo.rows[i].integral, demo.rows[i - 1].integral);
}
