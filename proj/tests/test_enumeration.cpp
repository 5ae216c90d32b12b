#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "frolov/frolov.hpp"
#include "oracles.hpp"

using namespace frolov;

namespace {

std::set<std::vector<std::int64_t>> as_set(lattice_point_set const& pts) {
  std::set<std::vector<std::int64_t>> out;
  for (std::size_t i = 0; i < pts.count(); ++i) {
    auto const l = pts.preimage(i);
    out.emplace(l.begin(), l.end());
  }
  return out;
}

}  // namespace

TEST(Enumeration, ScalarLattice) {
  auto const pts = enumerate_points(make_lattice({1, generator_kind::standard, {}}, 5));
  ASSERT_EQ(pts.count(), 5u);
  double const expect[] = {0, 0.2, 0.4, 0.6, 0.8};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(pts.preimage(i)[0], static_cast<std::int64_t>(i));
    EXPECT_NEAR(pts.point(i)[0], expect[i], 1e-15);
  }
}

TEST(Enumeration, MatchesBruteForce) {
  for (std::size_t d : {2u, 3u})
    for (double n : {16.0, 64.0, 100.0, 256.0, 1024.0, 4096.0}) {
      auto const lat = make_lattice({d, generator_kind::standard, {}}, n);
      EXPECT_EQ(as_set(enumerate_points(lat)), oracle::brute_force_points(lat)) << "d=" << d << " n=" << n;
    }
  auto const cheb = make_lattice({2, generator_kind::chebyshev, {}}, 1000);
  EXPECT_EQ(as_set(enumerate_points(cheb)), oracle::brute_force_points(cheb));
}

TEST(Enumeration, SortedUniqueAndInsideCube) {
  auto const lat = make_lattice({3, generator_kind::standard, {}}, 2000);
  auto const pts = enumerate_points(lat);
  std::vector<double> x(3);
  for (std::size_t i = 0; i < pts.count(); ++i) {
    if (i > 0) {
      auto const a = pts.preimage(i - 1), b = pts.preimage(i);
      EXPECT_TRUE(std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()));
    }
    primal_image(lat, pts.preimage(i), x);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(x[j], pts.point(i)[j]);
      EXPECT_GE(x[j], 0.0);
      EXPECT_LT(x[j], 1.0);
    }
  }
}

TEST(Enumeration, DeterministicAcrossRunsAndThreads) {
  auto const lat = make_lattice({2, generator_kind::standard, {}}, 50000);
  auto const a = enumerate_points(lat, {default_enumeration_budget, 1});
  auto const b = enumerate_points(lat, {default_enumeration_budget, 1});
  auto const c = enumerate_points(lat, {default_enumeration_budget, 4});
  EXPECT_EQ(a.flat_preimages(), b.flat_preimages());
  EXPECT_EQ(a.flat_preimages(), c.flat_preimages());
  EXPECT_EQ(a.flat_points(), c.flat_points());
}

TEST(Enumeration, StreamingVisitsTheSameSet) {
  auto const lat = make_lattice({3, generator_kind::standard, {}}, 3000);
  std::set<std::vector<std::int64_t>> streamed;
  for_each_point(lat, {}, [&](std::span<std::int64_t const> l, std::span<double const>) {
    EXPECT_TRUE(streamed.emplace(l.begin(), l.end()).second);
  });
  EXPECT_EQ(streamed, as_set(enumerate_points(lat)));
}

TEST(Enumeration, CountFixtures) {
  // regression fixtures from direct enumeration
  auto const small = enumerate_points(make_lattice({2, generator_kind::standard, {}}, 64));
  EXPECT_EQ(small.count(), 66u);
  EXPECT_LE(std::fabs(static_cast<double>(small.count()) - 64), 6 * 6);
  auto const big = enumerate_points(make_lattice({2, generator_kind::standard, {}}, 65536));
  EXPECT_EQ(big.count(), 65537u);
  double const ratio = static_cast<double>(big.count()) / 65536;
  EXPECT_GE(ratio, 0.95);
  EXPECT_LE(ratio, 1.05);
}

TEST(Enumeration, CountProfile) {
  std::vector<double> const scalar{5, 10, 20};
  for (auto const& e : point_count_profile({1, generator_kind::standard, {}}, scalar))
    EXPECT_EQ(e.discrepancy, 0.0) << e.n;
  EXPECT_TRUE(point_count_profile({2, generator_kind::standard, {}}, std::vector<double>{}).empty());
  std::vector<double> const ns{256, 1024, 4096};
  auto const prof = point_count_profile({2, generator_kind::standard, {}}, ns);
  ASSERT_EQ(prof.size(), 3u);
  EXPECT_EQ(prof[0].count, 259u);
  EXPECT_EQ(prof[1].count, 1024u);
  EXPECT_EQ(prof[2].count, 4096u);
}

TEST(Enumeration, BudgetGuard) {
  auto const lat = make_lattice({2, generator_kind::standard, {}}, 1e6);
  EXPECT_THROW(enumerate_points(lat, {1000, 1}), budget_exceeded);
}
