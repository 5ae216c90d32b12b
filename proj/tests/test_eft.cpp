#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "frolov/eft.hpp"

using namespace frolov;

TEST(Eft, TwoSumAndTwoProdAreExact) {
  auto const [s, e] = two_sum(1.0, 1e-20);
  EXPECT_EQ(s, 1.0);
  EXPECT_EQ(e, 1e-20);
  auto const [p, pe] = two_prod(1 + 0x1p-30, 1 - 0x1p-30);
  EXPECT_EQ(p, 1.0);
  EXPECT_EQ(pe, -0x1p-60);
}

TEST(Eft, CompensatedSumRecoversCancellation) {
  compensated_sum s;
  s += 1e16;
  for (int i = 0; i < 1000; ++i) s += 1.0;
  s += -1e16;
  EXPECT_EQ(s.value(), 1000.0);
}

TEST(Eft, Dot2) {
  std::vector<double> const row{1e16, 1.0, -1e16};
  std::vector<std::int64_t> const v{1, 3, 1};
  EXPECT_EQ(dot2(row, v), 3.0);
}

TEST(Eft, CompensatedHornerBoundHolds) {
  // (t - 1)^5 expanded; the plain evaluation near t = 1 is all rounding
  std::vector<double> const c{-1, 5, -10, 10, -5, 1};
  for (double t : {0.999, 1.0001, 1.01}) {
    auto const r = compensated_horner(c, t);
    double const exact = std::pow(t - 1, 5);
    EXPECT_LE(std::fabs(r.value - exact), r.error_bound + 1e-30) << t;
  }
}

TEST(Eft, AbsProduct) {
  std::vector<double> const xs{-3.0, 0.5, -2.0};
  EXPECT_EQ(compensated_abs_product(xs), 3.0);
}
