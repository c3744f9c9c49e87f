#include <gtest/gtest.h>

#include <random>

#include "gdrate/model.hpp"

namespace gdrate {
namespace {

TEST(FunctionClass, Validation) {
  FunctionClass fc(1.0, 10.0);
  EXPECT_DOUBLE_EQ(fc.kappa(), 10.0);
  EXPECT_THROW(FunctionClass(1.0, 0.5), InvalidInput);
  EXPECT_THROW(FunctionClass(0.0, 1.0), InvalidInput);
  EXPECT_THROW(FunctionClass(-1.0, 1.0), InvalidInput);
  EXPECT_NO_THROW(FunctionClass(2.0, 2.0));
}

TEST(IntervalFromC, Examples) {
  FunctionClass fc(1.0, 10.0);
  auto a = interval_from_c(fc, 1.0);
  EXPECT_DOUBLE_EQ(a.lo(), 0.1);
  EXPECT_DOUBLE_EQ(a.hi(), 0.1);
  EXPECT_TRUE(a.degenerate());

  auto b = interval_from_c(fc, 1.4);
  EXPECT_DOUBLE_EQ(b.lo(), 1.0 / 14.0);
  EXPECT_DOUBLE_EQ(b.hi(), 0.14);

  EXPECT_THROW(interval_from_c(fc, 0.5), InvalidC);
}

TEST(IntervalAsymmetric, Examples) {
  FunctionClass fc(1.0, 10.0);
  auto a = interval_asymmetric(fc, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(a.lo(), 0.1);
  EXPECT_DOUBLE_EQ(a.hi(), 0.1);
  auto b = interval_asymmetric(fc, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(b.lo(), 0.05);
  EXPECT_DOUBLE_EQ(b.hi(), 0.1);
  EXPECT_THROW(interval_asymmetric(fc, 0.5, 0.1), InvalidC);
  EXPECT_THROW(interval_asymmetric(fc, -1.0, 2.0), InvalidC);
}

TEST(IntervalFromC, MatchesSymmetricAsymmetricForm) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    FunctionClass fc(0.1 + u(gen), 1.2 + 100.0 * u(gen));
    const double c = 1.0 + 3.0 * u(gen);
    EXPECT_EQ(interval_from_c(fc, c), interval_asymmetric(fc, c, c));
  }
}

TEST(IntervalFromC, ScaleCovariance) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 + u(gen), L = m * (1.0 + 50.0 * u(gen)), c = 1.0 + u(gen), s = 0.1 + 10.0 * u(gen);
    auto base = interval_from_c(FunctionClass(m, L), c);
    auto scaled = interval_from_c(FunctionClass(m * s, L * s), c);
    EXPECT_NEAR(scaled.lo(), base.lo() / s, 1e-14 * base.lo() / s);
    EXPECT_NEAR(scaled.hi(), base.hi() / s, 1e-14 * base.hi() / s);
  }
}

TEST(MakeGrid, Examples) {
  StepSizeInterval iv(0.1, 0.14);
  auto g2 = make_grid(iv, 2);
  ASSERT_EQ(g2.size(), 2u);
  EXPECT_EQ(g2.points()[0], 0.1);
  EXPECT_EQ(g2.points()[1], 0.14);

  auto g1 = make_grid(StepSizeInterval(0.1, 0.1), 10);
  ASSERT_EQ(g1.size(), 1u);
  EXPECT_EQ(g1.points()[0], 0.1);

  auto g5 = make_grid(iv, 5);
  ASSERT_EQ(g5.size(), 5u);
  const double expect[] = {0.1, 0.11, 0.12, 0.13, 0.14};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(g5.points()[i], expect[i], 1e-15);

  auto mid = make_grid(iv, 1);
  ASSERT_EQ(mid.size(), 1u);
  EXPECT_DOUBLE_EQ(mid.points()[0], 0.12);

  EXPECT_THROW(make_grid(iv, 0), InvalidInput);
}

TEST(MakeGrid, PointsInsideAndStrictlyIncreasing) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 200);
  for (int i = 0; i < 500; ++i) {
    const double lo = 1e-3 + u(gen);
    const double hi = lo + (i % 7 == 0 ? 1e-14 : u(gen));
    StepSizeInterval iv(lo, hi);
    const int n = count(gen);
    auto g = make_grid(iv, n);
    ASSERT_GE(g.size(), 1u);
    for (std::size_t k = 0; k < g.size(); ++k) {
      EXPECT_TRUE(iv.contains(g.points()[k]));
      if (k > 0) {
        EXPECT_LT(g.points()[k - 1], g.points()[k]);
      }
    }
    if (n >= 2) {
      EXPECT_EQ(g.points().front(), lo);
      EXPECT_EQ(g.points().back(), hi);
    }
  }
}

TEST(Plant, GradientDescent) {
  auto p = gradient_descent_plant();
  EXPECT_EQ(p.a, 1.0);
  EXPECT_EQ(p.c, 1.0);
  EXPECT_EQ(p.d, 0.0);
  EXPECT_DOUBLE_EQ(p.b(0.1), -0.1);
}

}  // namespace
}  // namespace gdrate
