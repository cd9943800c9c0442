#include <gtest/gtest.h>

#include <cmath>

#include "cqr/random.hpp"

TEST(StreamRng, SameSeedAndStreamRepeat) {
  cqr::StreamRng a(7, 3), b(7, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(StreamRng, StreamsDiffer) {
  cqr::StreamRng a(7, 3), b(7, 4), c(8, 3);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    same_b += x == b.next();
    same_c += x == c.next();
  }
  EXPECT_EQ(same_b, 0);
  EXPECT_EQ(same_c, 0);
}

TEST(StreamRng, UniformInOpenInterval) {
  cqr::StreamRng r(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(StreamRng, ExponentialHasUnitMeanAndVariance) {
  cqr::StreamRng r(2, 9);
  const int n = 400000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.exponential();
    ASSERT_GT(x, 0.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.03);
}
