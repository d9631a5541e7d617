// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "molfield/kernels.hpp"

namespace molfield {
namespace {

template <class T>
std::vector<T> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(u(rng));
  return v;
}

TEST(Sincos, DoubleAccuracy) {
  std::mt19937_64 rng(1);
  for (double range : {1.0, 40.0, 1e4}) {
    const auto x = uniform<double>(rng, 4099, -range, range);
    std::vector<double> s(x.size()), c(x.size());
    kernels::sincos(x.data(), s.data(), c.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_NEAR(s[i], std::sin(x[i]), 4e-16) << x[i];
      EXPECT_NEAR(c[i], std::cos(x[i]), 4e-16) << x[i];
    }
  }
}

TEST(Sincos, FloatAccuracy) {
  std::mt19937_64 rng(2);
  const auto x = uniform<float>(rng, 1031, -60.0, 60.0);
  std::vector<float> s(x.size()), c(x.size());
  kernels::sincos(x.data(), s.data(), c.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(s[i], std::sin(static_cast<double>(x[i])), 3e-7);
    EXPECT_NEAR(c[i], std::cos(static_cast<double>(x[i])), 3e-7);
  }
}

TEST(Sincos, SpecialValues) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> x{0.0, -0.0, inf, -inf, std::nan("")};
  std::vector<double> s(x.size()), c(x.size());
  kernels::sincos(x.data(), s.data(), c.data(), x.size());
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(c[0], 1.0);
  for (std::size_t i = 2; i < x.size(); ++i) {
    EXPECT_TRUE(std::isnan(s[i]));
    EXPECT_TRUE(std::isnan(c[i]));
  }
  std::vector<double> s2(x.size());
  kernels::sin(x.data(), s2.data(), 2);
  EXPECT_EQ(s2[0], 0.0);
}

template <class T>
void check_affine(int rows, int inner, int points, double tol) {
  std::mt19937_64 rng(rows * 131 + inner * 7 + points);
  const auto w = uniform<T>(rng, static_cast<std::size_t>(rows) * inner, -1, 1);
  const auto b = uniform<T>(rng, rows, -1, 1);
  const std::size_t ldx = points + 3;
  const auto x = uniform<T>(rng, inner * ldx, -1, 1);
  const std::size_t ldo = points + 5;
  std::vector<T> out(rows * ldo, T(-7));
  kernels::affine_rows<T>(w.data(), b.data(), rows, inner, x.data(), ldx, out.data(), ldo, points);
  for (int m = 0; m < rows; ++m) {
    for (int n = 0; n < points; ++n) {
      long double ref = b[m];
      for (int k = 0; k < inner; ++k) ref += static_cast<long double>(w[m * inner + k]) * x[k * ldx + n];
      EXPECT_NEAR(out[m * ldo + n], static_cast<double>(ref), tol);
    }
    for (std::size_t n = points; n < ldo; ++n) EXPECT_EQ(out[m * ldo + n], T(-7));
  }
}

TEST(Affine, MatchesNaive) {
  for (int rows : {1, 5, 6, 13}) {
    for (int inner : {1, 3, 64}) {
      for (int points : {1, 31, 64, 130}) {
        check_affine<double>(rows, inner, points, 1e-13);
        check_affine<float>(rows, inner, points, 1e-4);
      }
    }
  }
}

// Each output element must not depend on how the points are split.
TEST(Affine, PartitionInvariant) {
  std::mt19937_64 rng(9);
  const int rows = 17, inner = 40, points = 301;
  const auto w = uniform<double>(rng, rows * inner, -1, 1);
  const auto x = uniform<double>(rng, inner * points, -1, 1);
  std::vector<double> whole(rows * points), parts(rows * points);
  kernels::affine_rows<double>(w.data(), nullptr, rows, inner, x.data(), points, whole.data(),
                               points, points);
  for (int start = 0; start < points;) {
    const int n = std::min(points - start, 1 + (start * 7) % 45);
    kernels::affine_rows<double>(w.data(), nullptr, rows, inner, x.data() + start, points,
                                 parts.data() + start, points, n);
    start += n;
  }
  EXPECT_EQ(whole, parts);
}

TEST(AccumulateOuter, MatchesNaive) {
  std::mt19937_64 rng(4);
  for (int points : {1, 7, 64, 200}) {
    const int rows = 9, inner = 11;
    const auto dz = uniform<double>(rng, rows * points, -1, 1);
    const auto x = uniform<double>(rng, inner * points, -1, 1);
    std::vector<double> dw(rows * inner, 0.5);
    kernels::accumulate_outer<double>(dz.data(), points, rows, x.data(), points, inner, points,
                                      dw.data());
    for (int m = 0; m < rows; ++m) {
      for (int k = 0; k < inner; ++k) {
        double ref = 0.5;
        for (int n = 0; n < points; ++n) ref += dz[m * points + n] * x[k * points + n];
        EXPECT_NEAR(dw[m * inner + k], ref, 1e-12);
      }
    }
  }
}

}  // namespace
}  // namespace molfield
