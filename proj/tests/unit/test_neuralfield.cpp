// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "molfield/error.hpp"
#include "molfield/neuralfield.hpp"
#include "test_support.hpp"

namespace molfield {
namespace {

NetConfig tiny(int width = 8, int layers = 2, int out = 2, int latent = 5) {
  NetConfig c;
  c.hidden_width = width;
  c.num_hidden_layers = layers;
  c.out_dim = out;
  c.latent_dim = latent;
  return c;
}

std::vector<Vec3> random_points(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> p;
  for (int i = 0; i < n; ++i) p.push_back({u(rng), u(rng), u(rng)});
  return p;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TEST(Init, DeterministicAndSeeded) {
  const auto c = tiny();
  EXPECT_TRUE(init_network(c, 3) == init_network(c, 3));
  EXPECT_FALSE(init_network(c, 3) == init_network(c, 4));
}

TEST(Init, Ranges) {
  NetConfig c = tiny(32, 3, 2, 16);
  const auto net = init_network(c, 0);
  const double* w0 = net.synthesis_weight(0);
  for (int i = 0; i < 32 * 3; ++i) {
    EXPECT_GT(w0[i], -1.0 / 3.0);
    EXPECT_LT(w0[i], 1.0 / 3.0);
  }
  const double lim1 = std::sqrt(6.0 / 32) / c.omega0;
  for (int i = 0; i < 32 * 32; ++i) EXPECT_LE(std::abs(net.synthesis_weight(1)[i]), lim1);
  const double lim_mod = std::sqrt(6.0 / (32 + 16));
  for (int i = 0; i < 32 * 48; ++i) EXPECT_LE(std::abs(net.modulator_weight(1)[i]), lim_mod);
  for (const auto& t : net.tensors()) {
    if (t.name.ends_with("bias")) {
      for (std::size_t i = 0; i < t.size; ++i) EXPECT_EQ(net.parameters()[t.offset + i], 0.0);
    }
  }
}

TEST(Layout, DeclarationOrder) {
  const auto net = init_network(tiny(4, 2, 3, 2), 0);
  std::vector<std::string> names;
  for (const auto& t : net.tensors()) names.push_back(t.name);
  EXPECT_EQ(names, (std::vector<std::string>{
                       "synthesis.0.weight", "synthesis.0.bias", "synthesis.1.weight",
                       "synthesis.1.bias", "modulator.0.weight", "modulator.0.bias",
                       "modulator.1.weight", "modulator.1.bias", "output.weight", "output.bias"}));
  EXPECT_EQ(net.tensors()[6].dims, (std::vector<int>{4, 6}));
}

TEST(Config, Validate) {
  NetConfig c;
  c.hidden_width = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = NetConfig{};
  c.omega0 = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Forward, ClosedGateGivesOutputBias) {
  auto net = init_network(tiny(), 1);
  auto p = net.parameters();
  p[net.output_bias_offset()] = 0.25;
  p[net.output_bias_offset() + 1] = -1.5;
  LatentCode zero{std::vector<double>(5, 0.0)};
  std::mt19937_64 rng(1);
  const auto y = forward(net, zero, random_points(rng, 9));
  ASSERT_EQ(y.size(), 18u);
  for (int i = 0; i < 9; ++i) {
    EXPECT_EQ(y[2 * i], 0.25);
    EXPECT_EQ(y[2 * i + 1], -1.5);
  }
}

TEST(Forward, MatchesScalarDefinition) {
  const auto c = tiny(6, 3, 2, 4);
  const auto net = init_network(c, 7);
  std::mt19937_64 rng(2);
  const auto z = testing::random_latent(rng, 4);
  const auto pts = random_points(rng, 5);
  const auto y = forward(net, z, pts);
  const int W = 6;
  std::vector<std::vector<double>> m(3, std::vector<double>(W));
  for (int i = 0; i < 3; ++i) {
    const int fan = i == 0 ? 4 : W + 4;
    for (int r = 0; r < W; ++r) {
      double s = net.modulator_bias(i)[r];
      for (int k = 0; k < fan; ++k) {
        const double in = i == 0 ? z.values[k] : (k < W ? m[i - 1][k] : z.values[k - W]);
        s += net.modulator_weight(i)[r * fan + k] * in;
      }
      m[i][r] = std::max(0.0, s);
    }
  }
  for (std::size_t n = 0; n < pts.size(); ++n) {
    std::vector<double> h{pts[n].x, pts[n].y, pts[n].z};
    for (int i = 0; i < 3; ++i) {
      std::vector<double> next(W);
      const double w = i == 0 ? c.omega0 : 1.0;
      for (int r = 0; r < W; ++r) {
        double s = net.synthesis_bias(i)[r];
        for (std::size_t k = 0; k < h.size(); ++k) s += net.synthesis_weight(i)[r * h.size() + k] * h[k];
        next[r] = m[i][r] * std::sin(w * s);
      }
      h = next;
    }
    for (int o = 0; o < 2; ++o) {
      double s = net.output_bias()[o];
      for (int k = 0; k < W; ++k) s += net.output_weight()[o * W + k] * h[k];
      EXPECT_NEAR(y[n * 2 + o], s, 1e-13);
    }
  }
}

TEST(Forward, BatchIndependence) {
  const auto net = init_network(tiny(40, 3, 3, 6), 2);
  std::mt19937_64 rng(3);
  const auto z = testing::random_latent(rng, 6);
  const auto pts = random_points(rng, 300);
  for (Precision prec : {Precision::kFloat64, Precision::kFloat32}) {
    const auto all = forward(net, z, pts, prec);
    for (std::size_t i : {0ul, 1ul, 150ul, 299ul}) {
      const auto one = forward(net, z, std::span(&pts[i], 1), prec);
      for (int o = 0; o < 3; ++o) EXPECT_EQ(one[o], all[i * 3 + o]);
    }
  }
}

TEST(Forward, Float32CloseToFloat64) {
  const auto net = init_network(tiny(64, 4, 2, 8), 5);
  std::mt19937_64 rng(4);
  const auto z = testing::random_latent(rng, 8, 0.5);
  const auto pts = random_points(rng, 100);
  const auto a = forward(net, z, pts);
  const auto b = forward(net, z, pts, Precision::kFloat32);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-4);
}

TEST(Forward, LatentShapeMismatch) {
  const auto net = init_network(tiny(), 0);
  const std::vector<Vec3> p{{0, 0, 0}};
  EXPECT_THROW(forward(net, LatentCode{{1.0, 2.0}}, p), ShapeError);
  EXPECT_THROW(backward(net, LatentCode{std::vector<double>(5)}, p, std::vector<double>(3)),
               ShapeError);
}

TEST(Backward, FiniteDifferences) {
  const auto c = tiny(8, 2, 2, 5);
  auto net = init_network(c, 11);
  // Open the gates so every parameter gets signal.
  auto params = net.parameters();
  for (const auto& t : net.tensors()) {
    if (!t.name.starts_with("modulator")) continue;
    for (std::size_t k = 0; k < t.size; ++k) {
      double& v = params[t.offset + k];
      v = t.name.ends_with("bias") ? 1.0 : 0.1 * v;
    }
  }
  std::mt19937_64 rng(6);
  auto z = testing::random_latent(rng, 5, 0.2);
  const auto pts = random_points(rng, 7);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> up(pts.size() * 2);
  for (double& u : up) u = n(rng);
  const auto g = backward(net, z, pts, up);
  const double h = 1e-5;
  int checked = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params[i];
    params[i] = orig + h;
    const double fp = dot(forward(net, z, pts), up);
    params[i] = orig - h;
    const double fm = dot(forward(net, z, pts), up);
    params[i] = orig;
    const double fd = (fp - fm) / (2 * h);
    if (std::abs(fd) < 1e-7 && std::abs(g.parameters[i]) < 1e-7) continue;
    EXPECT_LE(testing::relative_error(fd, g.parameters[i]), 1e-4) << "parameter " << i;
    ++checked;
  }
  EXPECT_GT(checked, static_cast<int>(params.size()) * 95 / 100);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double orig = z.values[i];
    z.values[i] = orig + h;
    const double fp = dot(forward(net, z, pts), up);
    z.values[i] = orig - h;
    const double fm = dot(forward(net, z, pts), up);
    z.values[i] = orig;
    EXPECT_LE(testing::relative_error((fp - fm) / (2 * h), g.latent[i]), 1e-4);
  }
}

TEST(Backward, ZeroUpstreamAndBiasColumnSum) {
  const auto net = init_network(tiny(), 2);
  std::mt19937_64 rng(8);
  const auto z = testing::random_latent(rng, 5);
  const auto pts = random_points(rng, 13);
  const auto zero = backward(net, z, pts, std::vector<double>(26, 0.0));
  for (double v : zero.parameters) EXPECT_EQ(v, 0.0);
  for (double v : zero.latent) EXPECT_EQ(v, 0.0);
  std::vector<double> up(26);
  std::uniform_real_distribution<double> u(-1, 1);
  double s0 = 0, s1 = 0;
  for (int i = 0; i < 13; ++i) {
    up[2 * i] = u(rng);
    up[2 * i + 1] = u(rng);
    s0 += up[2 * i];
    s1 += up[2 * i + 1];
  }
  const auto g = backward(net, z, pts, up);
  EXPECT_NEAR(g.parameters[net.output_bias_offset()], s0, 1e-14);
  EXPECT_NEAR(g.parameters[net.output_bias_offset() + 1], s1, 1e-14);
}

TEST(Backward, Deterministic) {
  const auto net = init_network(tiny(48, 3, 2, 8), 3);
  std::mt19937_64 rng(9);
  const auto z = testing::random_latent(rng, 8);
  const auto pts = random_points(rng, 500);
  std::vector<double> up(1000, 0.01);
  const auto a = backward(net, z, pts, up);
  const auto b = backward(net, z, pts, up);
  EXPECT_EQ(a.parameters, b.parameters);
  EXPECT_EQ(a.latent, b.latent);
}

// One synthesis layer, gates forced to 1: y(p) = w_out sin(omega0 (w.p + b)) + b_out
// repeats with period 2 pi / (omega0 |w|) along w.
TEST(Periodicity, SingleLayerWitness) {
  NetConfig c = tiny(1, 1, 1, 1);
  c.omega0 = 7.0;
  auto net = init_network(c, 4);
  auto p = net.parameters();
  p[net.modulator_weight_offset(0)] = 0.0;
  p[net.modulator_bias_offset(0)] = 1.0;
  p[net.synthesis_weight_offset(0)] = 0.3;
  p[net.synthesis_weight_offset(0) + 1] = -0.2;
  p[net.synthesis_weight_offset(0) + 2] = 0.6;
  p[net.synthesis_bias_offset(0)] = 0.1;
  p[net.output_weight_offset()] = 1.0;
  const Vec3 w{0.3, -0.2, 0.6};
  const double norm = std::sqrt(squared_norm(w));
  const double period = 2 * std::numbers::pi / (c.omega0 * norm);
  const Vec3 step = (period / norm) * w;
  const LatentCode z{{0.7}};
  std::mt19937_64 rng(1);
  for (const auto& q : random_points(rng, 10)) {
    const std::vector<Vec3> pair{q, q + step};
    const auto y = forward(net, z, pair);
    EXPECT_NEAR(y[0], y[1], 1e-12);
  }
}

TEST(NormalizePoints, Corners) {
  GridSpec g;
  g.dims = {2, 2, 2};
  const auto p = normalize_points(g);
  ASSERT_EQ(p.size(), 8u);
  EXPECT_EQ(p[0], (Vec3{-1, -1, -1}));
  EXPECT_EQ(p[1], (Vec3{1, -1, -1}));
  EXPECT_EQ(p[7], (Vec3{1, 1, 1}));
}

TEST(NormalizePoints, CentreAndMonotone) {
  GridSpec g;
  g.dims = {3, 3, 3};
  const auto p = normalize_points(g);
  EXPECT_EQ(p[13], (Vec3{0, 0, 0}));
  g.dims = {5, 4, 6};
  const auto q = normalize_points(g);
  for (int i = 1; i < 5; ++i) EXPECT_GT(q[i].x, q[i - 1].x);
  for (int j = 1; j < 4; ++j) EXPECT_GT(q[j * 5].y, q[(j - 1) * 5].y);
  EXPECT_EQ(q.back(), (Vec3{1, 1, 1}));
}

}  // namespace
}  // namespace molfield
