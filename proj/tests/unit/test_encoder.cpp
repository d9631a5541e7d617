// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "molfield/encoder.hpp"
#include "molfield/error.hpp"
#include "test_support.hpp"

namespace molfield {
namespace {

EncoderConfig small_config() {
  EncoderConfig c;
  c.input_dims = {6, 5, 7};
  c.in_channels = 2;
  c.widths = {3, 4};
  c.latent_dim = 5;
  return c;
}

TEST(Encoder, Downsampled) {
  EXPECT_EQ(downsampled({32, 32, 32}), (std::array<int, 3>{16, 16, 16}));
  EXPECT_EQ(downsampled({5, 6, 7}), (std::array<int, 3>{3, 3, 4}));
}

TEST(Encoder, LayoutAndInit) {
  const auto e = init_encoder(EncoderConfig{}, 1);
  ASSERT_EQ(e.tensors().size(), 8u);
  EXPECT_EQ(e.tensors()[0].name, "conv.0.weight");
  EXPECT_EQ(e.tensors()[0].dims, (std::vector<int>{16, 1, 3, 3, 3}));
  EXPECT_EQ(e.tensors()[6].dims, (std::vector<int>{128, 64}));
  EXPECT_TRUE(init_encoder(EncoderConfig{}, 1) == e);
  EXPECT_FALSE(init_encoder(EncoderConfig{}, 2) == e);
  const double lim = std::sqrt(6.0 / 27.0);
  for (std::size_t i = 0; i < e.tensors()[0].size; ++i) EXPECT_LE(std::abs(e.parameters()[i]), lim);
}

TEST(Encoder, ZeroVolumeZeroLatent) {
  EncoderConfig c;
  c.input_dims = {32, 32, 32};
  const auto e = init_encoder(c, 3);
  GridSpec g;
  g.dims = c.input_dims;
  const VolumeGrid zero(g, 1);
  const auto z = encode(e, zero);
  ASSERT_EQ(z.size(), 128u);
  for (double v : z.values) EXPECT_EQ(v, 0.0);
}

TEST(Encoder, DeterministicAndShapeChecked) {
  const auto c = small_config();
  const auto e = init_encoder(c, 4);
  std::mt19937_64 rng(1);
  const auto v = testing::random_volume(rng, c.input_dims, 2);
  EXPECT_EQ(encode(e, v), encode(e, v));
  const auto wrong_dims = testing::random_volume(rng, {6, 5, 6}, 2);
  EXPECT_THROW(encode(e, wrong_dims), ShapeError);
  const auto wrong_channels = testing::random_volume(rng, c.input_dims, 1);
  EXPECT_THROW(encode(e, wrong_channels), ShapeError);
}

TEST(Encoder, ConfigValidation) {
  EncoderConfig c;
  c.widths.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = EncoderConfig{};
  c.input_dims = {0, 4, 4};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Encoder, FiniteDifferences) {
  const auto c = small_config();
  auto e = init_encoder(c, 9);
  std::mt19937_64 rng(2);
  // Positive biases keep most relus active so the check sees every path.
  for (int s = 0; s < 2; ++s) {
    for (int k = 0; k < c.widths[s]; ++k) e.parameters()[e.conv_bias_offset(s) + k] = 0.2;
  }
  auto v = testing::random_volume(rng, c.input_dims, 2);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> up(c.latent_dim);
  for (double& u : up) u = n(rng);
  auto objective = [&] {
    const auto z = encode(e, v);
    double s = 0;
    for (int i = 0; i < c.latent_dim; ++i) s += z.values[i] * up[i];
    return s;
  };
  const auto g = encode_backward(e, v, up);
  const double h = 1e-6;
  auto params = e.parameters();
  int checked = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params[i];
    params[i] = orig + h;
    const double fp = objective();
    params[i] = orig - h;
    const double fm = objective();
    params[i] = orig;
    const double fd = (fp - fm) / (2 * h);
    if (std::abs(fd) < 1e-8 && std::abs(g.parameters[i]) < 1e-8) continue;
    EXPECT_LE(testing::relative_error(fd, g.parameters[i]), 1e-4) << "parameter " << i;
    ++checked;
  }
  EXPECT_GT(checked, static_cast<int>(params.size()) / 2);
  for (std::size_t i = 0; i < v.data.size(); i += 7) {
    const double orig = v.data[i];
    v.data[i] = orig + h;
    const double fp = objective();
    v.data[i] = orig - h;
    const double fm = objective();
    v.data[i] = orig;
    const double fd = (fp - fm) / (2 * h);
    if (std::abs(fd) < 1e-8 && std::abs(g.input[i]) < 1e-8) continue;
    EXPECT_LE(testing::relative_error(fd, g.input[i]), 1e-4) << "input " << i;
  }
}

}  // namespace
}  // namespace molfield
