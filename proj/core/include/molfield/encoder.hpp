// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// 3D convolutional encoder: volume -> latent code.
//
// Each stage is a 3x3x3 convolution with stride 2 and zero padding 1
// followed by relu; the last stage is averaged over all voxels and mapped
// to the latent with a linear layer.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "molfield/fieldgen.hpp"
#include "molfield/neuralfield.hpp"

namespace molfield {

struct EncoderConfig {
  std::array<int, 3> input_dims{32, 32, 32};
  int in_channels = 1;
  std::vector<int> widths{16, 32, 64};
  int latent_dim = 128;

  void validate() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Voxel dims after one stride-2, pad-1, kernel-3 convolution.
inline std::array<int, 3> downsampled(std::array<int, 3> dims) {
  return {(dims[0] - 1) / 2 + 1, (dims[1] - 1) / 2 + 1, (dims[2] - 1) / 2 + 1};
}

/// Parameters in declaration order: conv.i (weight [out, in, 3, 3, 3], bias)
/// per stage, then linear (weight [latent, last width], bias).
class ConvEncoder {
 public:
  explicit ConvEncoder(const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }
  const std::vector<TensorInfo>& tensors() const { return layout_.tensors(); }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  std::size_t conv_weight_offset(int stage) const { return conv_w_[stage]; }
  std::size_t conv_bias_offset(int stage) const { return conv_b_[stage]; }
  std::size_t linear_weight_offset() const { return lin_w_; }
  std::size_t linear_bias_offset() const { return lin_b_; }

  friend bool operator==(const ConvEncoder& a, const ConvEncoder& b) {
    return a.config_ == b.config_ && a.params_ == b.params_;
  }

 private:
  EncoderConfig config_;
  ParameterLayout layout_;
  std::vector<double> params_;
  std::vector<std::size_t> conv_w_, conv_b_;
  std::size_t lin_w_ = 0, lin_b_ = 0;
};

/// Weights U(-sqrt(6/fan_in), +sqrt(6/fan_in)), biases zero.
ConvEncoder init_encoder(const EncoderConfig& config, std::uint64_t seed);

/// Throws ShapeError unless the volume matches the configured dims and channels.
LatentCode encode(const ConvEncoder& encoder, const VolumeGrid& volume);

struct EncoderGradients {
  std::vector<double> parameters;
  /// Gradient with respect to the volume samples, same layout as VolumeGrid::data.
  std::vector<double> input;
};

/// Vector-Jacobian product of `encode` with `dlatent`.
EncoderGradients encode_backward(const ConvEncoder& encoder, const VolumeGrid& volume,
                                 std::span<const double> dlatent);

}  // namespace molfield
