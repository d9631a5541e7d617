// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Cached encoder activations for back-propagation. Internal header.

#pragma once

#include <span>
#include <vector>

#include "molfield/encoder.hpp"

namespace molfield::detail {

struct EncoderTape {
  std::vector<std::array<int, 3>> dims;   // dims[0] = input, dims[i+1] = stage i output
  std::vector<std::vector<double>> cols;  // im2col matrix per stage
  std::vector<std::vector<double>> pre;   // pre-activation per stage
  std::vector<std::vector<double>> act;   // relu(pre) per stage
  std::vector<double> pooled;
  std::vector<double> latent;
};

EncoderTape encode_forward(const ConvEncoder& encoder, std::span<const double> volume);

/// Accumulates into dparams; writes the input gradient when dinput is not null.
void encode_backward(const ConvEncoder& encoder, const EncoderTape& tape,
                     std::span<const double> dlatent, double* dparams, double* dinput);

}  // namespace molfield::detail
