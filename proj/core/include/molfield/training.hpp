// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Fitting modulated fields to sampled volumes.
//
// Both modes minimize the mean squared error over minibatches of
// (volume, voxel) pairs. Auto-decoding optimizes one free latent per volume
// alongside the network; auto-encoding produces latents with a ConvEncoder
// trained jointly with the network.
//
// Volumes are visited in a canonical order keyed on their content, so the
// trained model does not depend on the order in which volumes are passed.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "molfield/adam.hpp"
#include "molfield/encoder.hpp"
#include "molfield/fieldgen.hpp"
#include "molfield/neuralfield.hpp"

namespace molfield {

enum class TrainMode { kAutoDecoder, kAutoEncoder };

struct TrainConfig {
  TrainMode mode = TrainMode::kAutoDecoder;
  int steps = 5000;
  double learning_rate = 1e-4;
  double latent_learning_rate = 1e-3;
  int batch_voxels = 4096;
  std::uint64_t seed = 0;
  double latent_init_scale = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  Precision precision = Precision::kFloat64;

  void validate() const;
};

/// Everything needed to continue training bit-identically.
struct TrainState {
  TrainMode mode = TrainMode::kAutoDecoder;
  ModulatedField net{NetConfig{}};
  /// One per input volume, in input order. For auto-encoding these are the
  /// encoder outputs at the last completed step.
  std::vector<LatentCode> latents;
  std::optional<ConvEncoder> encoder;
  Adam net_optimizer;
  /// Latent table (auto-decoder) or encoder parameters (auto-encoder).
  Adam aux_optimizer;
  std::int64_t step = 0;
  std::vector<double> loss_history;
};

/// Step-by-step trainer. Keeps a reference to the volumes.
class Trainer {
 public:
  /// Fresh state. `encoder` defaults to EncoderConfig with the volume dims,
  /// channel count and the network's latent size.
  Trainer(std::span<const VolumeGrid> volumes, const TrainConfig& config,
          const NetConfig& net_config, std::optional<EncoderConfig> encoder = std::nullopt);

  /// Continues from a saved state; `config.steps` is the total step target.
  Trainer(std::span<const VolumeGrid> volumes, const TrainConfig& config, TrainState state);

  Trainer(Trainer&&) noexcept;
  Trainer& operator=(Trainer&&) noexcept;
  ~Trainer();

  /// One optimizer step; returns the minibatch loss before the update.
  /// Throws Error on a non-finite loss, naming the step.
  double step();

  /// Steps until state().step == config.steps. The callback sees every loss.
  void run(const std::function<void(std::int64_t step, double loss)>& on_step = {});

  const TrainState& state() const;
  TrainState release() &&;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct AutoDecoderResult {
  ModulatedField net;
  std::vector<LatentCode> latents;
  std::vector<double> loss_history;
};

struct AutoEncoderResult {
  ModulatedField net;
  ConvEncoder encoder;
  std::vector<double> loss_history;
};

AutoDecoderResult train_auto_decoder(std::span<const VolumeGrid> volumes,
                                     const TrainConfig& config, const NetConfig& net_config);

AutoEncoderResult train_auto_encoder(std::span<const VolumeGrid> volumes,
                                     const TrainConfig& config, const NetConfig& net_config,
                                     std::optional<EncoderConfig> encoder = std::nullopt);

/// Network output at the voxel centres of `grid` (any dims), one channel per
/// output. Values are not clamped.
VolumeGrid reconstruct(const ModulatedField& net, const LatentCode& latent, const GridSpec& grid,
                       Precision precision = Precision::kFloat64);

/// Minibatch MSE and its gradient for one step's worth of (volume, voxel)
/// pairs under explicit latents. Exposed for gradient checking.
struct LossGradient {
  double loss = 0.0;
  std::vector<double> parameters;
  std::vector<std::vector<double>> latents;  // one per entry of `latents`
};
struct VoxelRef {
  std::uint32_t volume;
  std::uint32_t voxel;
};
LossGradient loss_gradient(const ModulatedField& net, std::span<const LatentCode> latents,
                           std::span<const VolumeGrid> volumes, std::span<const VoxelRef> batch,
                           Precision precision = Precision::kFloat64);

}  // namespace molfield
