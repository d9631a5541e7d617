// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// MNF1 checkpoints. See docs/formats.md for the byte layout.
//
// A network-only file holds the header and parameter tensors followed by an
// END! section. Training checkpoints add latent, encoder, optimizer, loss,
// config and volume sections before END!.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molfield/fieldgen.hpp"
#include "molfield/neuralfield.hpp"
#include "molfield/training.hpp"

namespace molfield {

/// Where a training volume came from and how it was gridded.
struct VolumeInfo {
  std::string name;
  std::vector<std::string> channel_names;
  GridSpec grid;

  friend bool operator==(const VolumeInfo&, const VolumeInfo&) = default;
};

struct Checkpoint {
  TrainState state;
  std::optional<TrainConfig> config;
  std::vector<VolumeInfo> volumes;
};

std::string write_network(const ModulatedField& net);
ModulatedField read_network(std::string_view bytes);

std::string write_checkpoint(const Checkpoint& checkpoint);

/// Accepts network-only files too; the state then has no latents, no
/// optimizer moments and step 0.
Checkpoint read_checkpoint(std::string_view bytes);
Checkpoint read_checkpoint_file(const std::string& path);

}  // namespace molfield
