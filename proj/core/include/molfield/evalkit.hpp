// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Reconstruction metrics, super-resolution and latent-space utilities.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molfield/fieldgen.hpp"
#include "molfield/neuralfield.hpp"

namespace molfield {

/// PSNR = 10 log10(peak^2 / mse). The peak is the maximum of the
/// reference volume, so psnr(a, b) and psnr(b, a) generally differ.
/// Zero error reports +infinity.
struct PsnrReport {
  double overall_psnr = 0.0;
  std::vector<double> per_channel_psnr;
  double peak = 0.0;
  double mse = 0.0;
  std::vector<double> per_channel_mse;
};

PsnrReport psnr(const VolumeGrid& reference, const VolumeGrid& test);

/// key=value lines: peak, mse, psnr, then psnr.<channel>/mse.<channel>.
/// Channels are named by index when `names` is empty.
std::string format_psnr_report(const PsnrReport& report,
                               std::span<const std::string> names = {});

/// Reconstruction on a grid with `factor` times the voxels per axis of
/// `base` over the same world-space corners.
VolumeGrid superresolve(const ModulatedField& net, const LatentCode& latent,
                        const GridSpec& base, int factor,
                        Precision precision = Precision::kFloat64);

/// (1 - t) a + t b for t = k / (steps - 1), k = 0..steps-1. The first and
/// last entries are a and b exactly.
std::vector<LatentCode> interpolate_latents(const LatentCode& a, const LatentCode& b, int steps);

/// Comma-separated table: header "name,z0,...,z{n-1}" then one row per
/// latent, values with 17 significant digits.
std::string export_latents(std::span<const LatentCode> latents,
                           std::span<const std::string> names);

struct LatentTable {
  std::vector<std::string> names;
  std::vector<LatentCode> latents;
};

LatentTable parse_latent_table(std::string_view text);

}  // namespace molfield
