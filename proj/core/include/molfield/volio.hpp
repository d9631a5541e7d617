// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// MVF1 volume files and Gaussian cube export.
//
// MVF1 layout, all integers unsigned 32-bit and all values little-endian:
//
//   "MVF1" | version (=1) | nx ny nz | channels
//   origin xyz (binary64) | spacing xyz (binary64)
//   channels x { name length | UTF-8 bytes }
//   channels * nx * ny * nz binary32 samples, channel-major then z, y, x fastest

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "molfield/fieldgen.hpp"
#include "molfield/molio.hpp"

namespace molfield {

inline constexpr std::uint32_t kVolumeFormatVersion = 1;

/// Å to bohr, 1 / 0.529177249.
inline constexpr double kBohrPerAngstrom = 1.8897259886;

struct NamedVolume {
  VolumeGrid volume;
  std::vector<std::string> channel_names;
};

std::string write_volume(const VolumeGrid& volume, const std::vector<std::string>& names);
NamedVolume read_volume(std::string_view bytes);

/// Size in bytes of the MVF1 header for these channel names.
std::size_t volume_header_size(const std::vector<std::string>& names);

NamedVolume read_volume_file(const std::string& path);

/// Single-channel Gaussian cube text. Lengths are converted to bohr; atoms
/// with unknown elements are written with atomic number 0.
std::string export_cube(const VolumeGrid& volume, int channel, const Molecule& molecule,
                        std::string_view comment = "molfield volume");

}  // namespace molfield
