// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Multi-channel molecular fields.
//
// Channel t of the field at point p is
//
//   f_t(p) = sum_{atoms a matching t} exp(-beta * (|a - p|^2 / r_a^2 - 1))
//
// where r_a is the atom's van der Waals radius, or, for channels built on
// another atomistic property (electronegativity, Wigner-Seitz density), that
// property's value used in place of the radius. Each atom contributes e^beta
// at its centre and exactly 1 at distance r_a.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molfield/elements.hpp"
#include "molfield/molio.hpp"
#include "molfield/vec3.hpp"

namespace molfield {

inline constexpr double kDefaultBeta = 2.0;
inline constexpr double kDefaultPadding = 2.0;

/// How the per-atom scalar enters the field: as a true radius, or as an
/// atomistic property substituted for the radius.
enum class WeightMode { kRadiusAsRa, kPropertyAsRa };

struct Channel {
  std::string name;
  /// Normalized element symbols; empty means every element ('*').
  std::vector<std::string> elements;
  /// Required entity tag; empty matches any atom.
  std::string entity;
  Property source = Property::kVdwRadius;

  bool matches(const Atom& atom) const;
  WeightMode weight_mode() const {
    return source == Property::kVdwRadius ? WeightMode::kRadiusAsRa : WeightMode::kPropertyAsRa;
  }
};

struct ChannelSpec {
  std::vector<Channel> channels;
  double beta = kDefaultBeta;

  std::size_t size() const { return channels.size(); }
  std::vector<std::string> names() const;
  /// Throws ConfigError: no channels, beta <= 0, duplicate names.
  void validate() const;
};

/// Parses the channel config text:
///
///   # comment
///   beta 2.0
///   <name> <elements|*> [entity=<tag>] [source=vdw_radius|electronegativity|ws_density]
///
/// Elements are comma separated ("C,N,O").
ChannelSpec parse_channel_spec(std::string_view text);
std::string format_channel_spec(const ChannelSpec& spec);

struct GridSpec {
  std::array<int, 3> dims{2, 2, 2};
  /// World position of voxel (0,0,0), Å.
  Vec3 origin;
  /// Å per voxel step along x, y, z.
  Vec3 spacing{1.0, 1.0, 1.0};

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  Vec3 point(int i, int j, int k) const {
    return {origin.x + i * spacing.x, origin.y + j * spacing.y, origin.z + k * spacing.z};
  }
  /// World position of the last voxel.
  Vec3 far_corner() const { return point(dims[0] - 1, dims[1] - 1, dims[2] - 1); }
  /// Throws ConfigError: any dim < 2, non-positive or non-finite spacing.
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Grid with the same world-space corners as `base` and `dims` voxels per axis.
GridSpec regrid(const GridSpec& base, std::array<int, 3> dims);

/// d-channel samples on a GridSpec. Layout is channel-major, then z, y, and
/// x fastest: index = ((t * nz + k) * ny + j) * nx + i.
struct VolumeGrid {
  GridSpec spec;
  int channels = 0;
  std::vector<double> data;

  VolumeGrid() = default;
  VolumeGrid(const GridSpec& grid, int num_channels);

  std::size_t index(int t, int i, int j, int k) const {
    return ((static_cast<std::size_t>(t) * spec.dims[2] + k) * spec.dims[1] + j) *
               spec.dims[0] + i;
  }
  double& at(int t, int i, int j, int k) { return data[index(t, i, j, k)]; }
  double at(int t, int i, int j, int k) const { return data[index(t, i, j, k)]; }

  std::span<double> channel(int t) {
    return {data.data() + static_cast<std::size_t>(t) * spec.voxel_count(), spec.voxel_count()};
  }
  std::span<const double> channel(int t) const {
    return {data.data() + static_cast<std::size_t>(t) * spec.voxel_count(), spec.voxel_count()};
  }
};

/// Field value at one point, one entry per channel.
std::vector<double> eval_field(const Molecule& molecule, const ChannelSpec& spec, Vec3 point,
                               const ElementTable& table = ElementTable::builtin());

/// Axis-aligned bounding box of the atoms grown by `padding` on each side,
/// then made cubic around its centre using the largest extent.
GridSpec auto_grid(const Molecule& molecule, std::array<int, 3> dims,
                   double padding = kDefaultPadding);

/// Cubic grid of edge `extent` centred at `center`.
GridSpec cubic_grid(Vec3 center, double extent, std::array<int, 3> dims);

/// Centre and cubic edge length that auto_grid would use.
struct BoundingCube {
  Vec3 center;
  double extent = 0.0;
};
BoundingCube bounding_cube(const Molecule& molecule, double padding = kDefaultPadding);

struct SampleOptions {
  /// Per-atom contributions below this are skipped; 0 samples exactly.
  double cull_epsilon = 0.0;
};

VolumeGrid sample_grid(const Molecule& molecule, const ChannelSpec& spec, const GridSpec& grid,
                       const SampleOptions& options = {},
                       const ElementTable& table = ElementTable::builtin());

/// Distance beyond which one atom's contribution is <= epsilon:
/// r_a * sqrt(1 + ln(1/epsilon) / beta), or 0 when epsilon >= e^beta.
double cull_radius(double beta, double r_a, double epsilon);

}  // namespace molfield
