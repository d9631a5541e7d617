// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/volio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "molfield/elements.hpp"
#include "molfield/error.hpp"

namespace molfield {

std::size_t volume_header_size(const std::vector<std::string>& names) {
  std::size_t n = 4 + 4 + 3 * 4 + 4 + 6 * 8;
  for (const auto& s : names) n += 4 + s.size();
  return n;
}

std::string write_volume(const VolumeGrid& volume, const std::vector<std::string>& names) {
  if (names.size() != static_cast<std::size_t>(volume.channels)) {
    throw ShapeError("need one name per channel: " + std::to_string(names.size()) + " names for " +
                     std::to_string(volume.channels) + " channels");
  }
  if (volume.data.size() != volume.spec.voxel_count() * volume.channels) {
    throw ShapeError("volume data length does not match its grid");
  }
  detail::ByteWriter w;
  w.buffer().reserve(volume_header_size(names) + 4 * volume.data.size());
  w.tag("MVF1");
  w.u32(kVolumeFormatVersion);
  for (int d : volume.spec.dims) w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(volume.channels));
  for (int a = 0; a < 3; ++a) w.f64(volume.spec.origin[a]);
  for (int a = 0; a < 3; ++a) w.f64(volume.spec.spacing[a]);
  for (const auto& n : names) w.str(n);
  for (double v : volume.data) w.f32(static_cast<float>(v));
  return w.take();
}

NamedVolume read_volume(std::string_view bytes) {
  detail::ByteReader r(bytes, "MVF1 volume");
  if (r.tag() != "MVF1") throw FormatError("not an MVF1 volume (bad magic)");
  const auto version = r.u32();
  if (version != kVolumeFormatVersion) {
    throw FormatError("unsupported MVF1 version " + std::to_string(version));
  }
  GridSpec spec;
  for (int a = 0; a < 3; ++a) {
    const auto d = r.u32();
    if (d == 0 || d > (1u << 16)) throw FormatError("MVF1 dims out of range");
    spec.dims[a] = static_cast<int>(d);
  }
  const auto channels = r.u32();
  if (channels == 0 || channels > (1u << 16)) throw FormatError("MVF1 channel count out of range");
  for (int a = 0; a < 3; ++a) spec.origin[a] = r.f64();
  for (int a = 0; a < 3; ++a) spec.spacing[a] = r.f64();
  NamedVolume out;
  for (std::uint32_t c = 0; c < channels; ++c) out.channel_names.push_back(r.str());
  const std::size_t count = spec.voxel_count() * channels;
  if (r.remaining() < 4 * count) {
    throw FormatError("MVF1 volume truncated: expected " + std::to_string(4 * count) +
                      " data bytes, found " + std::to_string(r.remaining()));
  }
  out.volume.spec = spec;
  out.volume.channels = static_cast<int>(channels);
  out.volume.data.resize(count);
  for (auto& v : out.volume.data) v = r.f32();
  if (!r.done()) throw FormatError("trailing bytes after MVF1 data");
  return out;
}

NamedVolume read_volume_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return read_volume(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string export_cube(const VolumeGrid& volume, int channel, const Molecule& molecule,
                        std::string_view comment) {
  if (channel < 0 || channel >= volume.channels) {
    throw ShapeError("channel " + std::to_string(channel) + " out of range (volume has " +
                     std::to_string(volume.channels) + ")");
  }
  const auto& g = volume.spec;
  const double b = kBohrPerAngstrom;
  std::string out;
  char line[160];
  out += std::string(comment) + "\n";
  out += "channel " + std::to_string(channel) + ", x-outer z-inner\n";
  std::snprintf(line, sizeof line, "%5d%12.6f%12.6f%12.6f\n", static_cast<int>(molecule.size()),
                g.origin.x * b, g.origin.y * b, g.origin.z * b);
  out += line;
  for (int a = 0; a < 3; ++a) {
    double step[3] = {0.0, 0.0, 0.0};
    step[a] = g.spacing[a] * b;
    std::snprintf(line, sizeof line, "%5d%12.6f%12.6f%12.6f\n", g.dims[a], step[0], step[1],
                  step[2]);
    out += line;
  }
  for (const Atom& atom : molecule.atoms) {
    const int z = atom.known_element ? atomic_number(atom.element) : 0;
    std::snprintf(line, sizeof line, "%5d%12.6f%12.6f%12.6f%12.6f\n", z, 0.0,
                  atom.position.x * b, atom.position.y * b, atom.position.z * b);
    out += line;
  }
  // Six values per line; every z-run starts a new line.
  for (int i = 0; i < g.dims[0]; ++i) {
    for (int j = 0; j < g.dims[1]; ++j) {
      for (int k = 0; k < g.dims[2]; ++k) {
        std::snprintf(line, sizeof line, " %12.5E", volume.at(channel, i, j, k));
        out += line;
        if (k % 6 == 5 || k == g.dims[2] - 1) out += "\n";
      }
    }
  }
  return out;
}

}  // namespace molfield
