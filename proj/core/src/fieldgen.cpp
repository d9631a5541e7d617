// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/fieldgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "molfield/error.hpp"
#include "text_util.hpp"

namespace molfield {
namespace {

struct ChannelAtoms {
  std::vector<Vec3> positions;
  std::vector<double> r2;
  std::vector<double> radius;
};

// Resolves r_a for every (channel, matching atom) pair up front so errors
// surface before any sampling.
std::vector<ChannelAtoms> resolve_channels(const Molecule& molecule, const ChannelSpec& spec,
                                           const ElementTable& table) {
  spec.validate();
  if (molecule.empty()) throw ConfigError("molecule has no atoms");
  std::vector<ChannelAtoms> out(spec.size());
  for (std::size_t t = 0; t < spec.size(); ++t) {
    const Channel& ch = spec.channels[t];
    for (const Atom& atom : molecule.atoms) {
      if (!ch.matches(atom)) continue;
      if (!is_finite(atom.position)) throw ConfigError("atom position is not finite");
      const double r = table.lookup(atom.element, ch.source);
      if (!(r > 0.0) || !std::isfinite(r)) {
        throw ConfigError("channel '" + ch.name + "': r_a for element '" + atom.element +
                          "' must be positive");
      }
      out[t].positions.push_back(atom.position);
      out[t].r2.push_back(r * r);
      out[t].radius.push_back(r);
    }
  }
  return out;
}

inline double contribution(double beta, double d2, double r2) {
  return std::exp(-beta * (d2 / r2 - 1.0));
}

}  // namespace

bool Channel::matches(const Atom& atom) const {
  if (!entity.empty() && atom.entity_tag != entity) return false;
  if (elements.empty()) return true;
  return std::find(elements.begin(), elements.end(), atom.element) != elements.end();
}

std::vector<std::string> ChannelSpec::names() const {
  std::vector<std::string> out;
  out.reserve(channels.size());
  for (const auto& c : channels) out.push_back(c.name);
  return out;
}

void ChannelSpec::validate() const {
  if (channels.empty()) throw ConfigError("channel spec has no channels");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive");
  std::set<std::string> seen;
  for (const auto& c : channels) {
    if (c.name.empty()) throw ConfigError("channel name is empty");
    if (!seen.insert(c.name).second) throw ConfigError("duplicate channel name '" + c.name + "'");
  }
}

ChannelSpec parse_channel_spec(std::string_view text) {
  ChannelSpec spec;
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    line = detail::trim(detail::strip_comment(line));
    if (line.empty()) continue;
    const auto fields = detail::split_ws(line);
    if (fields[0] == "beta") {
      const auto b = fields.size() == 2 ? detail::parse_double(fields[1]) : std::nullopt;
      if (!b || !(*b > 0.0)) throw ParseError("beta must be a positive number", line_no);
      spec.beta = *b;
      continue;
    }
    if (fields.size() < 2) throw ParseError("expected '<name> <elements|*> [key=value...]'", line_no);
    Channel ch;
    ch.name = std::string(fields[0]);
    if (fields[1] != "*") {
      std::string_view list = fields[1];
      while (!list.empty()) {
        const auto comma = list.find(',');
        const auto item = list.substr(0, comma);
        auto sym = normalize_element(item);
        if (!sym) throw ParseError("unknown element '" + std::string(item) + "'", line_no);
        ch.elements.push_back(std::move(*sym));
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
      }
      if (ch.elements.empty()) throw ParseError("empty element list", line_no);
    }
    for (std::size_t f = 2; f < fields.size(); ++f) {
      const auto eq = fields[f].find('=');
      if (eq == std::string_view::npos) {
        throw ParseError("expected key=value, got '" + std::string(fields[f]) + "'", line_no);
      }
      const auto key = fields[f].substr(0, eq);
      const auto value = fields[f].substr(eq + 1);
      if (key == "entity") {
        ch.entity = std::string(value);
      } else if (key == "source") {
        const auto p = parse_property(value);
        if (!p) throw ParseError("unknown source '" + std::string(value) + "'", line_no);
        ch.source = *p;
      } else {
        throw ParseError("unknown key '" + std::string(key) + "'", line_no);
      }
    }
    spec.channels.push_back(std::move(ch));
  }
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
  return spec;
}

std::string format_channel_spec(const ChannelSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "beta " << spec.beta << "\n";
  for (const auto& c : spec.channels) {
    out << c.name << ' ';
    if (c.elements.empty()) {
      out << '*';
    } else {
      for (std::size_t i = 0; i < c.elements.size(); ++i) out << (i ? "," : "") << c.elements[i];
    }
    if (!c.entity.empty()) out << " entity=" << c.entity;
    out << " source=" << property_name(c.source) << "\n";
  }
  return out.str();
}

void GridSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 2) throw ConfigError("grid dims must be >= 2 along every axis");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw ConfigError("grid spacing must be positive and finite");
    }
  }
  if (!is_finite(origin)) throw ConfigError("grid origin must be finite");
}

GridSpec regrid(const GridSpec& base, std::array<int, 3> dims) {
  base.validate();
  GridSpec out;
  out.dims = dims;
  out.origin = base.origin;
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 2) throw ConfigError("grid dims must be >= 2 along every axis");
    out.spacing[a] = base.spacing[a] * (base.dims[a] - 1) / (dims[a] - 1);
  }
  return out;
}

VolumeGrid::VolumeGrid(const GridSpec& grid, int num_channels)
    : spec(grid), channels(num_channels) {
  if (num_channels < 1) throw ShapeError("volume needs at least one channel");
  data.assign(static_cast<std::size_t>(num_channels) * grid.voxel_count(), 0.0);
}

std::vector<double> eval_field(const Molecule& molecule, const ChannelSpec& spec, Vec3 point,
                               const ElementTable& table) {
  if (!is_finite(point)) throw ConfigError("evaluation point is not finite");
  const auto resolved = resolve_channels(molecule, spec, table);
  std::vector<double> out(spec.size(), 0.0);
  for (std::size_t t = 0; t < resolved.size(); ++t) {
    const auto& ch = resolved[t];
    double sum = 0.0;
    for (std::size_t a = 0; a < ch.positions.size(); ++a) {
      sum += contribution(spec.beta, squared_norm(ch.positions[a] - point), ch.r2[a]);
    }
    out[t] = sum;
  }
  return out;
}

BoundingCube bounding_cube(const Molecule& molecule, double padding) {
  if (molecule.empty()) throw ConfigError("cannot build a grid around an empty molecule");
  if (!(padding >= 0.0)) throw ConfigError("padding must be non-negative");
  Vec3 lo = molecule.atoms.front().position;
  Vec3 hi = lo;
  for (const Atom& a : molecule.atoms) {
    for (int ax = 0; ax < 3; ++ax) {
      lo[ax] = std::min(lo[ax], a.position[ax]);
      hi[ax] = std::max(hi[ax], a.position[ax]);
    }
  }
  BoundingCube cube;
  for (int ax = 0; ax < 3; ++ax) {
    cube.center[ax] = 0.5 * (lo[ax] + hi[ax]);
    cube.extent = std::max(cube.extent, hi[ax] - lo[ax] + 2.0 * padding);
  }
  return cube;
}

GridSpec cubic_grid(Vec3 center, double extent, std::array<int, 3> dims) {
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw ConfigError("grid extent must be positive (single atom with zero padding?)");
  }
  GridSpec g;
  g.dims = dims;
  for (int ax = 0; ax < 3; ++ax) {
    if (dims[ax] < 2) throw ConfigError("grid dims must be >= 2 along every axis");
    g.origin[ax] = center[ax] - 0.5 * extent;
    g.spacing[ax] = extent / (dims[ax] - 1);
  }
  return g;
}

GridSpec auto_grid(const Molecule& molecule, std::array<int, 3> dims, double padding) {
  const BoundingCube cube = bounding_cube(molecule, padding);
  return cubic_grid(cube.center, cube.extent, dims);
}

double cull_radius(double beta, double r_a, double epsilon) {
  const double arg = 1.0 + std::log(1.0 / epsilon) / beta;
  return arg <= 0.0 ? 0.0 : r_a * std::sqrt(arg);
}

VolumeGrid sample_grid(const Molecule& molecule, const ChannelSpec& spec, const GridSpec& grid,
                       const SampleOptions& options, const ElementTable& table) {
  grid.validate();
  const auto resolved = resolve_channels(molecule, spec, table);
  VolumeGrid volume(grid, static_cast<int>(spec.size()));
  const int nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
  const double beta = spec.beta;
  const bool cull = options.cull_epsilon > 0.0;

  // Axis coordinates are computed once; point(i,j,k) uses the same expression.
  std::array<std::vector<double>, 3> axis;
  for (int ax = 0; ax < 3; ++ax) {
    axis[ax].resize(static_cast<std::size_t>(grid.dims[ax]));
    for (int n = 0; n < grid.dims[ax]; ++n) axis[ax][n] = grid.origin[ax] + n * grid.spacing[ax];
  }

  // Atoms outer, voxels inner: every voxel accumulates in atom order.
  for (std::size_t t = 0; t < resolved.size(); ++t) {
    const auto& ch = resolved[t];
    auto out = volume.channel(static_cast<int>(t));
    for (std::size_t a = 0; a < ch.positions.size(); ++a) {
      const Vec3 c = ch.positions[a];
      const double r2 = ch.r2[a];
      std::array<int, 3> lo{0, 0, 0};
      std::array<int, 3> hi{nx - 1, ny - 1, nz - 1};
      double cutoff2 = std::numeric_limits<double>::infinity();
      if (cull) {
        const double d = cull_radius(beta, ch.radius[a], options.cull_epsilon);
        cutoff2 = d * d;
        for (int ax = 0; ax < 3; ++ax) {
          const double first = std::ceil((c[ax] - d - grid.origin[ax]) / grid.spacing[ax]);
          const double last = std::floor((c[ax] + d - grid.origin[ax]) / grid.spacing[ax]);
          lo[ax] = static_cast<int>(std::clamp(first, 0.0, double(grid.dims[ax])));
          hi[ax] = static_cast<int>(std::clamp(last, -1.0, double(grid.dims[ax] - 1)));
        }
      }
      for (int k = lo[2]; k <= hi[2]; ++k) {
        const double dz = c.z - axis[2][k];
        for (int j = lo[1]; j <= hi[1]; ++j) {
          const double dy = c.y - axis[1][j];
          const double dyz = dy * dy + dz * dz;
          double* row = out.data() + (static_cast<std::size_t>(k) * ny + j) * nx;
          for (int i = lo[0]; i <= hi[0]; ++i) {
            const double dx = c.x - axis[0][i];
            const double d2 = dx * dx + dyz;
            if (d2 > cutoff2) continue;
            row[i] += contribution(beta, d2, r2);
          }
        }
      }
    }
  }
  return volume;
}

}  // namespace molfield
