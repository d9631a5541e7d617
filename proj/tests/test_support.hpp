// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the test binaries: random inputs and a plain scalar
// evaluation of the field sum that does not use the library's sampler.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "molfield/fieldgen.hpp"
#include "molfield/molio.hpp"
#include "molfield/neuralfield.hpp"

namespace molfield::testing {

inline std::string data_path(const std::string& name) {
  return std::string(MOLFIELD_TEST_DATA) + "/" + name;
}

inline Molecule random_molecule(std::mt19937_64& rng, int max_atoms,
                                const std::vector<std::string>& elements = {"H", "C", "N", "O",
                                                                            "S"}) {
  std::uniform_int_distribution<int> count(1, max_atoms);
  std::uniform_int_distribution<std::size_t> pick(0, elements.size() - 1);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  Molecule m;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    Atom a;
    a.element = elements[pick(rng)];
    a.position = {coord(rng), coord(rng), coord(rng)};
    m.atoms.push_back(a);
  }
  return m;
}

/// sum_a exp(-beta * (|a - p|^2 / r_a^2 - 1)) over atoms whose element is in
/// `elements` (all atoms when empty), written without the library.
inline double scalar_field(const Molecule& m, const std::vector<std::string>& elements,
                           const std::vector<std::pair<std::string, double>>& radii, double beta,
                           double px, double py, double pz) {
  double sum = 0.0;
  for (const Atom& a : m.atoms) {
    bool member = elements.empty();
    for (const auto& e : elements) member = member || e == a.element;
    if (!member) continue;
    double r = -1.0;
    for (const auto& [sym, val] : radii) {
      if (sym == a.element) r = val;
    }
    const double dx = a.position.x - px;
    const double dy = a.position.y - py;
    const double dz = a.position.z - pz;
    sum += std::exp(-beta * ((dx * dx + dy * dy + dz * dz) / (r * r) - 1.0));
  }
  return sum;
}

/// Literature vdW radii used by the oracle, typed in independently of the
/// library's table.
inline const std::vector<std::pair<std::string, double>>& oracle_radii() {
  static const std::vector<std::pair<std::string, double>> r{
      {"H", 1.10}, {"C", 1.70}, {"N", 1.55}, {"O", 1.52}, {"S", 1.80}};
  return r;
}

inline double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline VolumeGrid random_volume(std::mt19937_64& rng, std::array<int, 3> dims, int channels,
                                double lo = 0.0, double hi = 1.0) {
  GridSpec g;
  g.dims = dims;
  g.origin = {-1.0, -2.0, 0.5};
  g.spacing = {0.5, 0.25, 0.75};
  VolumeGrid v(g, channels);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& x : v.data) x = u(rng);
  return v;
}

inline LatentCode random_latent(std::mt19937_64& rng, int dim, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  LatentCode z;
  for (int i = 0; i < dim; ++i) z.values.push_back(n(rng));
  return z;
}

}  // namespace molfield::testing
