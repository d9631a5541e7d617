// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace molfield {

/// Per-element scalar that can serve as r_a in the field equation.
enum class Property { kVdwRadius, kElectronegativity, kWsDensity };

inline constexpr int kNumElements = 118;

std::string_view property_name(Property p);
std::optional<Property> parse_property(std::string_view name);

/// Canonical spelling of an element symbol ("CL" -> "Cl"), or nullopt when
/// the text is not one of the 118 element symbols. Bare atomic numbers
/// ("6") are accepted as well.
std::optional<std::string> normalize_element(std::string_view text);

/// 1..118 for known symbols (any case), 0 otherwise.
int atomic_number(std::string_view symbol);

/// Symbol for atomic number 1..118; empty for anything else.
std::string_view element_symbol(int z);

/// Element property table.
///
/// Defaults are compiled in:
///  - vdW radii (Å): Bondi, J. Phys. Chem. 68, 441 (1964), with H from
///    Rowland & Taylor, J. Phys. Chem. 100, 7384 (1996) and main-group gaps
///    filled from Mantina et al., J. Phys. Chem. A 113, 5806 (2009).
///  - Electronegativity: Pauling scale, CRC Handbook of Chemistry and Physics.
///  - Wigner-Seitz density: Miedema's n_ws^(1/3) parameter (density units^1/3),
///    Miedema, de Chatel & de Boer, Physica B 100, 1 (1980), and
///    de Boer et al., "Cohesion in Metals" (1988). This is a proxy for the
///    Wigner-Seitz electron density; elements Miedema did not parametrize
///    (halogens, noble gases) have no value.
///
/// Missing values are reported by `find` as nullopt and by `lookup` as
/// UnknownElementError. A table is immutable once built and safe to share.
class ElementTable {
 public:
  /// The compiled-in defaults.
  static const ElementTable& builtin();

  /// Builtin defaults with overrides applied from `text`: one
  /// "ELEMENT property value" triple per line, '#' starts a comment.
  static ElementTable with_overrides(std::string_view text);
  static ElementTable with_overrides(const ElementTable& base, std::string_view text);

  std::optional<double> find(std::string_view element, Property p) const;
  double lookup(std::string_view element, Property p) const;

  void set(std::string_view element, Property p, double value);

 private:
  ElementTable() = default;

  // Indexed by atomic number; NaN marks "no value".
  std::array<std::array<double, 3>, kNumElements + 1> values_{};
};

}  // namespace molfield
