// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/elements.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "molfield/error.hpp"
#include "text_util.hpp"

namespace molfield {
namespace {

constexpr std::array<std::string_view, kNumElements + 1> kSymbols = {
    "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al",
    "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co",
    "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb",
    "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs",
    "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm",
    "Yb", "Lu", "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg",
    "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

struct Entry {
  int z;
  double value;
};

// Å
constexpr Entry kVdwRadii[] = {
    {1, 1.10},  {2, 1.40},  {3, 1.82},  {4, 1.53},  {5, 1.92},  {6, 1.70},  {7, 1.55},
    {8, 1.52},  {9, 1.47},  {10, 1.54}, {11, 2.27}, {12, 1.73}, {13, 1.84}, {14, 2.10},
    {15, 1.80}, {16, 1.80}, {17, 1.75}, {18, 1.88}, {19, 2.75}, {20, 2.31}, {28, 1.63},
    {29, 1.40}, {30, 1.39}, {31, 1.87}, {32, 2.11}, {33, 1.85}, {34, 1.90}, {35, 1.85},
    {36, 2.02}, {37, 3.03}, {38, 2.49}, {46, 1.63}, {47, 1.72}, {48, 1.58}, {49, 1.93},
    {50, 2.17}, {51, 2.06}, {52, 2.06}, {53, 1.98}, {54, 2.16}, {55, 3.43}, {56, 2.68},
    {78, 1.72}, {79, 1.66}, {80, 1.55}, {81, 1.96}, {82, 2.02}, {83, 2.07}, {84, 1.97},
    {85, 2.02}, {86, 2.20}, {87, 3.48}, {88, 2.83}, {92, 1.86},
};

// Pauling
constexpr Entry kElectronegativity[] = {
    {1, 2.20},  {3, 0.98},  {4, 1.57},  {5, 2.04},  {6, 2.55},  {7, 3.04},  {8, 3.44},
    {9, 3.98},  {11, 0.93}, {12, 1.31}, {13, 1.61}, {14, 1.90}, {15, 2.19}, {16, 2.58},
    {17, 3.16}, {19, 0.82}, {20, 1.00}, {21, 1.36}, {22, 1.54}, {23, 1.63}, {24, 1.66},
    {25, 1.55}, {26, 1.83}, {27, 1.88}, {28, 1.91}, {29, 1.90}, {30, 1.65}, {31, 1.81},
    {32, 2.01}, {33, 2.18}, {34, 2.55}, {35, 2.96}, {36, 3.00}, {37, 0.82}, {38, 0.95},
    {39, 1.22}, {40, 1.33}, {41, 1.60}, {42, 2.16}, {44, 2.20}, {45, 2.28}, {46, 2.20},
    {47, 1.93}, {48, 1.69}, {49, 1.78}, {50, 1.96}, {51, 2.05}, {52, 2.10}, {53, 2.66},
    {54, 2.60}, {55, 0.79}, {56, 0.89}, {57, 1.10}, {74, 2.36}, {75, 1.90}, {76, 2.20},
    {77, 2.20}, {78, 2.28}, {79, 2.54}, {80, 2.00}, {81, 1.62}, {82, 2.33}, {83, 2.02},
};

// Miedema n_ws^(1/3), (d.u.)^(1/3)
constexpr Entry kWsDensity[] = {
    {1, 3.38},  {3, 0.98},  {4, 1.60},  {5, 1.55},  {6, 1.90},  {7, 1.60},  {8, 1.70},
    {11, 0.82}, {12, 1.17}, {13, 1.39}, {14, 1.50}, {15, 1.65}, {16, 1.46}, {19, 0.65},
    {20, 0.91}, {21, 1.27}, {22, 1.52}, {23, 1.64}, {24, 1.73}, {25, 1.61}, {26, 1.77},
    {27, 1.75}, {28, 1.75}, {29, 1.47}, {30, 1.32}, {31, 1.31}, {32, 1.37}, {33, 1.44},
    {37, 0.60}, {38, 0.84}, {39, 1.21}, {40, 1.41}, {41, 1.64}, {42, 1.77}, {44, 1.83},
    {45, 1.76}, {46, 1.67}, {47, 1.39}, {48, 1.24}, {49, 1.17}, {50, 1.24}, {51, 1.26},
    {55, 0.55}, {56, 0.81}, {57, 1.18}, {72, 1.43}, {73, 1.63}, {74, 1.81}, {75, 1.86},
    {76, 1.85}, {77, 1.83}, {78, 1.78}, {79, 1.57}, {80, 1.24}, {81, 1.12}, {82, 1.15},
    {83, 1.16},
};

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

int z_or_throw(std::string_view element) {
  const int z = atomic_number(element);
  if (z == 0) throw UnknownElementError("unknown element '" + std::string(element) + "'");
  return z;
}

}  // namespace

std::string_view property_name(Property p) {
  switch (p) {
    case Property::kVdwRadius: return "vdw_radius";
    case Property::kElectronegativity: return "electronegativity";
    case Property::kWsDensity: return "ws_density";
  }
  return "";
}

std::optional<Property> parse_property(std::string_view name) {
  for (Property p : {Property::kVdwRadius, Property::kElectronegativity, Property::kWsDensity}) {
    if (name == property_name(p)) return p;
  }
  return std::nullopt;
}

int atomic_number(std::string_view symbol) {
  if (symbol.empty() || symbol.size() > 2) return 0;
  for (int z = 1; z <= kNumElements; ++z) {
    const auto ref = kSymbols[z];
    if (ref.size() != symbol.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(ref[i])) !=
          std::tolower(static_cast<unsigned char>(symbol[i]))) {
        same = false;
        break;
      }
    }
    if (same) return z;
  }
  return 0;
}

std::string_view element_symbol(int z) {
  if (z < 1 || z > kNumElements) return {};
  return kSymbols[z];
}

std::optional<std::string> normalize_element(std::string_view text) {
  text = detail::trim(text);
  if (text.empty()) return std::nullopt;
  if (std::isdigit(static_cast<unsigned char>(text.front()))) {
    int z = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), z);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    const auto sym = element_symbol(z);
    if (sym.empty()) return std::nullopt;
    return std::string(sym);
  }
  const int z = atomic_number(text);
  if (z == 0) return std::nullopt;
  return std::string(kSymbols[z]);
}

const ElementTable& ElementTable::builtin() {
  static const ElementTable table = [] {
    ElementTable t;
    for (auto& row : t.values_) row.fill(kMissing);
    auto fill = [&t](Property p, const auto& entries) {
      for (const Entry& e : entries) t.values_[e.z][static_cast<int>(p)] = e.value;
    };
    fill(Property::kVdwRadius, kVdwRadii);
    fill(Property::kElectronegativity, kElectronegativity);
    fill(Property::kWsDensity, kWsDensity);
    return t;
  }();
  return table;
}

ElementTable ElementTable::with_overrides(std::string_view text) {
  return with_overrides(builtin(), text);
}

ElementTable ElementTable::with_overrides(const ElementTable& base, std::string_view text) {
  ElementTable t = base;
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    line = detail::trim(detail::strip_comment(line));
    if (line.empty()) continue;
    const auto fields = detail::split_ws(line);
    if (fields.size() != 3) {
      throw ParseError("expected 'ELEMENT property value', got '" + std::string(line) + "'",
                       line_no);
    }
    if (atomic_number(fields[0]) == 0) {
      throw ParseError("unknown element '" + std::string(fields[0]) + "'", line_no);
    }
    const auto prop = parse_property(fields[1]);
    if (!prop) throw ParseError("unknown property '" + std::string(fields[1]) + "'", line_no);
    const auto value = detail::parse_double(fields[2]);
    if (!value || !std::isfinite(*value) || *value <= 0.0) {
      throw ParseError("property value must be a positive number", line_no);
    }
    t.set(fields[0], *prop, *value);
  }
  return t;
}

std::optional<double> ElementTable::find(std::string_view element, Property p) const {
  const int z = atomic_number(element);
  if (z == 0) return std::nullopt;
  const double v = values_[z][static_cast<int>(p)];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

double ElementTable::lookup(std::string_view element, Property p) const {
  const int z = z_or_throw(element);
  const double v = values_[z][static_cast<int>(p)];
  if (std::isnan(v)) {
    throw UnknownElementError("no " + std::string(property_name(p)) + " value for element '" +
                              std::string(kSymbols[z]) + "'");
  }
  return v;
}

void ElementTable::set(std::string_view element, Property p, double value) {
  values_[z_or_throw(element)][static_cast<int>(p)] = value;
}

}  // namespace molfield
