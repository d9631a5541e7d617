// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/molio.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "molfield/elements.hpp"
#include "molfield/error.hpp"
#include "text_util.hpp"

namespace molfield {
namespace {

using detail::column;
using detail::trim;

Atom make_atom(std::string_view symbol, Vec3 position, UnknownElementPolicy policy, int line) {
  Atom atom;
  atom.position = position;
  if (auto norm = normalize_element(symbol)) {
    atom.element = std::move(*norm);
  } else if (policy == UnknownElementPolicy::kTag) {
    atom.element = std::string(trim(symbol));
    atom.known_element = false;
  } else {
    throw ParseError("unknown element symbol '" + std::string(trim(symbol)) + "'", line);
  }
  return atom;
}

Vec3 parse_position(std::string_view xs, std::string_view ys, std::string_view zs, int line) {
  const auto x = detail::parse_double(xs);
  const auto y = detail::parse_double(ys);
  const auto z = detail::parse_double(zs);
  if (!x || !y || !z) throw ParseError("non-numeric coordinate", line);
  const Vec3 p{*x, *y, *z};
  if (!is_finite(p)) throw ParseError("non-finite coordinate", line);
  return p;
}

bool is_water(std::string_view res_name) {
  return res_name == "HOH" || res_name == "WAT" || res_name == "H2O" || res_name == "DOD";
}

// Element guess from the PDB atom-name field (columns 13-16) when columns
// 77-78 are blank.
std::string element_from_atom_name(std::string_view name) {
  if (name.size() < 2) return std::string(trim(name));
  const auto alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
  if (alpha(name[0])) {
    // Four-character hydrogen names (HG21, HD11) start in column 13.
    if ((name[0] == 'H' || name[0] == 'h') && trim(name).size() == 4) return "H";
    if (alpha(name[1]) && atomic_number(name.substr(0, 2)) != 0) {
      return std::string(name.substr(0, 2));
    }
    return std::string(name.substr(0, 1));
  }
  for (char c : name.substr(1)) {
    if (alpha(c)) return std::string(1, c);
  }
  return std::string(trim(name));
}

}  // namespace

Molecule parse_xyz(std::string_view text, const XyzOptions& options) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw ParseError("empty XYZ input", 1);
  const auto count = detail::parse_int(lines[0]);
  if (!count || *count < 0) throw ParseError("first line must be the atom count", 1);

  Molecule mol;
  if (lines.size() > 1) mol.name = std::string(trim(lines[1]));
  mol.atoms.reserve(static_cast<std::size_t>(*count));

  std::size_t idx = 2;
  for (long n = 0; n < *count; ++n, ++idx) {
    const int line_no = static_cast<int>(idx) + 1;
    if (idx >= lines.size() || trim(lines[idx]).empty()) {
      throw ParseError("atom count mismatch: declared " + std::to_string(*count) + ", found " +
                           std::to_string(n),
                       line_no);
    }
    const auto fields = detail::split_ws(lines[idx]);
    if (fields.size() < 4) throw ParseError("expected 'symbol x y z'", line_no);
    const Vec3 pos = parse_position(fields[1], fields[2], fields[3], line_no);
    mol.atoms.push_back(make_atom(fields[0], pos, options.unknown_elements, line_no));
  }
  for (; idx < lines.size(); ++idx) {
    if (!trim(lines[idx]).empty()) {
      throw ParseError("atom count mismatch: more atom lines than declared " +
                           std::to_string(*count),
                       static_cast<int>(idx) + 1);
    }
  }
  return mol;
}

Molecule parse_pdb(std::string_view text, const PdbOptions& options, PdbStats* stats) {
  Molecule mol;
  PdbStats local;
  char first_altloc = ' ';
  bool saw_records = false;

  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    const auto record = trim(column(line, 0, 6));
    if (record == "ENDMDL" || record == "END") break;
    if (record == "HEADER" && mol.name.empty()) {
      mol.name = std::string(trim(column(line, 62, 4)));
      continue;
    }
    const bool hetatm = record == "HETATM";
    if (record != "ATOM" && !hetatm) continue;
    saw_records = true;

    const char altloc = line.size() > 16 ? line[16] : ' ';
    if (altloc != ' ') {
      if (first_altloc == ' ') first_altloc = altloc;
      if (altloc != first_altloc) {
        ++local.skipped_altlocs;
        continue;
      }
    }

    if (line.size() < 54) throw ParseError("record too short for coordinate columns", line_no);
    const Vec3 pos =
        parse_position(column(line, 30, 8), column(line, 38, 8), column(line, 46, 8), line_no);
    ++local.accepted_records;

    const auto res_name = trim(column(line, 17, 3));
    const bool water = hetatm && is_water(res_name);
    if (water && !options.include_waters) {
      ++local.dropped_waters;
      continue;
    }

    std::string symbol(trim(column(line, 76, 2)));
    if (symbol.empty()) symbol = element_from_atom_name(column(line, 12, 4));
    Atom atom = make_atom(symbol, pos, options.unknown_elements, line_no);
    if (water) {
      atom.entity_tag = "water";
      ++local.water_atoms;
    } else if (hetatm) {
      atom.entity_tag = "ligand";
      ++local.ligand_atoms;
    } else {
      atom.entity_tag = "protein";
      ++local.protein_atoms;
    }
    mol.atoms.push_back(std::move(atom));
  }
  if (!saw_records) throw ParseError("no ATOM/HETATM records found");
  if (stats) *stats = local;
  return mol;
}

int count_sdf_records(std::string_view text) {
  int records = 0;
  bool pending = false;
  for (std::string_view line : detail::split_lines(text)) {
    if (trim(line) == "$$$$") {
      ++records;
      pending = false;
    } else if (!trim(line).empty()) {
      pending = true;
    }
  }
  return records + (pending ? 1 : 0);
}

Molecule parse_sdf(std::string_view text, const SdfOptions& options) {
  if (options.record < 1) throw ConfigError("SDF record index is 1-based");
  const auto lines = detail::split_lines(text);

  // Locate the requested record.
  std::size_t begin = 0;
  for (int r = 1; r < options.record; ++r) {
    while (begin < lines.size() && trim(lines[begin]) != "$$$$") ++begin;
    if (begin >= lines.size()) {
      throw ParseError("SDF record " + std::to_string(options.record) + " requested, only " +
                       std::to_string(r) + " present");
    }
    ++begin;
  }
  if (begin + 4 > lines.size()) {
    throw ParseError("SDF record truncated before the counts line", static_cast<int>(begin) + 1);
  }

  Molecule mol;
  mol.name = std::string(trim(lines[begin]));
  const std::size_t counts_idx = begin + 3;
  const int counts_line_no = static_cast<int>(counts_idx) + 1;
  const auto counts = lines[counts_idx];
  if (counts.find("V3000") != std::string_view::npos) {
    throw ParseError("V3000 connection tables are not supported", counts_line_no);
  }
  const auto natoms = detail::parse_int(column(counts, 0, 3));
  const auto nbonds = detail::parse_int(column(counts, 3, 3));
  if (!natoms || !nbonds || *natoms < 0 || *nbonds < 0) {
    throw ParseError("malformed counts line", counts_line_no);
  }

  for (long n = 0; n < *natoms; ++n) {
    const std::size_t idx = counts_idx + 1 + static_cast<std::size_t>(n);
    const int line_no = static_cast<int>(idx) + 1;
    if (idx >= lines.size() || trim(lines[idx]) == "$$$$" || trim(lines[idx]) == "M  END") {
      throw ParseError("atom block truncated: declared " + std::to_string(*natoms) +
                           " atoms, found " + std::to_string(n),
                       line_no);
    }
    const auto fields = detail::split_ws(lines[idx]);
    if (fields.size() < 4) throw ParseError("malformed atom line", line_no);
    const Vec3 pos = parse_position(fields[0], fields[1], fields[2], line_no);
    mol.atoms.push_back(make_atom(fields[3], pos, options.unknown_elements, line_no));
  }
  // The bond block and properties are not needed for fields.
  return mol;
}

std::string write_xyz(const Molecule& molecule) {
  std::string out = std::to_string(molecule.atoms.size()) + "\n" + molecule.name + "\n";
  char buf[128];
  for (const Atom& a : molecule.atoms) {
    std::snprintf(buf, sizeof buf, "%-2s %.6f %.6f %.6f\n", a.element.c_str(), a.position.x,
                  a.position.y, a.position.z);
    out += buf;
  }
  return out;
}

MoleculeFormat format_from_path(std::string_view path) {
  const auto dot = path.rfind('.');
  std::string ext;
  if (dot != std::string_view::npos) {
    for (char c : path.substr(dot + 1)) ext += static_cast<char>(std::tolower(c));
  }
  if (ext == "xyz") return MoleculeFormat::kXyz;
  if (ext == "pdb" || ext == "ent") return MoleculeFormat::kPdb;
  if (ext == "sdf" || ext == "mol" || ext == "sd") return MoleculeFormat::kSdf;
  throw ConfigError("cannot infer molecule format from '" + std::string(path) + "'");
}

Molecule read_molecule_file(const std::string& path, const ReadOptions& options) {
  const auto format = format_from_path(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  Molecule mol;
  try {
    switch (format) {
      case MoleculeFormat::kXyz:
        mol = parse_xyz(text, {options.unknown_elements});
        break;
      case MoleculeFormat::kPdb:
        mol = parse_pdb(text, {options.include_waters, options.unknown_elements});
        break;
      case MoleculeFormat::kSdf:
        mol = parse_sdf(text, {options.sdf_record, options.unknown_elements});
        break;
    }
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
  mol.source = path;
  if (mol.name.empty()) {
    const auto slash = path.find_last_of('/');
    mol.name = path.substr(slash == std::string::npos ? 0 : slash + 1);
  }
  return mol;
}

}  // namespace molfield
