// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Molecule model and readers for XYZ, PDB and SDF (V2000) text.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "molfield/vec3.hpp"

namespace molfield {

struct Atom {
  /// Normalized symbol ("C", "Cl"). Holds the raw text when unknown.
  std::string element;
  /// Å
  Vec3 position;
  /// Sub-entity label, e.g. "protein" or "ligand"; empty when not applicable.
  std::string entity_tag;
  bool known_element = true;
};

struct Molecule {
  std::vector<Atom> atoms;
  std::string name;
  std::string source;

  bool empty() const { return atoms.empty(); }
  std::size_t size() const { return atoms.size(); }
};

enum class UnknownElementPolicy { kReject, kTag };

struct XyzOptions {
  UnknownElementPolicy unknown_elements = UnknownElementPolicy::kReject;
};

struct PdbOptions {
  bool include_waters = false;
  UnknownElementPolicy unknown_elements = UnknownElementPolicy::kReject;
};

struct PdbStats {
  int accepted_records = 0;
  int protein_atoms = 0;
  int ligand_atoms = 0;
  int water_atoms = 0;  // kept waters
  int dropped_waters = 0;
  int skipped_altlocs = 0;
};

struct SdfOptions {
  /// 1-based index of the record to read.
  int record = 1;
  UnknownElementPolicy unknown_elements = UnknownElementPolicy::kReject;
};

Molecule parse_xyz(std::string_view text, const XyzOptions& options = {});

/// ATOM records get entity_tag "protein", HETATM records "ligand", kept
/// waters "water". Only the first MODEL and the first alternate location
/// are read.
Molecule parse_pdb(std::string_view text, const PdbOptions& options = {},
                   PdbStats* stats = nullptr);

Molecule parse_sdf(std::string_view text, const SdfOptions& options = {});

/// Number of '$$$$'-terminated records (a trailing unterminated record counts).
int count_sdf_records(std::string_view text);

/// Coordinates with 6 decimals.
std::string write_xyz(const Molecule& molecule);

enum class MoleculeFormat { kXyz, kPdb, kSdf };

/// Format from the file extension (.xyz, .pdb/.ent, .sdf/.mol).
MoleculeFormat format_from_path(std::string_view path);

struct ReadOptions {
  UnknownElementPolicy unknown_elements = UnknownElementPolicy::kReject;
  bool include_waters = false;
  int sdf_record = 1;
};

/// Reads and parses a file by extension; `source` is set to the path.
Molecule read_molecule_file(const std::string& path, const ReadOptions& options = {});

}  // namespace molfield
