// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// molfield sample|train|reconstruct|interpolate|export|psnr|replay
//
// Every command that writes files also writes a JSON manifest holding the
// resolved parameters and SHA-256 digests of inputs and outputs. `replay`
// re-runs a manifest and, with --verify, checks the output digests.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace molfield::cli {

/// Runs one command. `args` excludes the program name. Returns the exit
/// code: 0 when every output was written, 1 on errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace molfield::cli
