// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// File plumbing for the command-line tool: digests, staged writes.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace molfield::cli {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Throws molfield::Error unless a file can be created in `dir`.
void require_writable_dir(const std::filesystem::path& dir);

/// Collects outputs in temporary files next to their targets and renames
/// them into place on commit(). Uncommitted temporaries are removed on
/// destruction, so a failed command leaves nothing behind.
class StagedOutputs {
 public:
  StagedOutputs() = default;
  StagedOutputs(const StagedOutputs&) = delete;
  StagedOutputs& operator=(const StagedOutputs&) = delete;
  ~StagedOutputs();

  void add(const std::filesystem::path& target, std::string_view bytes);
  void commit();

  struct Entry {
    std::filesystem::path target;
    std::filesystem::path temp;
    std::string sha256;
  };
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
  bool committed_ = false;
};

}  // namespace molfield::cli
