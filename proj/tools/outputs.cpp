// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "outputs.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "molfield/error.hpp"

namespace molfield::cli {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

void require_writable_dir(const fs::path& dir) {
  const fs::path d = dir.empty() ? fs::path(".") : dir;
  std::error_code ec;
  if (!fs::is_directory(d, ec)) throw Error("output directory '" + d.string() + "' does not exist");
  const fs::path probe = d / (".molfield-probe-" + std::to_string(::getpid()));
  {
    std::ofstream out(probe, std::ios::binary);
    if (!out) throw Error("output directory '" + d.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

StagedOutputs::~StagedOutputs() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& e : entries_) fs::remove(e.temp, ec);
}

void StagedOutputs::add(const fs::path& target, std::string_view bytes) {
  Entry e;
  e.target = target;
  e.temp = target;
  e.temp += ".tmp-" + std::to_string(::getpid());
  e.sha256 = sha256_hex(bytes);
  entries_.push_back(e);
  std::ofstream out(e.temp, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + e.temp.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error("write failed for '" + e.temp.string() + "'");
}

void StagedOutputs::commit() {
  for (const auto& e : entries_) fs::rename(e.temp, e.target);
  committed_ = true;
}

}  // namespace molfield::cli
