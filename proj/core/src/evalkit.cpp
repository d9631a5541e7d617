// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "molfield/error.hpp"
#include "molfield/training.hpp"
#include "text_util.hpp"

namespace molfield {
namespace {

double to_psnr(double peak, double mse) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_csv_field(std::string& out, std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

// Splits one CSV record starting at `pos`; advances past its line end.
std::vector<std::string> read_csv_record(std::string_view text, std::size_t& pos) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          fields.back().push_back('"');
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      fields.back().push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field in latent table");
  return fields;
}

}  // namespace

PsnrReport psnr(const VolumeGrid& reference, const VolumeGrid& test) {
  if (reference.spec.dims != test.spec.dims || reference.channels != test.channels ||
      reference.data.size() != test.data.size()) {
    throw ShapeError("PSNR needs volumes with identical dims and channel count");
  }
  if (reference.data.empty()) throw ShapeError("PSNR of an empty volume");
  PsnrReport report;
  report.peak = *std::max_element(reference.data.begin(), reference.data.end());
  const std::size_t n = reference.spec.voxel_count();
  double total = 0.0;
  for (int t = 0; t < reference.channels; ++t) {
    const auto r = reference.channel(t);
    const auto s = test.channel(t);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = r[i] - s[i];
      sum += d * d;
    }
    total += sum;
    const double mse = sum / static_cast<double>(n);
    report.per_channel_mse.push_back(mse);
    report.per_channel_psnr.push_back(to_psnr(report.peak, mse));
  }
  report.mse = total / static_cast<double>(reference.data.size());
  report.overall_psnr = to_psnr(report.peak, report.mse);
  return report;
}

std::string format_psnr_report(const PsnrReport& report, std::span<const std::string> names) {
  std::string out;
  out += "peak=" + format_double(report.peak) + "\n";
  out += "mse=" + format_double(report.mse) + "\n";
  out += "psnr=" + format_double(report.overall_psnr) + "\n";
  for (std::size_t t = 0; t < report.per_channel_psnr.size(); ++t) {
    const std::string name = t < names.size() ? names[t] : std::to_string(t);
    out += "psnr." + name + "=" + format_double(report.per_channel_psnr[t]) + "\n";
    out += "mse." + name + "=" + format_double(report.per_channel_mse[t]) + "\n";
  }
  return out;
}

VolumeGrid superresolve(const ModulatedField& net, const LatentCode& latent, const GridSpec& base,
                        int factor, Precision precision) {
  if (factor < 1) throw ConfigError("super-resolution factor must be >= 1");
  const std::array<int, 3> dims{base.dims[0] * factor, base.dims[1] * factor,
                                base.dims[2] * factor};
  const GridSpec grid = factor == 1 ? base : regrid(base, dims);
  return reconstruct(net, latent, grid, precision);
}

std::vector<LatentCode> interpolate_latents(const LatentCode& a, const LatentCode& b, int steps) {
  if (a.size() != b.size()) throw ShapeError("latents differ in dimension");
  if (steps < 2) throw ConfigError("interpolation needs at least 2 steps");
  std::vector<LatentCode> out;
  out.reserve(steps);
  out.push_back(a);
  for (int k = 1; k < steps - 1; ++k) {
    const double t = static_cast<double>(k) / (steps - 1);
    LatentCode z;
    z.values.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) z.values[i] = (1.0 - t) * a.values[i] + t * b.values[i];
    out.push_back(std::move(z));
  }
  out.push_back(b);
  return out;
}

std::string export_latents(std::span<const LatentCode> latents, std::span<const std::string> names) {
  if (latents.size() != names.size()) throw ShapeError("need one name per latent");
  const std::size_t dim = latents.empty() ? 0 : latents.front().size();
  for (const auto& l : latents) {
    if (l.size() != dim) throw ShapeError("latents differ in dimension");
  }
  std::string out = "name";
  for (std::size_t i = 0; i < dim; ++i) out += ",z" + std::to_string(i);
  out += "\n";
  for (std::size_t r = 0; r < latents.size(); ++r) {
    append_csv_field(out, names[r]);
    for (double v : latents[r].values) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

LatentTable parse_latent_table(std::string_view text) {
  std::size_t pos = 0;
  const auto header = read_csv_record(text, pos);
  if (header.empty() || header[0] != "name") throw ParseError("latent table header must start with 'name'", 1);
  const std::size_t dim = header.size() - 1;
  LatentTable table;
  int line = 1;
  while (pos < text.size()) {
    ++line;
    const auto fields = read_csv_record(text, pos);
    if (fields.size() == 1 && detail::trim(fields[0]).empty()) continue;
    if (fields.size() != dim + 1) {
      throw ParseError("expected " + std::to_string(dim + 1) + " columns", line);
    }
    LatentCode z;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto v = detail::parse_double(fields[i]);
      if (!v) throw ParseError("non-numeric latent value '" + fields[i] + "'", line);
      z.values.push_back(*v);
    }
    table.names.push_back(fields[0]);
    table.latents.push_back(std::move(z));
  }
  return table;
}

}  // namespace molfield
