// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/encoder.hpp"

#include <cmath>
#include <random>

#include <Eigen/Core>

#include "encoder_tape.hpp"
#include "molfield/error.hpp"

namespace molfield {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

constexpr int kTaps = 27;

// Eigen picks vector paths from pointer alignment, so products run on owned
// (aligned) copies to keep results independent of where buffers landed.
RowMatrix product(const RowMatrix& a, const RowMatrix& b) {
  RowMatrix out(a.rows(), b.cols());
  out.noalias() = a * b;
  return out;
}

std::size_t voxels(std::array<int, 3> d) {
  return static_cast<std::size_t>(d[0]) * d[1] * d[2];
}

// cols[(c * 27 + tap) * out_voxels + o] = input[c] at the tap's source voxel.
void im2col(const double* input, int channels, std::array<int, 3> in, std::array<int, 3> out,
            double* cols) {
  const std::size_t in_vox = voxels(in);
  const std::size_t out_vox = voxels(out);
  for (int c = 0; c < channels; ++c) {
    const double* src = input + c * in_vox;
    for (int dz = 0; dz < 3; ++dz) {
      for (int dy = 0; dy < 3; ++dy) {
        for (int dx = 0; dx < 3; ++dx) {
          const int tap = (dz * 3 + dy) * 3 + dx;
          double* dst = cols + (static_cast<std::size_t>(c) * kTaps + tap) * out_vox;
          std::size_t o = 0;
          for (int oz = 0; oz < out[2]; ++oz) {
            const int iz = 2 * oz - 1 + dz;
            for (int oy = 0; oy < out[1]; ++oy) {
              const int iy = 2 * oy - 1 + dy;
              const bool row_ok = iz >= 0 && iz < in[2] && iy >= 0 && iy < in[1];
              for (int ox = 0; ox < out[0]; ++ox, ++o) {
                const int ix = 2 * ox - 1 + dx;
                dst[o] = row_ok && ix >= 0 && ix < in[0]
                             ? src[(static_cast<std::size_t>(iz) * in[1] + iy) * in[0] + ix]
                             : 0.0;
              }
            }
          }
        }
      }
    }
  }
}

// Transpose of im2col: scatter-adds column gradients back onto the input.
void col2im(const double* dcols, int channels, std::array<int, 3> in, std::array<int, 3> out,
            double* dinput) {
  const std::size_t in_vox = voxels(in);
  const std::size_t out_vox = voxels(out);
  for (int c = 0; c < channels; ++c) {
    double* dst = dinput + c * in_vox;
    for (int dz = 0; dz < 3; ++dz) {
      for (int dy = 0; dy < 3; ++dy) {
        for (int dx = 0; dx < 3; ++dx) {
          const int tap = (dz * 3 + dy) * 3 + dx;
          const double* src = dcols + (static_cast<std::size_t>(c) * kTaps + tap) * out_vox;
          std::size_t o = 0;
          for (int oz = 0; oz < out[2]; ++oz) {
            const int iz = 2 * oz - 1 + dz;
            for (int oy = 0; oy < out[1]; ++oy) {
              const int iy = 2 * oy - 1 + dy;
              const bool row_ok = iz >= 0 && iz < in[2] && iy >= 0 && iy < in[1];
              for (int ox = 0; ox < out[0]; ++ox, ++o) {
                const int ix = 2 * ox - 1 + dx;
                if (row_ok && ix >= 0 && ix < in[0]) {
                  dst[(static_cast<std::size_t>(iz) * in[1] + iy) * in[0] + ix] += src[o];
                }
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

void EncoderConfig::validate() const {
  for (int d : input_dims) {
    if (d < 1) throw ConfigError("encoder input dims must be positive");
  }
  if (in_channels < 1) throw ConfigError("encoder needs at least one input channel");
  if (widths.empty()) throw ConfigError("encoder needs at least one convolution stage");
  for (int w : widths) {
    if (w < 1) throw ConfigError("encoder widths must be positive");
  }
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
}

ConvEncoder::ConvEncoder(const EncoderConfig& config) : config_(config) {
  config_.validate();
  int in = config_.in_channels;
  for (std::size_t i = 0; i < config_.widths.size(); ++i) {
    const std::string p = "conv." + std::to_string(i);
    const int out = config_.widths[i];
    conv_w_.push_back(layout_.add(p + ".weight", {out, in, 3, 3, 3}));
    conv_b_.push_back(layout_.add(p + ".bias", {out}));
    in = out;
  }
  lin_w_ = layout_.add("linear.weight", {config_.latent_dim, in});
  lin_b_ = layout_.add("linear.bias", {config_.latent_dim});
  params_.assign(layout_.total(), 0.0);
}

ConvEncoder init_encoder(const EncoderConfig& config, std::uint64_t seed) {
  ConvEncoder enc(config);
  std::mt19937_64 rng(seed);
  auto params = enc.parameters();
  auto fill = [&](std::size_t offset, std::size_t count, int fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < count; ++i) params[offset + i] = dist(rng);
  };
  int in = config.in_channels;
  for (std::size_t i = 0; i < config.widths.size(); ++i) {
    const int fan_in = in * kTaps;
    fill(enc.conv_weight_offset(static_cast<int>(i)),
         static_cast<std::size_t>(config.widths[i]) * fan_in, fan_in);
    in = config.widths[i];
  }
  fill(enc.linear_weight_offset(), static_cast<std::size_t>(config.latent_dim) * in, in);
  return enc;
}

namespace detail {

EncoderTape encode_forward(const ConvEncoder& encoder, std::span<const double> volume) {
  const auto& cfg = encoder.config();
  const auto params = encoder.parameters();
  const std::size_t stages = cfg.widths.size();
  if (volume.size() != voxels(cfg.input_dims) * cfg.in_channels) {
    throw ShapeError("volume size does not match encoder input");
  }
  EncoderTape tape;
  tape.dims.push_back(cfg.input_dims);
  tape.cols.resize(stages);
  tape.pre.resize(stages);
  tape.act.resize(stages);

  const double* input = volume.data();
  int in_ch = cfg.in_channels;
  for (std::size_t s = 0; s < stages; ++s) {
    const auto in_dims = tape.dims.back();
    const auto out_dims = downsampled(in_dims);
    tape.dims.push_back(out_dims);
    const auto out_vox = static_cast<Eigen::Index>(voxels(out_dims));
    const int out_ch = cfg.widths[s];
    const Eigen::Index k = static_cast<Eigen::Index>(in_ch) * kTaps;

    tape.cols[s].resize(static_cast<std::size_t>(k * out_vox));
    im2col(input, in_ch, in_dims, out_dims, tape.cols[s].data());
    tape.pre[s].resize(static_cast<std::size_t>(out_ch * out_vox));
    tape.act[s].resize(tape.pre[s].size());

    ConstMapMatrix w(params.data() + encoder.conv_weight_offset(static_cast<int>(s)), out_ch, k);
    ConstMapMatrix cols(tape.cols[s].data(), k, out_vox);
    MapMatrix pre(tape.pre[s].data(), out_ch, out_vox);
    pre = product(w, cols);
    const double* b = params.data() + encoder.conv_bias_offset(static_cast<int>(s));
    for (int c = 0; c < out_ch; ++c) {
      for (Eigen::Index o = 0; o < out_vox; ++o) {
        double& v = pre(c, o);
        v += b[c];
        tape.act[s][c * out_vox + o] = v > 0.0 ? v : 0.0;
      }
    }
    input = tape.act[s].data();
    in_ch = out_ch;
  }

  const auto last_vox = voxels(tape.dims.back());
  tape.pooled.assign(in_ch, 0.0);
  for (int c = 0; c < in_ch; ++c) {
    double sum = 0.0;
    for (std::size_t o = 0; o < last_vox; ++o) sum += input[c * last_vox + o];
    tape.pooled[c] = sum / static_cast<double>(last_vox);
  }
  tape.latent.assign(cfg.latent_dim, 0.0);
  const double* lw = params.data() + encoder.linear_weight_offset();
  const double* lb = params.data() + encoder.linear_bias_offset();
  for (int r = 0; r < cfg.latent_dim; ++r) {
    double acc = lb[r];
    for (int c = 0; c < in_ch; ++c) acc += lw[static_cast<std::size_t>(r) * in_ch + c] * tape.pooled[c];
    tape.latent[r] = acc;
  }
  return tape;
}

void encode_backward(const ConvEncoder& encoder, const EncoderTape& tape,
                     std::span<const double> dlatent, double* dparams, double* dinput) {
  const auto& cfg = encoder.config();
  const auto params = encoder.parameters();
  if (dlatent.size() != static_cast<std::size_t>(cfg.latent_dim)) {
    throw ShapeError("latent gradient has the wrong size");
  }
  const int stages = static_cast<int>(cfg.widths.size());
  const int last_ch = cfg.widths.back();

  // Linear layer.
  const double* lw = params.data() + encoder.linear_weight_offset();
  double* dlw = dparams + encoder.linear_weight_offset();
  double* dlb = dparams + encoder.linear_bias_offset();
  std::vector<double> dpooled(last_ch, 0.0);
  for (int r = 0; r < cfg.latent_dim; ++r) {
    const double g = dlatent[r];
    dlb[r] += g;
    for (int c = 0; c < last_ch; ++c) {
      dlw[static_cast<std::size_t>(r) * last_ch + c] += g * tape.pooled[c];
      dpooled[c] += lw[static_cast<std::size_t>(r) * last_ch + c] * g;
    }
  }

  // Average pool.
  const auto last_vox = voxels(tape.dims.back());
  std::vector<double> dact(static_cast<std::size_t>(last_ch) * last_vox);
  for (int c = 0; c < last_ch; ++c) {
    const double g = dpooled[c] / static_cast<double>(last_vox);
    for (std::size_t o = 0; o < last_vox; ++o) dact[c * last_vox + o] = g;
  }

  for (int s = stages - 1; s >= 0; --s) {
    const int out_ch = cfg.widths[s];
    const int in_ch = s == 0 ? cfg.in_channels : cfg.widths[s - 1];
    const auto out_vox = static_cast<Eigen::Index>(voxels(tape.dims[s + 1]));
    const Eigen::Index k = static_cast<Eigen::Index>(in_ch) * kTaps;

    // relu
    for (std::size_t i = 0; i < dact.size(); ++i) {
      if (!(tape.pre[s][i] > 0.0)) dact[i] = 0.0;
    }
    MapMatrix g(dact.data(), out_ch, out_vox);
    ConstMapMatrix cols(tape.cols[s].data(), k, out_vox);
    MapMatrix dw(dparams + encoder.conv_weight_offset(s), out_ch, k);
    dw += product(g, cols.transpose());
    double* db = dparams + encoder.conv_bias_offset(s);
    for (int c = 0; c < out_ch; ++c) {
      double sum = 0.0;
      for (Eigen::Index o = 0; o < out_vox; ++o) sum += g(c, o);
      db[c] += sum;
    }

    if (s == 0 && dinput == nullptr) break;
    ConstMapMatrix w(params.data() + encoder.conv_weight_offset(s), out_ch, k);
    std::vector<double> dcols(static_cast<std::size_t>(k * out_vox));
    MapMatrix dc(dcols.data(), k, out_vox);
    dc = product(w.transpose(), g);
    const auto in_dims = tape.dims[s];
    std::vector<double> dprev(voxels(in_dims) * in_ch, 0.0);
    col2im(dcols.data(), in_ch, in_dims, tape.dims[s + 1], dprev.data());
    if (s == 0) {
      std::copy(dprev.begin(), dprev.end(), dinput);
    } else {
      dact = std::move(dprev);
    }
  }
}

}  // namespace detail

namespace {

void check_volume(const ConvEncoder& encoder, const VolumeGrid& volume) {
  const auto& cfg = encoder.config();
  if (volume.spec.dims != cfg.input_dims || volume.channels != cfg.in_channels) {
    throw ShapeError("volume is " + std::to_string(volume.spec.dims[0]) + "x" +
                     std::to_string(volume.spec.dims[1]) + "x" +
                     std::to_string(volume.spec.dims[2]) + " with " +
                     std::to_string(volume.channels) + " channels; encoder expects " +
                     std::to_string(cfg.input_dims[0]) + "x" + std::to_string(cfg.input_dims[1]) +
                     "x" + std::to_string(cfg.input_dims[2]) + " with " +
                     std::to_string(cfg.in_channels));
  }
}

}  // namespace

LatentCode encode(const ConvEncoder& encoder, const VolumeGrid& volume) {
  check_volume(encoder, volume);
  return {detail::encode_forward(encoder, volume.data).latent};
}

EncoderGradients encode_backward(const ConvEncoder& encoder, const VolumeGrid& volume,
                                 std::span<const double> dlatent) {
  check_volume(encoder, volume);
  const auto tape = detail::encode_forward(encoder, volume.data);
  EncoderGradients grads;
  grads.parameters.assign(encoder.parameter_count(), 0.0);
  grads.input.assign(volume.data.size(), 0.0);
  detail::encode_backward(encoder, tape, dlatent, grads.parameters.data(), grads.input.data());
  return grads;
}

}  // namespace molfield
