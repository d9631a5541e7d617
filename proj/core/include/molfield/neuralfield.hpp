// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Latent-conditioned coordinate network with modulated sine activations.
//
// For a latent z and a point p in [-1,1]^3 with L = num_hidden_layers:
//
//   m_0 = relu(A_0 z + c_0)
//   m_i = relu(A_i [m_{i-1}; z] + c_i)                 i = 1..L-1
//   h_0 = p
//   h_{i+1} = m_i * sin(w_i (W_i h_i + b_i))           w_0 = omega0, w_i = 1
//   y = W_out h_L + b_out
//
// The modulations m_i depend only on the latent, so they are computed once
// per latent and shared by every point.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "molfield/fieldgen.hpp"
#include "molfield/vec3.hpp"

namespace molfield {

enum class Precision { kFloat64, kFloat32 };

struct NetConfig {
  static constexpr int in_dim = 3;
  int out_dim = 1;
  int hidden_width = 256;
  int num_hidden_layers = 4;
  double omega0 = 30.0;
  int latent_dim = 128;

  void validate() const;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// One named tensor inside a flat parameter vector.
struct TensorInfo {
  std::string name;
  std::vector<int> dims;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Appends tensors to a flat layout in declaration order.
class ParameterLayout {
 public:
  std::size_t add(std::string name, std::vector<int> dims);
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::size_t total() const { return total_; }

 private:
  std::vector<TensorInfo> tensors_;
  std::size_t total_ = 0;
};

struct LatentCode {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const LatentCode&, const LatentCode&) = default;
};

/// Parameters of the synthesis, modulator and output layers, stored in one
/// flat vector. Declaration order: synthesis (weight, bias) per layer,
/// modulator (weight, bias) per layer, output (weight, bias).
class ModulatedField {
 public:
  explicit ModulatedField(const NetConfig& config);

  const NetConfig& config() const { return config_; }
  const std::vector<TensorInfo>& tensors() const { return layout_.tensors(); }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // Row-major views. Synthesis weight i is width x (i == 0 ? 3 : width);
  // modulator weight i is width x (i == 0 ? latent : width + latent);
  // output weight is out_dim x width.
  const double* synthesis_weight(int layer) const { return at(synth_w_[layer]); }
  const double* synthesis_bias(int layer) const { return at(synth_b_[layer]); }
  const double* modulator_weight(int layer) const { return at(mod_w_[layer]); }
  const double* modulator_bias(int layer) const { return at(mod_b_[layer]); }
  const double* output_weight() const { return at(out_w_); }
  const double* output_bias() const { return at(out_b_); }

  std::size_t synthesis_weight_offset(int layer) const { return synth_w_[layer]; }
  std::size_t synthesis_bias_offset(int layer) const { return synth_b_[layer]; }
  std::size_t modulator_weight_offset(int layer) const { return mod_w_[layer]; }
  std::size_t modulator_bias_offset(int layer) const { return mod_b_[layer]; }
  std::size_t output_weight_offset() const { return out_w_; }
  std::size_t output_bias_offset() const { return out_b_; }

  friend bool operator==(const ModulatedField& a, const ModulatedField& b) {
    return a.config_ == b.config_ && a.params_ == b.params_;
  }

 private:
  const double* at(std::size_t offset) const { return params_.data() + offset; }

  NetConfig config_;
  ParameterLayout layout_;
  std::vector<double> params_;
  std::vector<std::size_t> synth_w_, synth_b_, mod_w_, mod_b_;
  std::size_t out_w_ = 0, out_b_ = 0;
};

/// Sine-network initialization, deterministic in `seed`:
///  - first synthesis layer U(-1/3, 1/3)
///  - other synthesis layers and the output layer
///    U(-sqrt(6/fan_in)/omega0, +sqrt(6/fan_in)/omega0)
///  - modulator layers U(-sqrt(6/fan_in), +sqrt(6/fan_in))
///  - all biases zero
ModulatedField init_network(const NetConfig& config, std::uint64_t seed);

/// Network output for each point, row-major N x out_dim.
std::vector<double> forward(const ModulatedField& net, const LatentCode& latent,
                            std::span<const Vec3> points,
                            Precision precision = Precision::kFloat64);

struct NetworkGradients {
  /// Same layout as ModulatedField::parameters().
  std::vector<double> parameters;
  std::vector<double> latent;
};

/// Vector-Jacobian product of `forward` with `upstream` (N x out_dim).
NetworkGradients backward(const ModulatedField& net, const LatentCode& latent,
                          std::span<const Vec3> points, std::span<const double> upstream,
                          Precision precision = Precision::kFloat64);

/// Voxel coordinates mapped to [-1,1] per axis in volume order (x fastest);
/// voxel 0 maps to (-1,-1,-1) and the last voxel to (1,1,1).
std::vector<Vec3> normalize_points(const GridSpec& grid);

}  // namespace molfield
