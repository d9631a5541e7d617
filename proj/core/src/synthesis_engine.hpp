// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Chunked forward/backward machinery shared by the public network API and
// the trainers. Internal header.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "molfield/neuralfield.hpp"

namespace molfield::detail {

/// Modulator activations for one latent. Always binary64.
struct Modulation {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> gate;  // relu(pre)
};

Modulation modulate(const ModulatedField& net, std::span<const double> latent);

/// Back-propagates dL/dgate (consumed) into the modulator parameter
/// gradients (flat layout of `net`) and the latent gradient.
void modulate_backward(const ModulatedField& net, std::span<const double> latent,
                       const Modulation& mod, std::vector<std::vector<double>>& dgate,
                       double* dparams, double* dlatent);

/// Evaluates the synthesis and output layers on chunks of up to kChunk points
/// stored feature-major (3 rows of coordinates).
template <class T>
class SynthesisEngine {
 public:
  static constexpr int kChunk = 128;

  explicit SynthesisEngine(const ModulatedField& net);

  /// Re-reads weights after a parameter update. Shapes must not change.
  void bind(const ModulatedField& net);

  /// Selects the latent whose modulations gate the sine layers and clears the
  /// modulation-gradient accumulators.
  void set_modulation(const Modulation& mod);

  /// `coords` is 3 x ld, first `count` columns used. With `cache`, keeps
  /// what `backward` needs.
  void forward(const T* coords, std::size_t ld, int count, bool cache);

  /// out_dim x kChunk, valid for the last forward call.
  const T* output() const { return y_.data(); }

  /// Upstream gradient buffer, out_dim x kChunk; fill before `backward`.
  T* upstream() { return dy_.data(); }

  /// Accumulates synthesis and output parameter gradients into `dparams`
  /// and modulation gradients into `dgate()`, for the last cached forward.
  void backward(double* dparams);

  std::vector<std::vector<double>>& dgate() { return dgate_; }

 private:
  int width_, layers_, out_dim_;
  std::vector<double> omega_;
  std::vector<std::size_t> w_off_, b_off_;
  std::size_t out_w_off_, out_b_off_;

  std::vector<std::vector<T>> w_, wt_, b_;
  std::vector<T> w_out_, wt_out_, b_out_;
  std::vector<std::vector<T>> gate_;

  // Per-chunk workspace.
  const T* coords_ = nullptr;
  std::size_t coords_ld_ = 0;
  int count_ = 0;
  std::vector<std::vector<T>> s_, c_, h_;  // h_[i] is the input of layer i (i >= 1)
  std::vector<T> z_, y_, dy_, dh_, dz_;
  std::vector<std::vector<double>> dgate_;
};

extern template class SynthesisEngine<double>;
extern template class SynthesisEngine<float>;

/// Coordinates as a feature-major T array (3 x points.size()).
template <class T>
std::vector<T> feature_major(std::span<const Vec3> points);

}  // namespace molfield::detail
