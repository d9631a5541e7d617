// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace molfield {

struct AdamHyper {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moments:
///   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
///   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, const AdamHyper& hyper);

  void step(std::span<double> params, std::span<const double> grads);

  const AdamHyper& hyper() const { return hyper_; }
  void set_hyper(const AdamHyper& hyper) { hyper_ = hyper; }
  std::int64_t steps() const { return t_; }
  std::size_t size() const { return m_.size(); }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

  /// Restores accumulator state, e.g. from a checkpoint.
  void restore(std::int64_t steps, std::vector<double> m, std::vector<double> v);

 private:
  AdamHyper hyper_;
  std::int64_t t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace molfield
