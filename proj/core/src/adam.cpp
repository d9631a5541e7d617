// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/adam.hpp"

#include <cmath>

#include "molfield/error.hpp"

namespace molfield {

Adam::Adam(std::size_t size, const AdamHyper& hyper)
    : hyper_(hyper), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("Adam: parameter/gradient size does not match optimizer state");
  }
  ++t_;
  const double b1 = hyper_.beta1;
  const double b2 = hyper_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= hyper_.learning_rate * mhat / (std::sqrt(vhat) + hyper_.epsilon);
  }
}

void Adam::restore(std::int64_t steps, std::vector<double> m, std::vector<double> v) {
  if (m.size() != v.size()) throw ShapeError("Adam: moment vectors differ in size");
  t_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace molfield
