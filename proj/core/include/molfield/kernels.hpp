// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Dense building blocks for the coordinate network. Matrices are row-major;
// activations are stored feature-major with the point index contiguous, so a
// row of an activation matrix holds one feature for every point in a chunk.
//
// Every output element of `affine_rows` is computed with the same sequence
// of fused multiply-adds no matter how many points are processed together,
// which makes network evaluation bit-identical under any batch partitioning.

#pragma once

#include <cstddef>

namespace molfield::kernels {

/// out[m][n] = bias[m] + sum_k w[m][k] * x[k][n] for m < rows, n < points.
/// The k-sum runs in ascending order as a chain of fma. `bias` may be null.
template <class T>
void affine_rows(const T* w, const T* bias, int rows, int inner, const T* x, std::size_t ldx,
                 T* out, std::size_t ldo, int points);

/// dw[m][k] += sum_n dz[m][n] * x[k][n]. Fixed reduction order.
template <class T>
void accumulate_outer(const T* dz, std::size_t ldz, int rows, const T* x, std::size_t ldx,
                      int inner, int points, double* dw);

/// Vectorizable sine and cosine. Accurate to a few ulp for |x| < 1e5 and
/// degrades gracefully beyond; non-finite input gives NaN.
template <class T>
void sincos(const T* x, T* s, T* c, std::size_t n);

template <class T>
void sin(const T* x, T* s, std::size_t n);

}  // namespace molfield::kernels
