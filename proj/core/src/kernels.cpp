// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace molfield::kernels {
namespace {

// Rows x points register tile: 6 rows by four 512-bit vectors of points.
template <class T>
constexpr int kTileRows = 6;
template <class T>
constexpr int kTilePoints = 128 / sizeof(T) * 2;  // 32 doubles, 64 floats

template <class T, int MB, int NB>
inline void affine_tile(const T* w, std::size_t ldw, const T* bias, int inner, const T* x,
                        std::size_t ldx, T* out, std::size_t ldo) {
  T acc[MB][NB];
  for (int r = 0; r < MB; ++r) {
    const T b = bias ? bias[r] : T(0);
    for (int n = 0; n < NB; ++n) acc[r][n] = b;
  }
  for (int k = 0; k < inner; ++k) {
    const T* xk = x + static_cast<std::size_t>(k) * ldx;
    for (int r = 0; r < MB; ++r) {
      const T wv = w[static_cast<std::size_t>(r) * ldw + k];
#pragma GCC ivdep
      for (int n = 0; n < NB; ++n) acc[r][n] = std::fma(wv, xk[n], acc[r][n]);
    }
  }
  for (int r = 0; r < MB; ++r) {
    for (int n = 0; n < NB; ++n) out[static_cast<std::size_t>(r) * ldo + n] = acc[r][n];
  }
}

// Same arithmetic per element as affine_tile, any shape.
template <class T>
inline void affine_generic(const T* w, std::size_t ldw, const T* bias, int rows, int inner,
                           const T* x, std::size_t ldx, T* out, std::size_t ldo, int points) {
  for (int r = 0; r < rows; ++r) {
    T* o = out + static_cast<std::size_t>(r) * ldo;
    const T b = bias ? bias[r] : T(0);
    for (int n = 0; n < points; ++n) o[n] = b;
    for (int k = 0; k < inner; ++k) {
      const T wv = w[static_cast<std::size_t>(r) * ldw + k];
      const T* xk = x + static_cast<std::size_t>(k) * ldx;
      for (int n = 0; n < points; ++n) o[n] = std::fma(wv, xk[n], o[n]);
    }
  }
}

template <class T>
struct TrigConstants;

template <>
struct TrigConstants<double> {
  static constexpr double kTwoOverPi = 0.6366197723675814;
  static constexpr double kPio2A = 1.5707963267948966;
  static constexpr double kPio2B = 6.123233995736766e-17;
  static constexpr double kPio2C = -1.4973849048591698e-33;
  static constexpr double kRoundMagic = 6755399441055744.0;  // 1.5 * 2^52

  static double sin_poly(double r, double z) {
    constexpr double S1 = -1.66666666666666324348e-01, S2 = 8.33333333332248946124e-03,
                     S3 = -1.98412698298579493134e-04, S4 = 2.75573137070700676789e-06,
                     S5 = -2.50507602534068634195e-08, S6 = 1.58969099521155010221e-10;
    const double p = S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)));
    return r + r * z * (S1 + z * p);
  }
  static double cos_poly(double z) {
    constexpr double C1 = 4.16666666666666019037e-02, C2 = -1.38888888888741095749e-03,
                     C3 = 2.48015872894767294178e-05, C4 = -2.75573143513906633035e-07,
                     C5 = 2.08757232129817482790e-09, C6 = -1.13596475577881948265e-11;
    const double p = z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6)))));
    const double hz = 0.5 * z;
    const double w = 1.0 - hz;
    return w + (((1.0 - w) - hz) + z * p);
  }
};

template <>
struct TrigConstants<float> {
  static constexpr float kTwoOverPi = 0.63661975f;
  static constexpr float kPio2A = 1.5707964f;
  static constexpr float kPio2B = -4.371139e-08f;
  static constexpr float kPio2C = -1.7151245e-15f;
  static constexpr float kRoundMagic = 12582912.0f;  // 1.5 * 2^23

  static float sin_poly(float r, float z) {
    return r + r * z * (-1.6666654611e-1f + z * (8.3321608736e-3f + z * -1.9515295891e-4f));
  }
  static float cos_poly(float z) {
    return 1.0f - 0.5f * z +
           z * z * (4.166664568298827e-2f + z * (-1.388731625493765e-3f + z * 2.443315711809948e-5f));
  }
};

// Reduces x to r in [-pi/4, pi/4] with x = q*pi/2 + r and returns the
// polynomial sine and cosine of r plus the sign/swap selectors for q mod 4.
template <class T>
inline void reduce(T x, T& sr, T& cr, T& swap, T& sign_s, T& sign_c) {
  using C = TrigConstants<T>;
  const T q = (x * C::kTwoOverPi + C::kRoundMagic) - C::kRoundMagic;
  T r = std::fma(-q, C::kPio2A, x);
  r = std::fma(-q, C::kPio2B, r);
  r = std::fma(-q, C::kPio2C, r);
  const T z = r * r;
  sr = C::sin_poly(r, z);
  cr = C::cos_poly(z);
  const T half = std::floor(q * T(0.5));
  swap = q - T(2) * half;                                   // q odd
  sign_s = T(1) - T(2) * (half - T(2) * std::floor(half * T(0.5)));
  const T half1 = std::floor((q + T(1)) * T(0.5));
  sign_c = T(1) - T(2) * (half1 - T(2) * std::floor(half1 * T(0.5)));
}

template <class T>
void affine_strided(const T* w, std::size_t ldw, const T* bias, int rows, int inner, const T* x,
                    std::size_t ldx, T* out, std::size_t ldo, int points) {
  constexpr int MB = kTileRows<T>;
  constexpr int NB = kTilePoints<T>;
  const int full_rows = rows - rows % MB;
  const int full_points = points - points % NB;
  for (int m = 0; m < full_rows; m += MB) {
    const T* wm = w + static_cast<std::size_t>(m) * ldw;
    const T* bm = bias ? bias + m : nullptr;
    T* om = out + static_cast<std::size_t>(m) * ldo;
    for (int n = 0; n < full_points; n += NB) {
      affine_tile<T, MB, NB>(wm, ldw, bm, inner, x + n, ldx, om + n, ldo);
    }
    if (full_points < points) {
      affine_generic(wm, ldw, bm, MB, inner, x + full_points, ldx, om + full_points, ldo,
                     points - full_points);
    }
  }
  if (full_rows < rows) {
    affine_generic(w + static_cast<std::size_t>(full_rows) * ldw, ldw,
                   bias ? bias + full_rows : nullptr, rows - full_rows, inner, x, ldx,
                   out + static_cast<std::size_t>(full_rows) * ldo, ldo, points);
  }
}

}  // namespace

template <class T>
void affine_rows(const T* w, const T* bias, int rows, int inner, const T* x, std::size_t ldx,
                 T* out, std::size_t ldo, int points) {
  affine_strided(w, static_cast<std::size_t>(inner), bias, rows, inner, x, ldx, out, ldo, points);
}

template <class T>
void accumulate_outer(const T* dz, std::size_t ldz, int rows, const T* x, std::size_t ldx,
                      int inner, int points, double* dw) {
  // dz * x^T through affine_rows on a transposed copy of x.
  thread_local std::vector<T> xt;
  thread_local std::vector<T> prod;
  xt.resize(static_cast<std::size_t>(points) * inner);
  prod.resize(static_cast<std::size_t>(rows) * inner);
  constexpr int B = 16;
  for (int k0 = 0; k0 < inner; k0 += B) {
    for (int n0 = 0; n0 < points; n0 += B) {
      const int k1 = std::min(inner, k0 + B);
      const int n1 = std::min(points, n0 + B);
      for (int k = k0; k < k1; ++k) {
        for (int n = n0; n < n1; ++n) {
          xt[static_cast<std::size_t>(n) * inner + k] = x[static_cast<std::size_t>(k) * ldx + n];
        }
      }
    }
  }
  affine_strided<T>(dz, ldz, nullptr, rows, points, xt.data(), static_cast<std::size_t>(inner),
                    prod.data(), static_cast<std::size_t>(inner), inner);
  const std::size_t total = static_cast<std::size_t>(rows) * inner;
  for (std::size_t i = 0; i < total; ++i) dw[i] += static_cast<double>(prod[i]);
}

template <class T>
void sincos(const T* x, T* s, T* c, std::size_t n) {
#pragma GCC ivdep
  for (std::size_t i = 0; i < n; ++i) {
    T sr, cr, swap, sign_s, sign_c;
    reduce(x[i], sr, cr, swap, sign_s, sign_c);
    const T a = swap != T(0) ? cr : sr;
    const T b = swap != T(0) ? sr : cr;
    s[i] = sign_s * a;
    c[i] = sign_c * b;
  }
}

template <class T>
void sin(const T* x, T* s, std::size_t n) {
#pragma GCC ivdep
  for (std::size_t i = 0; i < n; ++i) {
    T sr, cr, swap, sign_s, sign_c;
    reduce(x[i], sr, cr, swap, sign_s, sign_c);
    s[i] = sign_s * (swap != T(0) ? cr : sr);
  }
}

template void affine_rows<double>(const double*, const double*, int, int, const double*,
                                  std::size_t, double*, std::size_t, int);
template void affine_rows<float>(const float*, const float*, int, int, const float*, std::size_t,
                                 float*, std::size_t, int);
template void accumulate_outer<double>(const double*, std::size_t, int, const double*,
                                       std::size_t, int, int, double*);
template void accumulate_outer<float>(const float*, std::size_t, int, const float*, std::size_t,
                                      int, int, double*);
template void sincos<double>(const double*, double*, double*, std::size_t);
template void sincos<float>(const float*, float*, float*, std::size_t);
template void sin<double>(const double*, double*, std::size_t);
template void sin<float>(const float*, float*, std::size_t);

}  // namespace molfield::kernels
