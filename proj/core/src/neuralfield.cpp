// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/neuralfield.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "molfield/error.hpp"
#include "molfield/kernels.hpp"
#include "synthesis_engine.hpp"

namespace molfield {

void NetConfig::validate() const {
  if (out_dim < 1) throw ConfigError("out_dim must be >= 1");
  if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
  if (num_hidden_layers < 1) throw ConfigError("num_hidden_layers must be >= 1");
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw ConfigError("omega0 must be positive");
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
}

std::size_t ParameterLayout::add(std::string name, std::vector<int> dims) {
  std::size_t size = 1;
  for (int d : dims) size *= static_cast<std::size_t>(d);
  const std::size_t offset = total_;
  tensors_.push_back({std::move(name), std::move(dims), offset, size});
  total_ += size;
  return offset;
}

ModulatedField::ModulatedField(const NetConfig& config) : config_(config) {
  config_.validate();
  const int H = config_.hidden_width;
  const int L = config_.num_hidden_layers;
  const int D = config_.latent_dim;
  for (int i = 0; i < L; ++i) {
    const std::string p = "synthesis." + std::to_string(i);
    synth_w_.push_back(layout_.add(p + ".weight", {H, i == 0 ? NetConfig::in_dim : H}));
    synth_b_.push_back(layout_.add(p + ".bias", {H}));
  }
  for (int i = 0; i < L; ++i) {
    const std::string p = "modulator." + std::to_string(i);
    mod_w_.push_back(layout_.add(p + ".weight", {H, i == 0 ? D : H + D}));
    mod_b_.push_back(layout_.add(p + ".bias", {H}));
  }
  out_w_ = layout_.add("output.weight", {config_.out_dim, H});
  out_b_ = layout_.add("output.bias", {config_.out_dim});
  params_.assign(layout_.total(), 0.0);
}

ModulatedField init_network(const NetConfig& config, std::uint64_t seed) {
  ModulatedField net(config);
  std::mt19937_64 rng(seed);
  auto params = net.parameters();
  auto fill = [&](std::size_t offset, std::size_t count, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < count; ++i) params[offset + i] = dist(rng);
  };
  const int H = config.hidden_width;
  const int D = config.latent_dim;
  for (int i = 0; i < config.num_hidden_layers; ++i) {
    const int fan_in = i == 0 ? NetConfig::in_dim : H;
    const double bound = i == 0 ? 1.0 / NetConfig::in_dim : std::sqrt(6.0 / fan_in) / config.omega0;
    fill(net.synthesis_weight_offset(i), static_cast<std::size_t>(H) * fan_in, bound);
  }
  for (int i = 0; i < config.num_hidden_layers; ++i) {
    const int fan_in = i == 0 ? D : H + D;
    fill(net.modulator_weight_offset(i), static_cast<std::size_t>(H) * fan_in,
         std::sqrt(6.0 / fan_in));
  }
  fill(net.output_weight_offset(), static_cast<std::size_t>(config.out_dim) * H,
       std::sqrt(6.0 / H) / config.omega0);
  return net;
}

namespace detail {

Modulation modulate(const ModulatedField& net, std::span<const double> latent) {
  const auto& cfg = net.config();
  if (latent.size() != static_cast<std::size_t>(cfg.latent_dim)) {
    throw ShapeError("latent has " + std::to_string(latent.size()) + " values, network expects " +
                     std::to_string(cfg.latent_dim));
  }
  const int H = cfg.hidden_width;
  const int D = cfg.latent_dim;
  Modulation mod;
  mod.pre.assign(cfg.num_hidden_layers, std::vector<double>(H));
  mod.gate.assign(cfg.num_hidden_layers, std::vector<double>(H));
  for (int i = 0; i < cfg.num_hidden_layers; ++i) {
    const double* A = net.modulator_weight(i);
    const double* c = net.modulator_bias(i);
    const int prev = i == 0 ? 0 : H;
    const int fan_in = prev + D;
    for (int r = 0; r < H; ++r) {
      const double* row = A + static_cast<std::size_t>(r) * fan_in;
      double acc = c[r];
      for (int k = 0; k < prev; ++k) acc += row[k] * mod.gate[i - 1][k];
      for (int k = 0; k < D; ++k) acc += row[prev + k] * latent[k];
      mod.pre[i][r] = acc;
      mod.gate[i][r] = acc > 0.0 ? acc : 0.0;
    }
  }
  return mod;
}

void modulate_backward(const ModulatedField& net, std::span<const double> latent,
                       const Modulation& mod, std::vector<std::vector<double>>& dgate,
                       double* dparams, double* dlatent) {
  const auto& cfg = net.config();
  const int H = cfg.hidden_width;
  const int D = cfg.latent_dim;
  std::vector<double> g(H);
  for (int i = cfg.num_hidden_layers - 1; i >= 0; --i) {
    const double* A = net.modulator_weight(i);
    double* dA = dparams + net.modulator_weight_offset(i);
    double* dc = dparams + net.modulator_bias_offset(i);
    const int prev = i == 0 ? 0 : H;
    const int fan_in = prev + D;
    for (int r = 0; r < H; ++r) g[r] = mod.pre[i][r] > 0.0 ? dgate[i][r] : 0.0;
    for (int r = 0; r < H; ++r) {
      if (g[r] == 0.0) continue;
      double* drow = dA + static_cast<std::size_t>(r) * fan_in;
      const double* row = A + static_cast<std::size_t>(r) * fan_in;
      dc[r] += g[r];
      for (int k = 0; k < prev; ++k) {
        drow[k] += g[r] * mod.gate[i - 1][k];
        dgate[i - 1][k] += row[k] * g[r];
      }
      for (int k = 0; k < D; ++k) {
        drow[prev + k] += g[r] * latent[k];
        dlatent[k] += row[prev + k] * g[r];
      }
    }
  }
}

template <class T>
std::vector<T> feature_major(std::span<const Vec3> points) {
  const std::size_t n = points.size();
  std::vector<T> out(3 * n);
  for (std::size_t p = 0; p < n; ++p) {
    out[p] = static_cast<T>(points[p].x);
    out[n + p] = static_cast<T>(points[p].y);
    out[2 * n + p] = static_cast<T>(points[p].z);
  }
  return out;
}

template std::vector<double> feature_major<double>(std::span<const Vec3>);
template std::vector<float> feature_major<float>(std::span<const Vec3>);

template <class T>
SynthesisEngine<T>::SynthesisEngine(const ModulatedField& net)
    : width_(net.config().hidden_width),
      layers_(net.config().num_hidden_layers),
      out_dim_(net.config().out_dim) {
  const std::size_t chunk = static_cast<std::size_t>(width_) * kChunk;
  omega_.assign(layers_, 1.0);
  omega_[0] = net.config().omega0;
  for (int i = 0; i < layers_; ++i) {
    w_off_.push_back(net.synthesis_weight_offset(i));
    b_off_.push_back(net.synthesis_bias_offset(i));
  }
  out_w_off_ = net.output_weight_offset();
  out_b_off_ = net.output_bias_offset();
  w_.resize(layers_);
  wt_.resize(layers_);
  b_.resize(layers_);
  gate_.assign(layers_, std::vector<T>(width_, T(0)));
  s_.assign(layers_, std::vector<T>(chunk));
  c_.assign(layers_, std::vector<T>(chunk));
  h_.assign(layers_ + 1, std::vector<T>(chunk));
  z_.resize(chunk);
  dh_.resize(chunk);
  dz_.resize(chunk);
  y_.resize(static_cast<std::size_t>(out_dim_) * kChunk);
  dy_.resize(static_cast<std::size_t>(out_dim_) * kChunk);
  dgate_.assign(layers_, std::vector<double>(width_, 0.0));
  bind(net);
}

template <class T>
void SynthesisEngine<T>::bind(const ModulatedField& net) {
  const auto p = net.parameters();
  const int H = width_;
  for (int i = 0; i < layers_; ++i) {
    const int inner = i == 0 ? NetConfig::in_dim : H;
    const std::size_t n = static_cast<std::size_t>(H) * inner;
    w_[i].resize(n);
    wt_[i].resize(n);
    b_[i].resize(H);
    for (int r = 0; r < H; ++r) {
      for (int k = 0; k < inner; ++k) {
        const T v = static_cast<T>(p[w_off_[i] + static_cast<std::size_t>(r) * inner + k]);
        w_[i][static_cast<std::size_t>(r) * inner + k] = v;
        wt_[i][static_cast<std::size_t>(k) * H + r] = v;
      }
      b_[i][r] = static_cast<T>(p[b_off_[i] + r]);
    }
  }
  w_out_.resize(static_cast<std::size_t>(out_dim_) * H);
  wt_out_.resize(w_out_.size());
  b_out_.resize(out_dim_);
  for (int r = 0; r < out_dim_; ++r) {
    for (int k = 0; k < H; ++k) {
      const T v = static_cast<T>(p[out_w_off_ + static_cast<std::size_t>(r) * H + k]);
      w_out_[static_cast<std::size_t>(r) * H + k] = v;
      wt_out_[static_cast<std::size_t>(k) * out_dim_ + r] = v;
    }
    b_out_[r] = static_cast<T>(p[out_b_off_ + r]);
  }
}

template <class T>
void SynthesisEngine<T>::set_modulation(const Modulation& mod) {
  for (int i = 0; i < layers_; ++i) {
    for (int r = 0; r < width_; ++r) gate_[i][r] = static_cast<T>(mod.gate[i][r]);
    std::fill(dgate_[i].begin(), dgate_[i].end(), 0.0);
  }
}

template <class T>
void SynthesisEngine<T>::forward(const T* coords, std::size_t ld, int count, bool cache) {
  if (count > kChunk) throw ShapeError("chunk larger than engine capacity");
  coords_ = coords;
  coords_ld_ = ld;
  count_ = count;
  const int H = width_;
  const std::size_t P = kChunk;
  for (int i = 0; i < layers_; ++i) {
    const T* in = i == 0 ? coords : h_[i].data();
    const std::size_t ldin = i == 0 ? ld : P;
    const int inner = i == 0 ? NetConfig::in_dim : H;
    kernels::affine_rows(w_[i].data(), b_[i].data(), H, inner, in, ldin, z_.data(), P, count);
    const T omega = static_cast<T>(omega_[i]);
    T* hn = h_[i + 1].data();
    for (int r = 0; r < H; ++r) {
      T* z = z_.data() + r * P;
      if (omega != T(1)) {
        for (int n = 0; n < count; ++n) z[n] *= omega;
      }
      T* s = s_[i].data() + r * P;
      if (cache) {
        kernels::sincos(z, s, c_[i].data() + r * P, static_cast<std::size_t>(count));
      } else {
        kernels::sin(z, s, static_cast<std::size_t>(count));
      }
      const T g = gate_[i][r];
      T* h = hn + r * P;
      for (int n = 0; n < count; ++n) h[n] = g * s[n];
    }
  }
  kernels::affine_rows(w_out_.data(), b_out_.data(), out_dim_, H, h_[layers_].data(), P,
                       y_.data(), P, count);
}

template <class T>
void SynthesisEngine<T>::backward(double* dparams) {
  const int H = width_;
  const std::size_t P = kChunk;
  const int count = count_;

  kernels::accumulate_outer(dy_.data(), P, out_dim_, h_[layers_].data(), P, H, count,
                            dparams + out_w_off_);
  for (int r = 0; r < out_dim_; ++r) {
    const T* dy = dy_.data() + r * P;
    T acc = 0;
    for (int n = 0; n < count; ++n) acc += dy[n];
    dparams[out_b_off_ + r] += static_cast<double>(acc);
  }
  kernels::affine_rows(wt_out_.data(), static_cast<const T*>(nullptr), H, out_dim_, dy_.data(),
                       P, dh_.data(), P, count);

  for (int i = layers_ - 1; i >= 0; --i) {
    const T omega = static_cast<T>(omega_[i]);
    double* db = dparams + b_off_[i];
    for (int r = 0; r < H; ++r) {
      const T* dh = dh_.data() + r * P;
      const T* s = s_[i].data() + r * P;
      const T* c = c_[i].data() + r * P;
      T* dz = dz_.data() + r * P;
      const T scale = gate_[i][r] * omega;
      T dgate = 0;
      T dbias = 0;
      for (int n = 0; n < count; ++n) {
        dgate += dh[n] * s[n];
        dz[n] = dh[n] * scale * c[n];
        dbias += dz[n];
      }
      dgate_[i][r] += static_cast<double>(dgate);
      db[r] += static_cast<double>(dbias);
    }
    const T* in = i == 0 ? coords_ : h_[i].data();
    const std::size_t ldin = i == 0 ? coords_ld_ : P;
    const int inner = i == 0 ? NetConfig::in_dim : H;
    kernels::accumulate_outer(dz_.data(), P, H, in, ldin, inner, count, dparams + w_off_[i]);
    if (i > 0) {
      kernels::affine_rows(wt_[i].data(), static_cast<const T*>(nullptr), H, H, dz_.data(), P,
                           dh_.data(), P, count);
    }
  }
}

template class SynthesisEngine<double>;
template class SynthesisEngine<float>;

}  // namespace detail

namespace {

template <class T>
std::vector<double> forward_impl(const ModulatedField& net, const LatentCode& latent,
                                 std::span<const Vec3> points) {
  const auto mod = detail::modulate(net, latent.values);
  detail::SynthesisEngine<T> engine(net);
  engine.set_modulation(mod);
  const int d = net.config().out_dim;
  const std::size_t n = points.size();
  const auto coords = detail::feature_major<T>(points);
  std::vector<double> out(n * d);
  constexpr int C = detail::SynthesisEngine<T>::kChunk;
  for (std::size_t p0 = 0; p0 < n; p0 += C) {
    const int count = static_cast<int>(std::min<std::size_t>(C, n - p0));
    engine.forward(coords.data() + p0, n, count, false);
    const T* y = engine.output();
    for (int t = 0; t < d; ++t) {
      for (int k = 0; k < count; ++k) {
        out[(p0 + k) * d + t] = static_cast<double>(y[static_cast<std::size_t>(t) * C + k]);
      }
    }
  }
  return out;
}

template <class T>
NetworkGradients backward_impl(const ModulatedField& net, const LatentCode& latent,
                               std::span<const Vec3> points, std::span<const double> upstream) {
  const int d = net.config().out_dim;
  const std::size_t n = points.size();
  if (upstream.size() != n * d) {
    throw ShapeError("upstream gradient must be points x out_dim");
  }
  const auto mod = detail::modulate(net, latent.values);
  detail::SynthesisEngine<T> engine(net);
  engine.set_modulation(mod);
  NetworkGradients grads;
  grads.parameters.assign(net.parameter_count(), 0.0);
  grads.latent.assign(latent.size(), 0.0);
  const auto coords = detail::feature_major<T>(points);
  constexpr int C = detail::SynthesisEngine<T>::kChunk;
  for (std::size_t p0 = 0; p0 < n; p0 += C) {
    const int count = static_cast<int>(std::min<std::size_t>(C, n - p0));
    engine.forward(coords.data() + p0, n, count, true);
    T* dy = engine.upstream();
    for (int t = 0; t < d; ++t) {
      for (int k = 0; k < count; ++k) {
        dy[static_cast<std::size_t>(t) * C + k] = static_cast<T>(upstream[(p0 + k) * d + t]);
      }
    }
    engine.backward(grads.parameters.data());
  }
  detail::modulate_backward(net, latent.values, mod, engine.dgate(), grads.parameters.data(),
                            grads.latent.data());
  return grads;
}

}  // namespace

std::vector<double> forward(const ModulatedField& net, const LatentCode& latent,
                            std::span<const Vec3> points, Precision precision) {
  return precision == Precision::kFloat32 ? forward_impl<float>(net, latent, points)
                                          : forward_impl<double>(net, latent, points);
}

NetworkGradients backward(const ModulatedField& net, const LatentCode& latent,
                          std::span<const Vec3> points, std::span<const double> upstream,
                          Precision precision) {
  return precision == Precision::kFloat32
             ? backward_impl<float>(net, latent, points, upstream)
             : backward_impl<double>(net, latent, points, upstream);
}

std::vector<Vec3> normalize_points(const GridSpec& grid) {
  grid.validate();
  const auto [nx, ny, nz] = grid.dims;
  std::vector<Vec3> out;
  out.reserve(grid.voxel_count());
  auto coord = [](int idx, int n) { return -1.0 + 2.0 * idx / (n - 1); };
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) out.push_back({coord(i, nx), coord(j, ny), coord(k, nz)});
    }
  }
  return out;
}

}  // namespace molfield
