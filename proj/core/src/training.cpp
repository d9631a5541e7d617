// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <string_view>

#include "encoder_tape.hpp"
#include "molfield/error.hpp"
#include "synthesis_engine.hpp"

namespace molfield {
namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

enum SeedStream : std::uint64_t { kNetInit = 0, kEncoderInit = 1, kLatentInit = 2, kEpoch = 16 };

void check_volumes(std::span<const VolumeGrid> volumes, int out_dim) {
  if (volumes.empty()) throw ConfigError("training needs at least one volume");
  const auto& first = volumes.front();
  first.spec.validate();
  for (std::size_t v = 0; v < volumes.size(); ++v) {
    const auto& vol = volumes[v];
    if (vol.spec.dims != first.spec.dims || vol.channels != first.channels) {
      throw ShapeError("volume " + std::to_string(v) + " differs in dims or channel count from volume 0");
    }
    if (vol.data.size() != vol.spec.voxel_count() * static_cast<std::size_t>(vol.channels)) {
      throw ShapeError("volume " + std::to_string(v) + " data length does not match its grid");
    }
    for (double x : vol.data) {
      if (!std::isfinite(x)) throw ConfigError("volume " + std::to_string(v) + " has non-finite samples");
    }
  }
  if (first.channels != out_dim) {
    throw ShapeError("volumes have " + std::to_string(first.channels) +
                     " channels but the network outputs " + std::to_string(out_dim));
  }
}

// Input indices sorted by volume content.
std::vector<std::size_t> canonical_order(std::span<const VolumeGrid> volumes) {
  std::vector<std::size_t> keys(volumes.size());
  for (std::size_t v = 0; v < volumes.size(); ++v) {
    const auto& d = volumes[v].data;
    keys[v] = std::hash<std::string_view>{}(
        std::string_view(reinterpret_cast<const char*>(d.data()), d.size() * sizeof(double)));
  }
  std::vector<std::size_t> order(volumes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    const auto& da = volumes[a].data;
    const auto& db = volumes[b].data;
    return std::lexicographical_compare(da.begin(), da.end(), db.begin(), db.end());
  });
  return order;
}

// Squared error over one volume's share of a minibatch. Accumulates network
// gradients into dparams and the latent gradient into dlatent.
template <class T>
double group_loss_gradient(detail::SynthesisEngine<T>& engine, const ModulatedField& net,
                           std::span<const double> latent, const VolumeGrid& volume,
                           std::span<const std::uint32_t> voxels, const std::vector<T>& coords,
                           double grad_scale, double* dparams, double* dlatent) {
  constexpr int C = detail::SynthesisEngine<T>::kChunk;
  const int d = net.config().out_dim;
  const std::size_t N = volume.spec.voxel_count();
  const auto mod = detail::modulate(net, latent);
  engine.set_modulation(mod);

  std::vector<T> buf(3 * C);
  double sse = 0.0;
  for (std::size_t p0 = 0; p0 < voxels.size(); p0 += C) {
    const int count = static_cast<int>(std::min<std::size_t>(C, voxels.size() - p0));
    for (int k = 0; k < count; ++k) {
      const std::uint32_t v = voxels[p0 + k];
      buf[k] = coords[v];
      buf[C + k] = coords[N + v];
      buf[2 * C + k] = coords[2 * N + v];
    }
    engine.forward(buf.data(), C, count, true);
    const T* y = engine.output();
    T* dy = engine.upstream();
    for (int t = 0; t < d; ++t) {
      const double* target = volume.data.data() + static_cast<std::size_t>(t) * N;
      for (int k = 0; k < count; ++k) {
        const std::size_t idx = static_cast<std::size_t>(t) * C + k;
        const double r = static_cast<double>(y[idx]) - target[voxels[p0 + k]];
        sse += r * r;
        dy[idx] = static_cast<T>(grad_scale * r);
      }
    }
    engine.backward(dparams);
  }
  detail::modulate_backward(net, latent, mod, engine.dgate(), dparams, dlatent);
  return sse;
}

// Groups batch entries by volume (ascending), keeping batch order inside a group.
std::vector<std::vector<std::uint32_t>> group_by_volume(std::span<const VoxelRef> batch,
                                                        std::size_t num_volumes) {
  std::vector<std::vector<std::uint32_t>> groups(num_volumes);
  for (const VoxelRef& ref : batch) {
    if (ref.volume >= num_volumes) throw ShapeError("voxel reference names a missing volume");
    groups[ref.volume].push_back(ref.voxel);
  }
  return groups;
}

}  // namespace

void TrainConfig::validate() const {
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(latent_learning_rate > 0.0)) throw ConfigError("latent_learning_rate must be positive");
  if (batch_voxels < 1) throw ConfigError("batch_voxels must be positive");
  if (!(latent_init_scale >= 0.0)) throw ConfigError("latent_init_scale must be non-negative");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam_beta1 must be in (0,1)");
  if (!(adam_beta2 > 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam_beta2 must be in (0,1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
}

LossGradient loss_gradient(const ModulatedField& net, std::span<const LatentCode> latents,
                           std::span<const VolumeGrid> volumes, std::span<const VoxelRef> batch,
                           Precision precision) {
  check_volumes(volumes, net.config().out_dim);
  if (latents.size() != volumes.size()) throw ShapeError("need one latent per volume");
  if (batch.empty()) throw ShapeError("empty batch");
  const std::size_t N = volumes.front().spec.voxel_count();
  for (const auto& ref : batch) {
    if (ref.voxel >= N) throw ShapeError("voxel reference out of range");
  }
  const auto groups = group_by_volume(batch, volumes.size());
  const auto points = normalize_points(volumes.front().spec);
  const double denom = static_cast<double>(batch.size()) * net.config().out_dim;

  LossGradient out;
  out.parameters.assign(net.parameter_count(), 0.0);
  out.latents.assign(latents.size(), std::vector<double>(net.config().latent_dim, 0.0));
  double sse = 0.0;
  auto run = [&]<class T>(T) {
    detail::SynthesisEngine<T> engine(net);
    const auto coords = detail::feature_major<T>(points);
    for (std::size_t v = 0; v < volumes.size(); ++v) {
      if (groups[v].empty()) continue;
      sse += group_loss_gradient<T>(engine, net, latents[v].values, volumes[v], groups[v], coords,
                                    2.0 / denom, out.parameters.data(), out.latents[v].data());
    }
  };
  if (precision == Precision::kFloat32) {
    run(float{});
  } else {
    run(double{});
  }
  out.loss = sse / denom;
  return out;
}

struct Trainer::Impl {
  std::span<const VolumeGrid> volumes;
  TrainConfig config;
  TrainState state;
  std::vector<std::size_t> canonical;  // slot -> input index
  std::size_t voxels = 0;
  std::vector<double> coords_d;
  std::vector<float> coords_f;
  std::unique_ptr<detail::SynthesisEngine<double>> engine_d;
  std::unique_ptr<detail::SynthesisEngine<float>> engine_f;
  std::int64_t cached_epoch = -1;
  std::vector<std::uint32_t> perm;
  std::vector<double> latent_flat;  // auto-decoder latents, input order
  bool latents_stale = false;

  void prepare();
  std::vector<VoxelRef> make_batch(std::int64_t step);
  const std::vector<std::uint32_t>& epoch_perm(std::int64_t epoch);
  double step();
  void refresh_encoded_latents();
  template <class T>
  double step_impl(detail::SynthesisEngine<T>& engine, const std::vector<T>& coords);
};

void Trainer::Impl::prepare() {
  config.validate();
  const auto& cfg = state.net.config();
  check_volumes(volumes, cfg.out_dim);
  if (volumes.size() > 0xffffffffu / std::max<std::size_t>(1, volumes.front().spec.voxel_count())) {
    throw ConfigError("dataset too large for 32-bit voxel indexing");
  }
  canonical = canonical_order(volumes);
  voxels = volumes.front().spec.voxel_count();
  const auto points = normalize_points(volumes.front().spec);
  if (config.precision == Precision::kFloat32) {
    coords_f = detail::feature_major<float>(points);
    engine_f = std::make_unique<detail::SynthesisEngine<float>>(state.net);
  } else {
    coords_d = detail::feature_major<double>(points);
    engine_d = std::make_unique<detail::SynthesisEngine<double>>(state.net);
  }
  const AdamHyper net_hyper{config.learning_rate, config.adam_beta1, config.adam_beta2,
                            config.adam_epsilon};
  AdamHyper aux_hyper = net_hyper;
  if (config.mode == TrainMode::kAutoDecoder) {
    aux_hyper.learning_rate = config.latent_learning_rate;
    if (state.latents.size() != volumes.size()) {
      throw ShapeError("state has " + std::to_string(state.latents.size()) + " latents for " +
                       std::to_string(volumes.size()) + " volumes");
    }
    latent_flat.clear();
    for (const auto& l : state.latents) {
      if (l.size() != static_cast<std::size_t>(cfg.latent_dim)) throw ShapeError("latent size mismatch");
      latent_flat.insert(latent_flat.end(), l.values.begin(), l.values.end());
    }
  } else {
    if (!state.encoder) throw ConfigError("auto-encoder state has no encoder");
    const auto& ec = state.encoder->config();
    const auto& first = volumes.front();
    if (ec.input_dims != first.spec.dims || ec.in_channels != first.channels) {
      throw ShapeError("volume dims/channels do not match the encoder input");
    }
    if (ec.latent_dim != cfg.latent_dim) throw ShapeError("encoder and network latent sizes differ");
  }
  state.net_optimizer.set_hyper(net_hyper);
  state.aux_optimizer.set_hyper(aux_hyper);
}

const std::vector<std::uint32_t>& Trainer::Impl::epoch_perm(std::int64_t epoch) {
  if (epoch != cached_epoch) {
    const std::size_t total = voxels * volumes.size();
    perm.resize(total);
    std::iota(perm.begin(), perm.end(), 0u);
    std::mt19937_64 rng(derive_seed(config.seed, kEpoch + static_cast<std::uint64_t>(epoch)));
    std::shuffle(perm.begin(), perm.end(), rng);
    cached_epoch = epoch;
  }
  return perm;
}

std::vector<VoxelRef> Trainer::Impl::make_batch(std::int64_t step) {
  const std::int64_t total = static_cast<std::int64_t>(voxels * volumes.size());
  const std::int64_t B = config.batch_voxels;
  std::vector<VoxelRef> batch;
  batch.reserve(static_cast<std::size_t>(B));
  for (std::int64_t g = step * B; g < (step + 1) * B; ++g) {
    const auto& p = epoch_perm(g / total);
    const std::uint32_t pair = p[static_cast<std::size_t>(g % total)];
    batch.push_back({static_cast<std::uint32_t>(pair / voxels),
                     static_cast<std::uint32_t>(pair % voxels)});
  }
  return batch;
}

template <class T>
double Trainer::Impl::step_impl(detail::SynthesisEngine<T>& engine, const std::vector<T>& coords) {
  auto& net = state.net;
  const int D = net.config().latent_dim;
  engine.bind(net);
  const auto batch = make_batch(state.step);
  // Batch volume ids are canonical slots.
  const auto groups = group_by_volume(batch, volumes.size());
  const double denom = static_cast<double>(batch.size()) * net.config().out_dim;

  std::vector<double> dparams(net.parameter_count(), 0.0);
  std::vector<double> daux;
  double sse = 0.0;
  if (config.mode == TrainMode::kAutoDecoder) {
    daux.assign(latent_flat.size(), 0.0);
    for (std::size_t slot = 0; slot < groups.size(); ++slot) {
      if (groups[slot].empty()) continue;
      const std::size_t v = canonical[slot];
      std::span<const double> latent(latent_flat.data() + v * D, static_cast<std::size_t>(D));
      sse += group_loss_gradient<T>(engine, net, latent, volumes[v], groups[slot], coords,
                                    2.0 / denom, dparams.data(), daux.data() + v * D);
    }
  } else {
    const ConvEncoder& enc = *state.encoder;
    daux.assign(enc.parameter_count(), 0.0);
    std::vector<double> dlatent(D);
    for (std::size_t slot = 0; slot < groups.size(); ++slot) {
      if (groups[slot].empty()) continue;
      const std::size_t v = canonical[slot];
      const auto tape = detail::encode_forward(enc, volumes[v].data);
      std::fill(dlatent.begin(), dlatent.end(), 0.0);
      sse += group_loss_gradient<T>(engine, net, tape.latent, volumes[v], groups[slot], coords,
                                    2.0 / denom, dparams.data(), dlatent.data());
      detail::encode_backward(enc, tape, dlatent, daux.data(), nullptr);
    }
  }
  const double loss = sse / denom;
  if (!std::isfinite(loss)) {
    throw Error("non-finite training loss at step " + std::to_string(state.step + 1));
  }

  state.net_optimizer.step(net.parameters(), dparams);
  if (config.mode == TrainMode::kAutoDecoder) {
    state.aux_optimizer.step(latent_flat, daux);
    for (std::size_t v = 0; v < volumes.size(); ++v) {
      std::copy_n(latent_flat.begin() + static_cast<std::ptrdiff_t>(v * D), D,
                  state.latents[v].values.begin());
    }
  } else {
    state.aux_optimizer.step(state.encoder->parameters(), daux);
    latents_stale = true;
  }
  ++state.step;
  state.loss_history.push_back(loss);
  return loss;
}

double Trainer::Impl::step() {
  return engine_f ? step_impl<float>(*engine_f, coords_f) : step_impl<double>(*engine_d, coords_d);
}

void Trainer::Impl::refresh_encoded_latents() {
  if (config.mode != TrainMode::kAutoEncoder || !state.encoder) return;
  state.latents.resize(volumes.size());
  for (std::size_t v = 0; v < volumes.size(); ++v) {
    state.latents[v] = encode(*state.encoder, volumes[v]);
  }
  latents_stale = false;
}

Trainer::Trainer(std::span<const VolumeGrid> volumes, const TrainConfig& config,
                 const NetConfig& net_config, std::optional<EncoderConfig> encoder)
    : impl_(std::make_unique<Impl>()) {
  config.validate();
  net_config.validate();
  check_volumes(volumes, net_config.out_dim);
  impl_->volumes = volumes;
  impl_->config = config;
  auto& st = impl_->state;
  st.mode = config.mode;
  st.net = init_network(net_config, derive_seed(config.seed, kNetInit));
  st.net_optimizer = Adam(st.net.parameter_count(), {});
  const auto canonical = canonical_order(volumes);
  if (config.mode == TrainMode::kAutoDecoder) {
    st.latents.assign(volumes.size(), LatentCode{std::vector<double>(net_config.latent_dim, 0.0)});
    std::mt19937_64 rng(derive_seed(config.seed, kLatentInit));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t slot = 0; slot < volumes.size(); ++slot) {
      for (double& x : st.latents[canonical[slot]].values) x = config.latent_init_scale * normal(rng);
    }
    st.aux_optimizer = Adam(volumes.size() * net_config.latent_dim, {});
  } else {
    EncoderConfig ec = encoder.value_or(EncoderConfig{});
    if (!encoder) {
      ec.input_dims = volumes.front().spec.dims;
      ec.in_channels = volumes.front().channels;
      ec.latent_dim = net_config.latent_dim;
    }
    if (ec.input_dims != volumes.front().spec.dims || ec.in_channels != volumes.front().channels) {
      throw ShapeError("volume dims/channels do not match the encoder input");
    }
    st.encoder = init_encoder(ec, derive_seed(config.seed, kEncoderInit));
    st.aux_optimizer = Adam(st.encoder->parameter_count(), {});
  }
  impl_->prepare();
  impl_->refresh_encoded_latents();
}

Trainer::Trainer(std::span<const VolumeGrid> volumes, const TrainConfig& config, TrainState state)
    : impl_(std::make_unique<Impl>()) {
  if (state.mode != config.mode) throw ConfigError("checkpoint was trained in the other mode");
  impl_->volumes = volumes;
  impl_->config = config;
  impl_->state = std::move(state);
  if (impl_->state.net_optimizer.size() != impl_->state.net.parameter_count()) {
    throw ShapeError("optimizer state does not match the network");
  }
  impl_->prepare();
  if (impl_->state.mode == TrainMode::kAutoEncoder) impl_->refresh_encoded_latents();
}

Trainer::Trainer(Trainer&&) noexcept = default;
Trainer& Trainer::operator=(Trainer&&) noexcept = default;
Trainer::~Trainer() = default;

double Trainer::step() { return impl_->step(); }

void Trainer::run(const std::function<void(std::int64_t, double)>& on_step) {
  while (impl_->state.step < impl_->config.steps) {
    const double loss = impl_->step();
    if (on_step) on_step(impl_->state.step, loss);
  }
  if (impl_->latents_stale) impl_->refresh_encoded_latents();
}

const TrainState& Trainer::state() const {
  if (impl_->latents_stale) impl_->refresh_encoded_latents();
  return impl_->state;
}

TrainState Trainer::release() && {
  if (impl_->latents_stale) impl_->refresh_encoded_latents();
  return std::move(impl_->state);
}

AutoDecoderResult train_auto_decoder(std::span<const VolumeGrid> volumes,
                                     const TrainConfig& config, const NetConfig& net_config) {
  TrainConfig cfg = config;
  cfg.mode = TrainMode::kAutoDecoder;
  Trainer trainer(volumes, cfg, net_config);
  trainer.run();
  TrainState st = std::move(trainer).release();
  return {std::move(st.net), std::move(st.latents), std::move(st.loss_history)};
}

AutoEncoderResult train_auto_encoder(std::span<const VolumeGrid> volumes,
                                     const TrainConfig& config, const NetConfig& net_config,
                                     std::optional<EncoderConfig> encoder) {
  TrainConfig cfg = config;
  cfg.mode = TrainMode::kAutoEncoder;
  Trainer trainer(volumes, cfg, net_config, std::move(encoder));
  trainer.run();
  TrainState st = std::move(trainer).release();
  return {std::move(st.net), std::move(*st.encoder), std::move(st.loss_history)};
}

VolumeGrid reconstruct(const ModulatedField& net, const LatentCode& latent, const GridSpec& grid,
                       Precision precision) {
  const auto points = normalize_points(grid);
  const auto values = forward(net, latent, points, precision);
  const int d = net.config().out_dim;
  VolumeGrid out(grid, d);
  const std::size_t n = points.size();
  for (std::size_t p = 0; p < n; ++p) {
    for (int t = 0; t < d; ++t) out.data[static_cast<std::size_t>(t) * n + p] = values[p * d + t];
  }
  return out;
}

}  // namespace molfield
