// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "molfield/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "molfield/error.hpp"

namespace molfield {
namespace {

using detail::ByteReader;
using detail::ByteWriter;

void write_tensors(ByteWriter& w, const std::vector<TensorInfo>& tensors,
                   std::span<const double> params) {
  for (const auto& t : tensors) {
    w.u32(static_cast<std::uint32_t>(t.dims.size()));
    for (int d : t.dims) w.u32(static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < t.size; ++i) w.f64(params[t.offset + i]);
  }
}

void read_tensors(ByteReader& r, const std::vector<TensorInfo>& tensors, std::span<double> params) {
  for (const auto& t : tensors) {
    const auto rank = r.u32();
    if (rank != t.dims.size()) {
      throw FormatError("tensor " + t.name + ": rank " + std::to_string(rank) + ", expected " +
                        std::to_string(t.dims.size()));
    }
    for (int d : t.dims) {
      const auto got = r.u32();
      if (got != static_cast<std::uint32_t>(d)) {
        throw FormatError("tensor " + t.name + ": dimension " + std::to_string(got) +
                          ", expected " + std::to_string(d));
      }
    }
    for (std::size_t i = 0; i < t.size; ++i) params[t.offset + i] = r.f64();
  }
}

void write_header(ByteWriter& w, const NetConfig& c) {
  w.tag("MNF1");
  w.i32(NetConfig::in_dim);
  w.i32(c.out_dim);
  w.i32(c.hidden_width);
  w.i32(c.num_hidden_layers);
  w.i32(c.latent_dim);
  w.f64(c.omega0);
}

ModulatedField read_net_body(ByteReader& r) {
  if (r.tag() != "MNF1") throw FormatError("not an MNF1 checkpoint (bad magic)");
  const int in_dim = r.i32();
  if (in_dim != NetConfig::in_dim) throw FormatError("unsupported in_dim " + std::to_string(in_dim));
  NetConfig c;
  c.out_dim = r.i32();
  c.hidden_width = r.i32();
  c.num_hidden_layers = r.i32();
  c.latent_dim = r.i32();
  c.omega0 = r.f64();
  // Guard against absurd sizes before allocating.
  if (c.out_dim <= 0 || c.hidden_width <= 0 || c.num_hidden_layers <= 0 || c.latent_dim <= 0 ||
      c.out_dim > 4096 || c.hidden_width > 65536 || c.num_hidden_layers > 1024 ||
      c.latent_dim > 65536) {
    throw FormatError("MNF1 header has out-of-range sizes");
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("MNF1 header: ") + e.what());
  }
  ModulatedField net(c);
  read_tensors(r, net.tensors(), net.parameters());
  return net;
}

// Each section: 4-byte tag, u64 payload length, payload.
void section(ByteWriter& w, std::string_view tag, const ByteWriter& payload) {
  w.tag(tag);
  const std::string& p = const_cast<ByteWriter&>(payload).buffer();
  w.u64(p.size());
  w.bytes(p);
}

void write_adam(ByteWriter& w, const Adam& a) {
  w.u64(static_cast<std::uint64_t>(a.steps()));
  w.u64(a.size());
  for (double v : a.first_moment()) w.f64(v);
  for (double v : a.second_moment()) w.f64(v);
}

Adam read_adam(ByteReader& r) {
  const auto steps = static_cast<std::int64_t>(r.u64());
  const auto n = r.u64();
  if (n > r.remaining() / 16) throw FormatError("optimizer section truncated");
  std::vector<double> m(n), v(n);
  for (auto& x : m) x = r.f64();
  for (auto& x : v) x = r.f64();
  Adam a(n, {});
  a.restore(steps, std::move(m), std::move(v));
  return a;
}

void write_encoder(ByteWriter& w, const ConvEncoder& e) {
  const auto& c = e.config();
  for (int d : c.input_dims) w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(c.in_channels));
  w.u32(static_cast<std::uint32_t>(c.latent_dim));
  w.u32(static_cast<std::uint32_t>(c.widths.size()));
  for (int x : c.widths) w.u32(static_cast<std::uint32_t>(x));
  write_tensors(w, e.tensors(), e.parameters());
}

ConvEncoder read_encoder(ByteReader& r) {
  EncoderConfig c;
  for (int& d : c.input_dims) d = static_cast<int>(r.u32());
  c.in_channels = static_cast<int>(r.u32());
  c.latent_dim = static_cast<int>(r.u32());
  const auto stages = r.u32();
  if (stages == 0 || stages > 16) throw FormatError("encoder stage count out of range");
  c.widths.resize(stages);
  for (int& x : c.widths) x = static_cast<int>(r.u32());
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("encoder section: ") + e.what());
  }
  ConvEncoder e(c);
  read_tensors(r, e.tensors(), e.parameters());
  return e;
}

void write_config(ByteWriter& w, const TrainConfig& c) {
  w.u32(c.mode == TrainMode::kAutoEncoder ? 1 : 0);
  w.u64(static_cast<std::uint64_t>(c.steps));
  w.f64(c.learning_rate);
  w.f64(c.latent_learning_rate);
  w.u64(static_cast<std::uint64_t>(c.batch_voxels));
  w.u64(c.seed);
  w.f64(c.latent_init_scale);
  w.f64(c.adam_beta1);
  w.f64(c.adam_beta2);
  w.f64(c.adam_epsilon);
  w.u32(c.precision == Precision::kFloat32 ? 1 : 0);
}

TrainConfig read_config(ByteReader& r) {
  TrainConfig c;
  c.mode = r.u32() == 1 ? TrainMode::kAutoEncoder : TrainMode::kAutoDecoder;
  c.steps = static_cast<int>(r.u64());
  c.learning_rate = r.f64();
  c.latent_learning_rate = r.f64();
  c.batch_voxels = static_cast<int>(r.u64());
  c.seed = r.u64();
  c.latent_init_scale = r.f64();
  c.adam_beta1 = r.f64();
  c.adam_beta2 = r.f64();
  c.adam_epsilon = r.f64();
  c.precision = r.u32() == 1 ? Precision::kFloat32 : Precision::kFloat64;
  return c;
}

}  // namespace

std::string write_network(const ModulatedField& net) {
  ByteWriter w;
  write_header(w, net.config());
  write_tensors(w, net.tensors(), net.parameters());
  w.tag("END!");
  w.u64(0);
  return w.take();
}

ModulatedField read_network(std::string_view bytes) { return read_checkpoint(bytes).state.net; }

std::string write_checkpoint(const Checkpoint& ck) {
  const TrainState& st = ck.state;
  ByteWriter w;
  write_header(w, st.net.config());
  write_tensors(w, st.net.tensors(), st.net.parameters());

  if (!st.latents.empty()) {
    ByteWriter p;
    const std::size_t dim = st.latents.front().size();
    p.u32(static_cast<std::uint32_t>(st.latents.size()));
    p.u32(static_cast<std::uint32_t>(dim));
    for (const auto& l : st.latents) {
      if (l.size() != dim) throw ShapeError("latents differ in dimension");
      for (double v : l.values) p.f64(v);
    }
    section(w, "LATS", p);
  }
  if (st.encoder) {
    ByteWriter p;
    write_encoder(p, *st.encoder);
    section(w, "ENCD", p);
  }
  {
    ByteWriter p;
    p.u64(static_cast<std::uint64_t>(st.step));
    p.u32(st.mode == TrainMode::kAutoEncoder ? 1 : 0);
    write_adam(p, st.net_optimizer);
    write_adam(p, st.aux_optimizer);
    section(w, "OPTM", p);
  }
  {
    ByteWriter p;
    p.u64(st.loss_history.size());
    for (double v : st.loss_history) p.f64(v);
    section(w, "LOSS", p);
  }
  if (ck.config) {
    ByteWriter p;
    write_config(p, *ck.config);
    section(w, "CONF", p);
  }
  if (!ck.volumes.empty()) {
    ByteWriter p;
    p.u32(static_cast<std::uint32_t>(ck.volumes.size()));
    for (const auto& v : ck.volumes) {
      p.str(v.name);
      p.u32(static_cast<std::uint32_t>(v.channel_names.size()));
      for (const auto& c : v.channel_names) p.str(c);
      for (int d : v.grid.dims) p.u32(static_cast<std::uint32_t>(d));
      for (int a = 0; a < 3; ++a) p.f64(v.grid.origin[a]);
      for (int a = 0; a < 3; ++a) p.f64(v.grid.spacing[a]);
    }
    section(w, "VOLS", p);
  }
  w.tag("END!");
  w.u64(0);
  return w.take();
}

Checkpoint read_checkpoint(std::string_view bytes) {
  ByteReader r(bytes, "MNF1 checkpoint");
  Checkpoint ck;
  ck.state.net = read_net_body(r);
  bool ended = false;
  while (!ended) {
    const std::string tag(r.tag());
    const auto length = r.u64();
    ByteReader p(r.take(length), "MNF1 section " + tag);
    if (tag == "END!") {
      ended = true;
    } else if (tag == "LATS") {
      const auto count = p.u32();
      const auto dim = p.u32();
      if (dim != static_cast<std::uint32_t>(ck.state.net.config().latent_dim)) {
        throw FormatError("latent table dimension " + std::to_string(dim) +
                          " does not match the network");
      }
      if (static_cast<std::uint64_t>(count) * dim * 8 != p.remaining()) {
        throw FormatError("latent table length mismatch");
      }
      ck.state.latents.resize(count);
      for (auto& l : ck.state.latents) {
        l.values.resize(dim);
        for (double& v : l.values) v = p.f64();
      }
    } else if (tag == "ENCD") {
      ck.state.encoder = read_encoder(p);
    } else if (tag == "OPTM") {
      ck.state.step = static_cast<std::int64_t>(p.u64());
      ck.state.mode = p.u32() == 1 ? TrainMode::kAutoEncoder : TrainMode::kAutoDecoder;
      ck.state.net_optimizer = read_adam(p);
      ck.state.aux_optimizer = read_adam(p);
    } else if (tag == "LOSS") {
      const auto n = p.u64();
      if (n * 8 != p.remaining()) throw FormatError("loss history length mismatch");
      ck.state.loss_history.resize(n);
      for (double& v : ck.state.loss_history) v = p.f64();
    } else if (tag == "CONF") {
      ck.config = read_config(p);
    } else if (tag == "VOLS") {
      const auto n = p.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        VolumeInfo v;
        v.name = p.str();
        const auto nc = p.u32();
        if (nc > p.remaining()) throw FormatError("volume section truncated");
        for (std::uint32_t c = 0; c < nc; ++c) v.channel_names.push_back(p.str());
        for (int& d : v.grid.dims) d = static_cast<int>(p.u32());
        for (int a = 0; a < 3; ++a) v.grid.origin[a] = p.f64();
        for (int a = 0; a < 3; ++a) v.grid.spacing[a] = p.f64();
        ck.volumes.push_back(std::move(v));
      }
    } else {
      throw FormatError("unknown MNF1 section '" + tag + "'");
    }
    if (!ended && !p.done()) throw FormatError("trailing bytes in MNF1 section " + tag);
  }
  if (!r.done()) throw FormatError("trailing bytes after MNF1 END! section");
  if (ck.state.step != static_cast<std::int64_t>(ck.state.loss_history.size())) {
    throw FormatError("checkpoint step counter disagrees with its loss history");
  }
  if (ck.state.net_optimizer.size() == 0) {
    ck.state.net_optimizer = Adam(ck.state.net.parameter_count(), {});
  }
  return ck;
}

Checkpoint read_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return read_checkpoint(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace molfield
