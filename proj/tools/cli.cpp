// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include "molfield/checkpoint.hpp"
#include "molfield/error.hpp"
#include "molfield/evalkit.hpp"
#include "molfield/fieldgen.hpp"
#include "molfield/molio.hpp"
#include "molfield/training.hpp"
#include "molfield/volio.hpp"
#include "outputs.hpp"

#ifndef MOLFIELD_VERSION
#define MOLFIELD_VERSION "0.0.0"
#endif

namespace molfield::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Io {
  std::ostream& out;
  std::ostream& err;
};

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::array<int, 3> parse_dims(const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), 'x', ',');
  std::vector<int> v;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("bad dims '" + text + "': expected N or NX,NY,NZ");
    }
  }
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw ConfigError("bad dims '" + text + "': expected N or NX,NY,NZ");
}

Precision parse_precision(const std::string& s) {
  if (s == "64") return Precision::kFloat64;
  if (s == "32") return Precision::kFloat32;
  throw ConfigError("precision must be 64 or 32, got '" + s + "'");
}

json file_entry(const fs::path& path) {
  return {{"path", path.generic_string()}, {"sha256", sha256_file(path)}};
}

// Stages the manifest last so it can list every other output.
void stage_manifest(StagedOutputs& staged, const fs::path& path, const std::string& command,
                    const json& params, const json& inputs, const json& results = json()) {
  json m;
  m["tool"] = "molfield";
  m["version"] = MOLFIELD_VERSION;
  m["command"] = command;
  m["parameters"] = params;
  if (params.contains("seed")) m["seed"] = params["seed"];
  m["inputs"] = inputs;
  json outs = json::array();
  for (const auto& e : staged.entries()) {
    outs.push_back({{"path", e.target.generic_string()}, {"sha256", e.sha256}});
  }
  m["outputs"] = outs;
  if (!results.is_null()) m["results"] = results;
  staged.add(path, m.dump(2) + "\n");
}

fs::path manifest_path_for(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

void require_parent_writable(const fs::path& output) {
  require_writable_dir(output.parent_path());
}

// ---------------------------------------------------------------- sample

struct SampleArgs {
  std::string input;
  std::string channels;
  std::string dims = "32";
  double padding = kDefaultPadding;
  std::optional<double> beta;
  std::string output;
  std::string unknown_elements = "reject";
  bool include_waters = false;
  int sdf_record = 1;
  double cull_epsilon = 0.0;

  json params() const {
    json p{{"input", input},       {"channels", channels},
           {"dims", dims},         {"padding", padding},
           {"output", output},     {"unknown-elements", unknown_elements},
           {"include-waters", include_waters}, {"sdf-record", sdf_record},
           {"cull-epsilon", cull_epsilon}};
    if (beta) p["beta"] = *beta;
    return p;
  }
};

bool is_molecule_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".xyz" || ext == ".pdb" || ext == ".ent" || ext == ".sdf" || ext == ".mol";
}

std::vector<fs::path> list_files(const fs::path& dir, bool (*keep)(const fs::path&)) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && keep(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void print_stats(std::ostream& out, const std::string& name, const VolumeGrid& v,
                 const std::vector<std::string>& channels) {
  for (int t = 0; t < v.channels; ++t) {
    const auto c = v.channel(t);
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s %s: min=%.6g max=%.6g\n", name.c_str(),
                  channels[t].c_str(), *lo, *hi);
    out << buf;
  }
}

int cmd_sample(const SampleArgs& a, Io& io) {
  const auto dims = parse_dims(a.dims);
  ChannelSpec spec;
  try {
    spec = parse_channel_spec(read_file(a.channels));
  } catch (const ParseError& e) {
    throw ParseError(a.channels + ": " + e.what());
  }
  if (a.beta) spec.beta = *a.beta;
  spec.validate();
  ReadOptions ro;
  if (a.unknown_elements == "tag") {
    ro.unknown_elements = UnknownElementPolicy::kTag;
  } else if (a.unknown_elements != "reject") {
    throw ConfigError("--unknown-elements must be reject or tag");
  }
  ro.include_waters = a.include_waters;
  ro.sdf_record = a.sdf_record;
  SampleOptions so{a.cull_epsilon};
  const auto names = spec.names();

  json inputs = json::array();
  inputs.push_back(file_entry(a.channels));
  StagedOutputs staged;
  const fs::path in(a.input);
  if (fs::is_directory(in)) {
    const auto files = list_files(in, is_molecule_file);
    if (files.empty()) throw Error("no molecule files in '" + a.input + "'");
    const fs::path outdir(a.output);
    fs::create_directories(outdir);
    require_writable_dir(outdir);
    std::vector<Molecule> mols;
    double extent = 0.0;
    for (const auto& f : files) {
      mols.push_back(read_molecule_file(f.string(), ro));
      extent = std::max(extent, bounding_cube(mols.back(), a.padding).extent);
      inputs.push_back(file_entry(f));
    }
    // One world scale for the whole dataset; each molecule stays centred.
    for (std::size_t i = 0; i < mols.size(); ++i) {
      const auto grid = cubic_grid(bounding_cube(mols[i], a.padding).center, extent, dims);
      const auto vol = sample_grid(mols[i], spec, grid, so);
      const std::string stem = files[i].stem().string();
      print_stats(io.out, stem, vol, names);
      staged.add(outdir / (stem + ".mvf"), write_volume(vol, names));
    }
    json results{{"molecules", mols.size()}, {"extent", extent}};
    stage_manifest(staged, outdir / "manifest.json", "sample", a.params(), inputs, results);
  } else {
    const fs::path out(a.output);
    require_parent_writable(out);
    const auto mol = read_molecule_file(a.input, ro);
    inputs.push_back(file_entry(in));
    const auto grid = auto_grid(mol, dims, a.padding);
    const auto vol = sample_grid(mol, spec, grid, so);
    print_stats(io.out, in.stem().string(), vol, names);
    staged.add(out, write_volume(vol, names));
    stage_manifest(staged, manifest_path_for(out), "sample", a.params(), inputs,
                   json{{"atoms", mol.size()}});
  }
  staged.commit();
  return 0;
}

// ----------------------------------------------------------------- train

struct TrainArgs {
  std::vector<std::string> volumes;
  std::string mode = "auto_decoder";
  TrainConfig cfg;
  std::string precision = "64";
  NetConfig net;
  std::optional<std::string> encoder_dims;
  std::vector<int> encoder_widths{16, 32, 64};
  std::string output;
  std::optional<std::string> loss_log;
  std::optional<std::string> resume;
  int log_every = 0;

  json params() const {
    json p{{"volumes", volumes},
           {"mode", mode},
           {"steps", cfg.steps},
           {"learning-rate", cfg.learning_rate},
           {"latent-learning-rate", cfg.latent_learning_rate},
           {"batch-voxels", cfg.batch_voxels},
           {"seed", cfg.seed},
           {"latent-init-scale", cfg.latent_init_scale},
           {"adam-beta1", cfg.adam_beta1},
           {"adam-beta2", cfg.adam_beta2},
           {"adam-epsilon", cfg.adam_epsilon},
           {"precision", precision},
           {"hidden-width", net.hidden_width},
           {"num-hidden-layers", net.num_hidden_layers},
           {"omega0", net.omega0},
           {"latent-dim", net.latent_dim},
           {"encoder-widths", encoder_widths},
           {"output", output},
           {"log-every", log_every}};
    if (encoder_dims) p["encoder-dims"] = *encoder_dims;
    if (loss_log) p["loss-log"] = *loss_log;
    if (resume) p["resume"] = *resume;
    return p;
  }
};

bool is_volume_file(const fs::path& p) { return p.extension() == ".mvf"; }

int cmd_train(TrainArgs a, Io& io) {
  if (a.mode == "auto_decoder") {
    a.cfg.mode = TrainMode::kAutoDecoder;
  } else if (a.mode == "auto_encoder") {
    a.cfg.mode = TrainMode::kAutoEncoder;
  } else {
    throw ConfigError("--mode must be auto_decoder or auto_encoder");
  }
  a.cfg.precision = parse_precision(a.precision);
  a.cfg.validate();

  std::vector<fs::path> paths;
  for (const auto& v : a.volumes) {
    if (fs::is_directory(v)) {
      const auto files = list_files(v, is_volume_file);
      paths.insert(paths.end(), files.begin(), files.end());
    } else {
      paths.emplace_back(v);
    }
  }
  if (paths.empty()) throw ConfigError("no volumes given");

  const fs::path out(a.output);
  const fs::path loss_path = a.loss_log ? fs::path(*a.loss_log) : fs::path(a.output + ".loss.csv");
  require_parent_writable(out);
  require_parent_writable(loss_path);

  json inputs = json::array();
  std::vector<VolumeGrid> volumes;
  std::vector<VolumeInfo> infos;
  for (const auto& p : paths) {
    auto nv = read_volume_file(p.string());
    inputs.push_back(file_entry(p));
    if (!volumes.empty()) {
      const auto& first = volumes.front();
      if (nv.volume.spec.dims != first.spec.dims || nv.volume.channels != first.channels) {
        throw ShapeError("volume '" + p.string() + "' has a different shape than '" +
                         paths.front().string() + "'");
      }
    }
    infos.push_back({p.stem().string(), nv.channel_names, nv.volume.spec});
    volumes.push_back(std::move(nv.volume));
  }
  a.net.out_dim = volumes.front().channels;
  a.net.validate();

  std::optional<EncoderConfig> enc;
  if (a.cfg.mode == TrainMode::kAutoEncoder) {
    EncoderConfig ec;
    ec.input_dims = a.encoder_dims ? parse_dims(*a.encoder_dims) : volumes.front().spec.dims;
    ec.in_channels = volumes.front().channels;
    ec.widths = a.encoder_widths;
    ec.latent_dim = a.net.latent_dim;
    ec.validate();
    if (ec.input_dims != volumes.front().spec.dims) {
      const auto& d = volumes.front().spec.dims;
      throw ConfigError("encoder input dims " + std::to_string(ec.input_dims[0]) + "x" +
                        std::to_string(ec.input_dims[1]) + "x" + std::to_string(ec.input_dims[2]) +
                        " differ from volume dims " + std::to_string(d[0]) + "x" +
                        std::to_string(d[1]) + "x" + std::to_string(d[2]));
    }
    enc = ec;
  }

  std::optional<Trainer> trainer;
  if (a.resume) {
    auto ck = read_checkpoint_file(*a.resume);
    inputs.push_back(file_entry(*a.resume));
    if (!(ck.state.net.config().hidden_width == a.net.hidden_width &&
          ck.state.net.config().num_hidden_layers == a.net.num_hidden_layers &&
          ck.state.net.config().latent_dim == a.net.latent_dim &&
          ck.state.net.config().omega0 == a.net.omega0 &&
          ck.state.net.config().out_dim == a.net.out_dim)) {
      throw ConfigError("network flags differ from the checkpoint being resumed");
    }
    trainer.emplace(volumes, a.cfg, std::move(ck.state));
  } else {
    trainer.emplace(volumes, a.cfg, a.net, enc);
  }
  trainer->run([&](std::int64_t step, double loss) {
    if (a.log_every > 0 && step % a.log_every == 0) {
      io.err << "step " << step << " loss " << fmt17(loss) << "\n";
    }
  });

  Checkpoint ck;
  ck.state = std::move(*trainer).release();
  ck.config = a.cfg;
  ck.volumes = infos;

  std::string log = "step,loss\n";
  for (std::size_t i = 0; i < ck.state.loss_history.size(); ++i) {
    log += std::to_string(i + 1) + "," + fmt17(ck.state.loss_history[i]) + "\n";
  }
  StagedOutputs staged;
  staged.add(out, write_checkpoint(ck));
  staged.add(loss_path, log);
  json results{{"steps", ck.state.step}};
  if (!ck.state.loss_history.empty()) results["final_loss"] = ck.state.loss_history.back();
  stage_manifest(staged, manifest_path_for(out), "train", a.params(), inputs, results);
  staged.commit();
  io.out << "trained " << ck.state.step << " steps";
  if (!ck.state.loss_history.empty()) io.out << ", final loss " << fmt17(ck.state.loss_history.back());
  io.out << "\n";
  return 0;
}

// ------------------------------------------------- reconstruct helpers

GridSpec unit_grid(std::array<int, 3> dims) {
  GridSpec g;
  g.dims = dims;
  g.origin = {-1.0, -1.0, -1.0};
  g.spacing = {2.0 / (dims[0] - 1), 2.0 / (dims[1] - 1), 2.0 / (dims[2] - 1)};
  return g;
}

std::vector<std::string> channel_names_of(const Checkpoint& ck) {
  const int d = ck.state.net.config().out_dim;
  if (!ck.volumes.empty() && ck.volumes.front().channel_names.size() == static_cast<std::size_t>(d)) {
    return ck.volumes.front().channel_names;
  }
  std::vector<std::string> names;
  for (int t = 0; t < d; ++t) names.push_back("c" + std::to_string(t));
  return names;
}

const LatentCode& latent_at(const Checkpoint& ck, int index) {
  const int n = static_cast<int>(ck.state.latents.size());
  if (index < 0 || index >= n) {
    throw ConfigError("latent index " + std::to_string(index) + " out of range: checkpoint has " +
                      std::to_string(n) + " latent" + (n == 1 ? "" : "s") +
                      (n > 0 ? " (valid 0.." + std::to_string(n - 1) + ")" : ""));
  }
  return ck.state.latents[index];
}

// Grid of the training volume for `index`, or the [-1,1] cube when the
// checkpoint carries no volume records.
GridSpec base_grid(const Checkpoint& ck, int index) {
  if (!ck.volumes.empty()) {
    return ck.volumes[std::clamp<std::size_t>(index, 0, ck.volumes.size() - 1)].grid;
  }
  return unit_grid({32, 32, 32});
}

GridSpec resize(const GridSpec& base, const std::optional<std::string>& dims) {
  if (!dims) return base;
  const auto d = parse_dims(*dims);
  return d == base.dims ? base : regrid(base, d);
}

Precision precision_for(const Checkpoint& ck, const std::optional<std::string>& flag) {
  if (flag) return parse_precision(*flag);
  return ck.config ? ck.config->precision : Precision::kFloat64;
}

// ----------------------------------------------------------- reconstruct

struct ReconstructArgs {
  std::string checkpoint;
  std::optional<int> latent_index;
  std::optional<std::string> latent_file;
  std::optional<std::string> latent_row;
  std::optional<std::string> encode;
  std::optional<std::string> dims;
  std::optional<std::string> reference;
  std::optional<std::string> report;
  std::optional<std::string> precision;
  std::string output;

  json params() const {
    json p{{"checkpoint", checkpoint}, {"output", output}};
    if (latent_index) p["latent-index"] = *latent_index;
    if (latent_file) p["latent-file"] = *latent_file;
    if (latent_row) p["latent-row"] = *latent_row;
    if (encode) p["encode"] = *encode;
    if (dims) p["dims"] = *dims;
    if (reference) p["reference"] = *reference;
    if (report) p["report"] = *report;
    if (precision) p["precision"] = *precision;
    return p;
  }
};

json psnr_json(const PsnrReport& r, const std::vector<std::string>& names) {
  auto num = [](double v) -> json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  json per = json::object();
  for (std::size_t t = 0; t < r.per_channel_psnr.size(); ++t) {
    const std::string n = t < names.size() ? names[t] : std::to_string(t);
    per[n] = {{"psnr", num(r.per_channel_psnr[t])}, {"mse", r.per_channel_mse[t]}};
  }
  return {{"peak", r.peak}, {"mse", r.mse}, {"psnr", num(r.overall_psnr)}, {"channels", per}};
}

int cmd_reconstruct(const ReconstructArgs& a, Io& io) {
  const fs::path out(a.output);
  require_parent_writable(out);
  if (a.report) require_parent_writable(*a.report);
  const int sources = (a.latent_index ? 1 : 0) + (a.latent_file ? 1 : 0) + (a.encode ? 1 : 0);
  if (sources > 1) throw ConfigError("give one of --latent-index, --latent-file, --encode");

  json inputs = json::array();
  const auto ck = read_checkpoint_file(a.checkpoint);
  inputs.push_back(file_entry(a.checkpoint));
  const Precision precision = precision_for(ck, a.precision);

  LatentCode latent;
  int grid_index = 0;
  std::optional<GridSpec> encoded_grid;
  if (a.latent_file) {
    const auto table = parse_latent_table(read_file(*a.latent_file));
    inputs.push_back(file_entry(*a.latent_file));
    if (table.latents.empty()) throw ConfigError("latent file has no rows");
    std::size_t row = 0;
    if (a.latent_row) {
      const auto it = std::find(table.names.begin(), table.names.end(), *a.latent_row);
      if (it != table.names.end()) {
        row = static_cast<std::size_t>(it - table.names.begin());
      } else {
        try {
          row = std::stoul(*a.latent_row);
        } catch (const std::exception&) {
          throw ConfigError("no latent row named '" + *a.latent_row + "'");
        }
        if (row >= table.latents.size()) {
          throw ConfigError("latent row " + *a.latent_row + " out of range: file has " +
                            std::to_string(table.latents.size()) + " rows");
        }
      }
    }
    latent = table.latents[row];
    // Rows named after a training volume reuse its grid.
    for (std::size_t v = 0; v < ck.volumes.size(); ++v) {
      if (ck.volumes[v].name == table.names[row]) grid_index = static_cast<int>(v);
    }
  } else if (a.encode) {
    if (!ck.state.encoder) throw ConfigError("--encode needs an auto-encoder checkpoint");
    const auto nv = read_volume_file(*a.encode);
    inputs.push_back(file_entry(*a.encode));
    latent = molfield::encode(*ck.state.encoder, nv.volume);
    encoded_grid = nv.volume.spec;
  } else {
    grid_index = a.latent_index.value_or(0);
    latent = latent_at(ck, grid_index);
  }
  if (latent.size() != static_cast<std::size_t>(ck.state.net.config().latent_dim)) {
    throw ShapeError("latent has " + std::to_string(latent.size()) + " values, network expects " +
                     std::to_string(ck.state.net.config().latent_dim));
  }

  std::optional<NamedVolume> ref;
  GridSpec grid;
  if (a.reference) {
    ref = read_volume_file(*a.reference);
    inputs.push_back(file_entry(*a.reference));
    grid = ref->volume.spec;
    if (a.dims && parse_dims(*a.dims) != grid.dims) {
      throw ConfigError("--dims must match the reference volume for a PSNR report");
    }
  } else {
    grid = resize(encoded_grid.value_or(base_grid(ck, grid_index)), a.dims);
  }
  grid.validate();

  const auto names = channel_names_of(ck);
  const VolumeGrid vol = reconstruct(ck.state.net, latent, grid, precision);
  StagedOutputs staged;
  staged.add(out, write_volume(vol, names));
  json results;
  if (ref) {
    const auto report = psnr(ref->volume, vol);
    io.out << format_psnr_report(report, names);
    results = psnr_json(report, names);
    if (a.report) staged.add(*a.report, results.dump(2) + "\n");
  }
  stage_manifest(staged, manifest_path_for(out), "reconstruct", a.params(), inputs, results);
  staged.commit();
  return 0;
}

// ----------------------------------------------------------- interpolate

struct InterpolateArgs {
  std::string checkpoint;
  int a = 0;
  int b = 1;
  int steps = 8;
  std::optional<std::string> dims;
  std::optional<std::string> precision;
  std::string output_dir;
  std::string prefix = "frame";

  json params() const {
    json p{{"checkpoint", checkpoint}, {"a", a},          {"b", b},
           {"steps", steps},           {"output-dir", output_dir}, {"prefix", prefix}};
    if (dims) p["dims"] = *dims;
    if (precision) p["precision"] = *precision;
    return p;
  }
};

std::string frame_name(const std::string& prefix, int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%03d.mvf", k);
  return prefix + buf;
}

int cmd_interpolate(const InterpolateArgs& a, Io& io) {
  const fs::path dir(a.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require_writable_dir(dir);
  if (a.steps < 2) throw ConfigError("--steps must be at least 2");

  const auto ck = read_checkpoint_file(a.checkpoint);
  json inputs = json::array({file_entry(a.checkpoint)});
  const LatentCode& za = latent_at(ck, a.a);
  const LatentCode& zb = latent_at(ck, a.b);
  const Precision precision = precision_for(ck, a.precision);
  const GridSpec grid = resize(base_grid(ck, a.a), a.dims);
  grid.validate();
  const auto names = channel_names_of(ck);

  StagedOutputs staged;
  const auto path = interpolate_latents(za, zb, a.steps);
  for (int k = 0; k < a.steps; ++k) {
    const auto vol = reconstruct(ck.state.net, path[k], grid, precision);
    staged.add(dir / frame_name(a.prefix, k), write_volume(vol, names));
  }
  stage_manifest(staged, dir / "manifest.json", "interpolate", a.params(), inputs);
  staged.commit();
  io.out << "wrote " << a.steps << " volumes to " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- export

struct ExportArgs {
  std::string format;
  std::string input;
  std::string output;
  std::string channel = "0";
  std::optional<std::string> molecule;
  std::optional<std::string> comment;

  json params() const {
    json p{{"format", format}, {"input", input}, {"output", output}, {"channel", channel}};
    if (molecule) p["molecule"] = *molecule;
    if (comment) p["comment"] = *comment;
    return p;
  }
};

int cmd_export(const ExportArgs& a, Io&) {
  const fs::path out(a.output);
  require_parent_writable(out);
  json inputs = json::array({file_entry(a.input)});
  StagedOutputs staged;
  if (a.format == "cube") {
    const auto nv = read_volume_file(a.input);
    int channel = -1;
    const auto it = std::find(nv.channel_names.begin(), nv.channel_names.end(), a.channel);
    if (it != nv.channel_names.end()) {
      channel = static_cast<int>(it - nv.channel_names.begin());
    } else {
      try {
        channel = std::stoi(a.channel);
      } catch (const std::exception&) {
        throw ConfigError("no channel named '" + a.channel + "'");
      }
    }
    Molecule mol;
    if (a.molecule) {
      mol = read_molecule_file(*a.molecule, {UnknownElementPolicy::kTag, false, 1});
      inputs.push_back(file_entry(*a.molecule));
    }
    const std::string comment =
        a.comment.value_or("molfield " + fs::path(a.input).filename().string() + " channel " +
                           (channel >= 0 && channel < static_cast<int>(nv.channel_names.size())
                                ? nv.channel_names[channel]
                                : a.channel));
    staged.add(out, export_cube(nv.volume, channel, mol, comment));
  } else if (a.format == "latents") {
    const auto ck = read_checkpoint_file(a.input);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < ck.state.latents.size(); ++i) {
      names.push_back(i < ck.volumes.size() ? ck.volumes[i].name : "latent_" + std::to_string(i));
    }
    staged.add(out, export_latents(ck.state.latents, names));
  } else {
    throw ConfigError("--format must be cube or latents");
  }
  stage_manifest(staged, manifest_path_for(out), "export", a.params(), inputs);
  staged.commit();
  return 0;
}

// ------------------------------------------------------------------ psnr

struct PsnrArgs {
  std::string reference;
  std::string test;
  bool json_output = false;
};

int cmd_psnr(const PsnrArgs& a, Io& io) {
  const auto ref = read_volume_file(a.reference);
  const auto test = read_volume_file(a.test);
  const auto report = psnr(ref.volume, test.volume);
  if (a.json_output) {
    io.out << psnr_json(report, ref.channel_names).dump(2) << "\n";
  } else {
    io.out << format_psnr_report(report, ref.channel_names);
  }
  return 0;
}

// ---------------------------------------------------------------- replay

std::string scalar_arg(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fmt17(v.get<double>());
  return v.dump();
}

std::vector<std::string> manifest_argv(const json& m) {
  std::vector<std::string> argv{m.at("command").get<std::string>()};
  for (const auto& [key, value] : m.at("parameters").items()) {
    if (value.is_null()) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) argv.push_back("--" + key);
      continue;
    }
    argv.push_back("--" + key);
    if (value.is_array()) {
      for (const auto& v : value) argv.push_back(scalar_arg(v));
    } else {
      argv.push_back(scalar_arg(value));
    }
  }
  return argv;
}

// CLI11 only reads config files for the top-level app, so subcommand files
// are applied here: keys fill options that were not given as flags.
void apply_config_file(CLI::App& sub, const std::string& path) {
  const auto items = CLI::ConfigTOML().from_file(path);
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub.get_name())) {
      throw CLI::ConfigError::Extras(item.fullname());
    }
    CLI::Option* op = sub.get_option_no_throw("--" + item.name);
    if (op == nullptr || item.name == "config") throw CLI::ConfigError::Extras(item.fullname());
    if (op->count() > 0) continue;
    op->add_result(item.inputs);
    op->run_callback();
  }
}

int cmd_replay(const std::string& manifest, bool verify, Io& io) {
  const json m = json::parse(read_file(manifest));
  if (m.value("tool", "") != "molfield") throw FormatError(manifest + ": not a molfield manifest");
  const int rc = run(manifest_argv(m), io.out, io.err);
  if (rc != 0 || !verify) return rc;
  int mismatches = 0;
  for (const auto& o : m.at("outputs")) {
    const fs::path p = o.at("path").get<std::string>();
    const std::string want = o.at("sha256").get<std::string>();
    const std::string got = fs::exists(p) ? sha256_file(p) : "missing";
    if (got != want) {
      io.err << "mismatch: " << p.generic_string() << " (" << got << " != " << want << ")\n";
      ++mismatches;
    }
  }
  if (mismatches > 0) return 1;
  io.out << "verified " << m.at("outputs").size() << " outputs\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Io io{out, err};
  CLI::App app{"Molecular neural fields: sample, fit and evaluate", "molfield"};
  app.set_version_flag("--version", MOLFIELD_VERSION);
  app.require_subcommand(1);

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Sample a molecule (or a directory of them) to MVF1");
  sample->add_option("--input,input", sa.input, "XYZ/PDB/SDF file or directory")->required();
  sample->add_option("--channels", sa.channels, "channel config file")->required();
  sample->add_option("--dims", sa.dims, "N or NX,NY,NZ")->capture_default_str();
  sample->add_option("--padding", sa.padding, "Å around the atoms")->capture_default_str();
  sample->add_option("--beta", sa.beta, "overrides the config's beta");
  sample->add_option("--output,-o", sa.output, "MVF1 file, or directory for directory input")
      ->required();
  sample->add_option("--unknown-elements", sa.unknown_elements, "reject|tag")
      ->capture_default_str();
  sample->add_flag("--include-waters", sa.include_waters, "keep PDB waters");
  sample->add_option("--sdf-record", sa.sdf_record, "1-based SDF record")->capture_default_str();
  sample->add_option("--cull-epsilon", sa.cull_epsilon, "skip contributions below this")
      ->capture_default_str();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Fit a modulated field to MVF1 volumes");
  std::optional<std::string> train_config;
  train->add_option("--config", train_config, "hyperparameter file (TOML/INI); flags take precedence");
  train->add_option("--volumes,volumes", ta.volumes, "MVF1 files or directories")->required();
  train->add_option("--mode", ta.mode, "auto_decoder|auto_encoder")->capture_default_str();
  train->add_option("--steps", ta.cfg.steps)->capture_default_str();
  train->add_option("--learning-rate", ta.cfg.learning_rate)->capture_default_str();
  train->add_option("--latent-learning-rate", ta.cfg.latent_learning_rate)->capture_default_str();
  train->add_option("--batch-voxels", ta.cfg.batch_voxels)->capture_default_str();
  train->add_option("--seed", ta.cfg.seed)->capture_default_str();
  train->add_option("--latent-init-scale", ta.cfg.latent_init_scale)->capture_default_str();
  train->add_option("--adam-beta1", ta.cfg.adam_beta1)->capture_default_str();
  train->add_option("--adam-beta2", ta.cfg.adam_beta2)->capture_default_str();
  train->add_option("--adam-epsilon", ta.cfg.adam_epsilon)->capture_default_str();
  train->add_option("--precision", ta.precision, "64|32")->capture_default_str();
  train->add_option("--hidden-width", ta.net.hidden_width)->capture_default_str();
  train->add_option("--num-hidden-layers", ta.net.num_hidden_layers)->capture_default_str();
  train->add_option("--omega0", ta.net.omega0)->capture_default_str();
  train->add_option("--latent-dim", ta.net.latent_dim)->capture_default_str();
  train->add_option("--encoder-dims", ta.encoder_dims, "defaults to the volume dims");
  train->add_option("--encoder-widths", ta.encoder_widths)->capture_default_str();
  train->add_option("--output,-o", ta.output, "checkpoint path")->required();
  train->add_option("--loss-log", ta.loss_log, "defaults to <output>.loss.csv");
  train->add_option("--resume", ta.resume, "continue from this checkpoint");
  train->add_option("--log-every", ta.log_every, "print the loss every N steps");

  ReconstructArgs ra;
  auto* recon = app.add_subcommand("reconstruct", "Evaluate a trained field on a grid");
  recon->add_option("--checkpoint,-c", ra.checkpoint)->required();
  recon->add_option("--latent-index", ra.latent_index);
  recon->add_option("--latent-file", ra.latent_file, "CSV from 'export --format latents'");
  recon->add_option("--latent-row", ra.latent_row, "row name or index in --latent-file");
  recon->add_option("--encode", ra.encode, "MVF1 volume to encode (auto-encoder checkpoints)");
  recon->add_option("--dims", ra.dims, "N or NX,NY,NZ; defaults to the training dims");
  recon->add_option("--reference", ra.reference, "ground-truth MVF1 for a PSNR report");
  recon->add_option("--report", ra.report, "write the PSNR report as JSON");
  recon->add_option("--precision", ra.precision, "64|32");
  recon->add_option("--output,-o", ra.output)->required();

  InterpolateArgs ia;
  auto* interp = app.add_subcommand("interpolate", "Reconstruct along a straight latent path");
  interp->add_option("--checkpoint,-c", ia.checkpoint)->required();
  interp->add_option("--a", ia.a, "first latent index")->required();
  interp->add_option("--b", ia.b, "last latent index")->required();
  interp->add_option("--steps", ia.steps)->capture_default_str();
  interp->add_option("--dims", ia.dims);
  interp->add_option("--precision", ia.precision, "64|32");
  interp->add_option("--output-dir", ia.output_dir)->required();
  interp->add_option("--prefix", ia.prefix)->capture_default_str();

  ExportArgs ea;
  auto* exp = app.add_subcommand("export", "Export a volume channel as cube or latents as CSV");
  exp->add_option("--format", ea.format, "cube|latents")->required();
  exp->add_option("--input,input", ea.input, "MVF1 (cube) or checkpoint (latents)")->required();
  exp->add_option("--output,-o", ea.output)->required();
  exp->add_option("--channel", ea.channel, "name or index")->capture_default_str();
  exp->add_option("--molecule", ea.molecule, "atoms to list in the cube header");
  exp->add_option("--comment", ea.comment);

  PsnrArgs pa;
  auto* ps = app.add_subcommand("psnr", "PSNR of a test volume against a reference");
  ps->add_option("--reference,reference", pa.reference)->required();
  ps->add_option("--test,test", pa.test)->required();
  ps->add_flag("--json", pa.json_output, "print JSON instead of key=value lines");

  std::string manifest;
  bool verify = false;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest)->required();
  replay->add_flag("--verify", verify, "compare output digests with the manifest");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (train->parsed() && train_config) apply_config_file(*train, *train_config);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sample->parsed()) return cmd_sample(sa, io);
    if (train->parsed()) return cmd_train(ta, io);
    if (recon->parsed()) return cmd_reconstruct(ra, io);
    if (interp->parsed()) return cmd_interpolate(ia, io);
    if (exp->parsed()) return cmd_export(ea, io);
    if (ps->parsed()) return cmd_psnr(pa, io);
    if (replay->parsed()) return cmd_replay(manifest, verify, io);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace molfield::cli
